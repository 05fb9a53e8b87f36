from pathlib import Path
from typing import Optional

from ..core.config import OUTPUTS_DIR


def prepare_output(path: Optional[Path], default_name: str) -> Path:
    """Resolve an output path, defaulting to OUTPUTS_DIR/default_name, and create its parent."""
    target = Path(path) if path is not None else OUTPUTS_DIR / default_name
    target.parent.mkdir(parents=True, exist_ok=True)
    return target
