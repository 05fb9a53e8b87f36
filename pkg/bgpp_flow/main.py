from .cli.commands import bgpp as cli
from .core.config import ensure_dirs
from .core.logger import get_logger

ensure_dirs()
logger = get_logger(__name__)


def main():
    logger.debug("Starting the bgpp command line")
    cli()


if __name__ == "__main__":
    main()
