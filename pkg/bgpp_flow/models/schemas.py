from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


class Degeneracy(str, Enum):
    """Equality pattern of (t1, t2, t3), read positionally."""

    GENERIC = "generic"
    EH_I = "eh_i"  # t2 = t3
    EH_II = "eh_ii"  # t1 = t2
    PAIR_13 = "pair_13"  # t1 = t3, the remaining positional pair
    ISOTROPIC = "isotropic"


class MetricParams(_Frozen):
    t1: float
    t2: float
    t3: float
    t_max: float
    t_min: float
    order: Tuple[int, int, int]  # indices sorting (t1, t2, t3) ascending
    degeneracy: Degeneracy
    tol: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3], dtype=float)

    @property
    def sorted_values(self) -> Tuple[float, float, float]:
        ts = (self.t1, self.t2, self.t3)
        return tuple(ts[i] for i in self.order)


class MetricProfile(_Frozen):
    A: float
    B: float
    C: float
    f2: float
    a2: float
    b2: float
    c2: float


class CanonicalState(_Frozen):
    t: float
    theta: float
    phi: float
    psi: float
    P_t: float
    P_theta: float
    P_phi: float
    P_psi: float


class MixedState(_Frozen):
    t: float
    P_t: float
    M1: float
    M2: float
    M3: float
    phi: float
    theta: float
    psi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.P_t, self.M1, self.M2, self.M3, self.phi, self.theta, self.psi])

    @classmethod
    def from_array(cls, x) -> "MixedState":
        return cls(t=x[0], P_t=x[1], M1=x[2], M2=x[3], M3=x[4], phi=x[5], theta=x[6], psi=x[7])


class ReducedState(_Frozen):
    t: float
    P_t: float
    M1: float
    M2: float
    M3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.P_t, self.M1, self.M2, self.M3])

    @classmethod
    def from_array(cls, x) -> "ReducedState":
        return cls(t=x[0], P_t=x[1], M1=x[2], M2=x[3], M3=x[4])


class IntegralValues(_Frozen):
    H: float
    P_phi: float
    C: float
    I: float  # noqa: E741


class LevelSet(_Frozen):
    e: float
    m2: float = Field(ge=0.0)
    n2: float


class EHState(_Frozen):
    rho: float
    P_rho: float
    M1: float
    M2: float
    M3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.P_rho, self.M1, self.M2, self.M3])

    @classmethod
    def from_array(cls, x) -> "EHState":
        return cls(rho=x[0], P_rho=x[1], M1=x[2], M2=x[3], M3=x[4])


class EHLevels(_Frozen):
    e: float
    m3: float
    mu2: float = Field(ge=0.0)
    gamma2: float = Field(gt=0.0)
    roots: Optional[Tuple[float, float, float]] = None


class EllipticModulus(_Frozen):
    k: float
    k2: float

    @field_validator("k2")
    @classmethod
    def _real_branch(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"k2 must lie in [0, 1], got {v}")
        return v

    @classmethod
    def from_k2(cls, k2: float) -> "EllipticModulus":
        return cls(k=float(np.sqrt(max(k2, 0.0))), k2=k2)


class EulerCaseId(str, Enum):
    I = "I"  # noqa: E741
    II = "II"
    III = "III"
    AXIAL = "axial"  # two equal parameters, trigonometric solution


class EulerCase(_Frozen):
    """Closed-form Euler solution on one level set.

    Amplitudes and signs refer to the sorted frame (t1 < t2 < t3); ``order``
    and ``parity`` map it back to the caller's positional components.
    """

    case_id: EulerCaseId
    k2: float
    sigma_rate: float
    amplitudes: Tuple[float, float, float]
    signs: Tuple[int, int]
    sigma0: float  # phase at tau = 0, sigma = sigma_rate * tau + sigma0
    tau0: float  # -sigma0 / sigma_rate, 0 when the rate vanishes
    order: Tuple[int, int, int]
    parity: int
    m: float
    axis: Optional[int] = None
    ill_conditioned: bool = False


class FlowKind(str, Enum):
    FULL = "full"
    REDUCED = "reduced"
    EH = "eh"


class IntegratorConfig(_Frozen):
    rel_tol: float = Field(default=1e-10, gt=0.0)
    abs_tol: float = Field(default=1e-12, gt=0.0)
    max_steps: int = Field(default=200000, ge=1)
    sample_stride: float = Field(default=0.1, gt=0.0)


class TrajectorySample(_Frozen):
    lam: float
    state: Tuple[float, ...]
    integrals: Dict[str, float]
    tau: Optional[float] = None


class Trajectory(_Frozen):
    flow: FlowKind
    state_names: Tuple[str, ...]
    samples: List[TrajectorySample]
    drift_report: Dict[str, float]
    n_steps: int
    n_rejected: int

    def states(self) -> np.ndarray:
        return np.array([s.state for s in self.samples])

    def lambdas(self) -> np.ndarray:
        return np.array([s.lam for s in self.samples])


class CheckResult(_Frozen):
    name: str
    value: float
    tolerance: float
    passed: bool
    details: Dict[str, float] = Field(default_factory=dict)


class VerificationSection(_Frozen):
    name: str
    checks: List[CheckResult]
    passed: bool


class VerificationReport(_Frozen):
    seed: int
    sections: List[VerificationSection]
    passed: bool


class AnalyticReport(_Frozen):
    case_id: str
    n_samples: int
    max_error: Tuple[float, ...]
    max_abs_error: float
    tau_mismatch: float = 0.0  # max |tau from quadrature - tau integrated along the flow|
    n_branches: int = 1


class RunConfig(_Frozen):
    command: str
    params: Optional[Tuple[float, float, float]] = None
    gamma2: Optional[float] = None
    state: Optional[Tuple[float, ...]] = None
    levels: Optional[Tuple[float, float, float]] = None
    span: Tuple[float, float] = (0.0, 1.0)
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    grid: Optional[Tuple[float, float, int]] = None
    out: Optional[Path] = None
    fmt: str = "csv"
    seed: int = 0


class SingularEnd(str, Enum):
    """Endpoint carrying an inverse-square-root singularity in a quadrature."""

    LEFT = "left"
    RIGHT = "right"
    BOTH = "both"
    NONE = "none"
