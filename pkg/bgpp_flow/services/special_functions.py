"""Jacobi elliptic functions, incomplete elliptic integrals of the first and
third kind, and quadrature with a square-root endpoint substitution.

All kernels delegate to scipy.special (``ellipj`` and the Carlson forms
``elliprf``/``elliprj``) and scipy.integrate.quad.
"""

import math
from typing import Callable, Iterable, Tuple

import numpy as np
from pydantic import ValidationError
from scipy import integrate, optimize, special

from ..core.config import QUAD_LIMIT, QUAD_TOL
from ..core.exceptions import CharacteristicPole, ModulusOutOfRange, NoConvergence, NonFinite, TurningPointCrossed
from ..core.logger import get_logger
from ..models.schemas import EllipticModulus, SingularEnd

logger = get_logger(__name__)


def _check_modulus(k2: float, allow_one: bool) -> EllipticModulus:
    if not math.isfinite(k2):
        raise NonFinite(f"Elliptic parameter must be finite, got k2={k2}")
    try:
        modulus = EllipticModulus.from_k2(k2)
    except ValidationError as e:
        raise ModulusOutOfRange(f"k2={k2} is outside [0, 1]") from e
    if not allow_one and modulus.k2 == 1.0:
        raise ModulusOutOfRange(f"k2={k2} is outside [0, 1)")
    return modulus


def jacobi_sn_cn_dn(u, k2: float) -> Tuple:
    """Jacobi elliptic functions sn, cn, dn for real argument and 0 <= k2 <= 1.

    The two end points of the parameter range use the exact trigonometric and
    hyperbolic forms. Accepts scalars or numpy arrays for ``u``.

    Raises:
        ModulusOutOfRange: if k2 is outside [0, 1]
    """
    _check_modulus(k2, allow_one=True)
    if k2 == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(np.asarray(u, dtype=float))[()]
    if k2 == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech
    sn, cn, dn, _ = special.ellipj(u, k2)
    return sn, cn, dn


def elliptic_K(k2: float) -> float:
    """Complete integral of the first kind, K = R_F(0, 1 - k2, 1).

    Raises:
        ModulusOutOfRange: if k2 is outside [0, 1)
    """
    _check_modulus(k2, allow_one=False)
    return float(special.elliprf(0.0, 1.0 - k2, 1.0))


def elliptic_Pi_complete(n: float, k2: float) -> float:
    """Complete integral of the third kind for n < 1.

    Raises:
        ModulusOutOfRange: if k2 is outside [0, 1)
        CharacteristicPole: if n >= 1
    """
    _check_modulus(k2, allow_one=False)
    if n >= 1.0:
        raise CharacteristicPole(f"Complete Pi diverges for n={n} >= 1")
    K = float(special.elliprf(0.0, 1.0 - k2, 1.0))
    if n == 0.0:
        return K
    return K + n / 3.0 * float(special.elliprj(0.0, 1.0 - k2, 1.0, 1.0 - n))


def _reduce_amplitude(phi: float) -> Tuple[int, float]:
    """phi = j*pi + r with r in [-pi/2, pi/2]."""
    j = int(math.floor(phi / math.pi + 0.5))
    return j, phi - j * math.pi


def _carlson_terms(r: float, k2: float) -> Tuple[float, float, float]:
    s = math.sin(r)
    c2 = math.cos(r) ** 2
    d2 = 1.0 - k2 * s * s
    return s, c2, d2


def elliptic_F(phi: float, k2: float) -> float:
    """Incomplete integral of the first kind F(phi | k2), any real phi.

    Raises:
        ModulusOutOfRange: if k2 is outside [0, 1)
    """
    _check_modulus(k2, allow_one=False)
    if not math.isfinite(phi):
        raise NonFinite(f"Amplitude must be finite, got phi={phi}")
    if k2 == 0.0:
        return float(phi)
    j, r = _reduce_amplitude(phi)
    s, c2, d2 = _carlson_terms(r, k2)
    value = s * float(special.elliprf(c2, d2, 1.0))
    if j:
        value += 2.0 * j * elliptic_K(k2)
    return value


def elliptic_Pi(phi: float, n: float, k2: float) -> float:
    """Incomplete integral of the third kind Pi(phi, n | k2) on the principal branch.

    Uses Pi = sin(phi) R_F + (n/3) sin^3(phi) R_J(cos^2, 1 - k2 sin^2, 1, 1 - n sin^2)
    on the reduced amplitude, plus whole half-periods of the complete integral.

    Raises:
        ModulusOutOfRange: if k2 is outside [0, 1)
        CharacteristicPole: if 1 - n sin^2(theta) vanishes for some theta in [0, phi]
    """
    _check_modulus(k2, allow_one=False)
    if not math.isfinite(phi) or not math.isfinite(n):
        raise NonFinite(f"Pi arguments must be finite, got phi={phi}, n={n}")
    j, r = _reduce_amplitude(phi)
    # largest value of sin^2 along the path from 0 to phi
    peak = 1.0 if j else math.sin(r) ** 2
    if n * peak >= 1.0:
        raise CharacteristicPole(f"1 - n sin^2 vanishes on [0, {phi}] for n={n}")
    if n == 0.0:
        return elliptic_F(phi, k2)

    s, c2, d2 = _carlson_terms(r, k2)
    p = 1.0 - n * s * s
    value = s * float(special.elliprf(c2, d2, 1.0))
    if s != 0.0:
        value += n / 3.0 * s**3 * float(special.elliprj(c2, d2, 1.0, p))
    if j:
        value += 2.0 * j * elliptic_Pi_complete(n, k2)
    return value


def _quad(f: Callable[[float], float], a: float, b: float) -> Tuple[float, float]:
    result = integrate.quad(f, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=QUAD_LIMIT, full_output=1)
    if len(result) > 3:
        # a fourth element carries quad's warning message
        raise NoConvergence(f"Quadrature on [{a}, {b}] did not converge (err={result[1]:.3e}): {result[3]}")
    value, err, info = result
    logger.debug(f"quad on [{a}, {b}]: value={value:.17g}, err={err:.3e}, neval={info['neval']}")
    return float(value), float(err)


def _left_substituted(f, a: float, b: float) -> Tuple[float, float]:
    # u = a + s^2 removes (u - a)^(-1/2)
    return _quad(lambda s: 2.0 * s * f(a + s * s), 0.0, math.sqrt(b - a))


def _right_substituted(f, a: float, b: float) -> Tuple[float, float]:
    return _quad(lambda s: 2.0 * s * f(b - s * s), 0.0, math.sqrt(b - a))


def bracketed_root(f: Callable[[float], float], a: float, b: float) -> float:
    return float(optimize.brentq(f, a, b, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200))


def positive_branch(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    critical: Iterable[float],
    end_tol: Callable[[float], float],
) -> Tuple[float, float]:
    """Check that f > 0 strictly inside [lo, hi] and return the allowed interval.

    ``critical`` must hold every stationary point of f inside (lo, hi), so f is
    monotone between consecutive points and its sign on the open interval is
    settled by the values there. An endpoint with -end_tol(x) <= f(x) < 0 is
    moved onto the adjacent root of f.

    Raises:
        TurningPointCrossed: if f is negative beyond tolerance at an endpoint,
            or not strictly positive somewhere inside
    """
    for x in (lo, hi):
        value = f(x)
        if value < -end_tol(x):
            raise TurningPointCrossed(f"f({x})={value:.3e} < 0: endpoint lies outside the allowed region")
    knots = sorted(float(c) for c in critical if lo < c < hi)
    for c in knots:
        value = f(c)
        if value <= 0.0:
            raise TurningPointCrossed(f"Sign change inside [{lo}, {hi}]: f({c})={value:.3e} at a stationary point")

    f_lo, f_hi = f(lo), f(hi)
    if not knots and f_lo <= 0.0 and f_hi <= 0.0:
        raise TurningPointCrossed(f"f is not positive anywhere inside [{lo}, {hi}]")
    new_lo, new_hi = lo, hi
    if f_lo < 0.0:
        new_lo = bracketed_root(f, lo, knots[0] if knots else hi)
    if f_hi < 0.0:
        new_hi = bracketed_root(f, knots[-1] if knots else lo, hi)
    if new_lo != lo or new_hi != hi:
        logger.debug(f"allowed interval [{lo}, {hi}] moved onto roots [{new_lo:.17g}, {new_hi:.17g}]")
    return new_lo, new_hi


def quad_sqrt_endpoint(
    f: Callable[[float], float],
    a: float,
    b: float,
    singular_end: SingularEnd = SingularEnd.NONE,
) -> Tuple[float, float]:
    """Integrate f over [a, b] with an s^2 substitution at the flagged end.

    ``SingularEnd.BOTH`` splits at the midpoint and desingularizes each half at
    its outer end. For b < a the integral is taken with reversed orientation and
    the flags keep referring to a (LEFT) and b (RIGHT).

    Args:
        f: integrand, at worst (x - end)^(-1/2) singular at the flagged end
        a: lower limit
        b: upper limit
        singular_end: which end to desingularize

    Returns:
        (value, error estimate)

    Raises:
        NoConvergence: if the adaptive refinement budget is exhausted
    """
    singular_end = SingularEnd(singular_end)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise NonFinite(f"Quadrature limits must be finite, got [{a}, {b}]")
    if a == b:
        return 0.0, 0.0
    if b < a:
        swapped = {
            SingularEnd.LEFT: SingularEnd.RIGHT,
            SingularEnd.RIGHT: SingularEnd.LEFT,
        }.get(singular_end, singular_end)
        value, err = quad_sqrt_endpoint(f, b, a, swapped)
        return -value, err

    if singular_end is SingularEnd.LEFT:
        return _left_substituted(f, a, b)
    if singular_end is SingularEnd.RIGHT:
        return _right_substituted(f, a, b)
    if singular_end is SingularEnd.BOTH:
        mid = 0.5 * (a + b)
        v1, e1 = _left_substituted(f, a, mid)
        v2, e2 = _right_substituted(f, mid, b)
        return v1 + v2, e1 + e2
    return _quad(f, a, b)
