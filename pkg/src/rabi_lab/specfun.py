"""Scalar special functions used by the closed-form expressions.

All functions take real arguments and return Python floats (or float
arrays for the sequence helpers). Inputs outside the documented domain
raise :class:`~rabi_lab.errors.DomainError`.
"""
import math
from functools import lru_cache

from ._backend import kernels
from .errors import DomainError


def _check_finite(name, value):
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")


def erf_phi(z):
    """Error function Phi(z) = 2/sqrt(pi) * integral_0^z exp(-t^2) dt, z >= 0."""
    z = float(z)
    _check_finite("z", z)
    if z < 0:
        raise DomainError(f"erf_phi is defined here for z >= 0, got {z}")
    return math.erf(z)


def erfc_phi(z):
    """Complement 1 - Phi(z) without cancellation, z >= 0."""
    z = float(z)
    _check_finite("z", z)
    if z < 0:
        raise DomainError(f"erfc_phi is defined here for z >= 0, got {z}")
    return math.erfc(z)


def laguerre(m, a, x):
    """Generalized Laguerre polynomial L_m^a(x).

    Parameters
    ----------
    m : int
        Degree, 0 <= m <= 10**6.
    a : int
        Order, a >= -m.
    x : float
        Argument.

    Notes
    -----
    Evaluated by the three-term recurrence in the degree; the explicit
    finite sum loses all digits to cancellation once x is a few times m.
    """
    m = int(m)
    a = int(a)
    x = float(x)
    _check_finite("x", x)
    if m < 0 or m > 10**6:
        raise DomainError(f"degree m must lie in [0, 1e6], got {m}")
    if a < -m:
        raise DomainError(f"order a must be >= -m, got a={a}, m={m}")
    value = float(kernels.laguerre(m, a, x))
    if not math.isfinite(value):
        raise DomainError(f"L_{m}^{a}({x}) overflows double precision")
    return value


def bessel_sequence(kmax, z):
    """Array of J_0(z) .. J_kmax(z) for real z >= 0."""
    kmax = int(kmax)
    z = float(z)
    _check_finite("z", z)
    if z < 0:
        raise DomainError(f"bessel_sequence needs z >= 0, got {z}")
    if kmax < 0 or kmax > 10**5:
        raise DomainError(f"order must lie in [0, 1e5], got {kmax}")
    return kernels.bessel_sequence(kmax, z)


def bessel_j(k, z):
    """Bessel function of the first kind J_k(z) for integer k >= 0, z >= 0.

    Computed by Miller's normalized downward recurrence; absolute error is
    below 1e-10 over the supported range.
    """
    return float(bessel_sequence(k, z)[int(k)])


def bessel_j_signed(k, z):
    """J_k(z) for any integer k, via J_{-k} = (-1)^k J_k."""
    k = int(k)
    value = bessel_j(abs(k), z)
    return -value if (k < 0 and k % 2) else value


@lru_cache(maxsize=8192)
def log_factorial(n):
    """Natural log of n! for 0 <= n <= 10**7."""
    n = int(n)
    if n < 0 or n > 10**7:
        raise DomainError(f"log_factorial needs 0 <= n <= 1e7, got {n}")
    return math.lgamma(n + 1.0)
