"""Standard normal quantile function (inverse CDF)."""
import numpy as np
from scipy.special import erfc

from .errors import DomainError

# Acklam's rational approximation, relative error < 1.15e-9 before refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425
_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


def _lower_half(p):
    """Quantile for ``0 < p <= 0.5`` (so the result is <= 0)."""
    x = np.empty_like(p)

    tail = p < _P_LOW
    if tail.any():
        q = np.sqrt(-2.0 * np.log(p[tail]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[tail] = num / den

    mid = ~tail
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num / den

    # one Halley step against the erfc-based CDF; erfc keeps the left tail
    # accurate in relative terms
    e = 0.5 * erfc(-x / _SQRT2) - p
    u = e * _SQRT2PI * np.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def standard_normal_ppf(u):
    """Return ``z`` such that ``Phi(z) = u`` for ``0 < u < 1``.

    Accepts a scalar or an array. The result is exactly antisymmetric,
    ``ppf(1 - u) == -ppf(u)``, whenever ``1 - u`` is representable.

    Raises
    ------
    DomainError
        If any ``u`` lies outside the open interval ``(0, 1)`` or is NaN.
    """
    arr = np.asarray(u, dtype=np.float64)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("standard_normal_ppf is defined on the open interval (0, 1)")
    flat = arr.reshape(-1)
    upper = flat > 0.5
    p = np.where(upper, 1.0 - flat, flat)
    z = _lower_half(p)
    z = np.where(upper, -z, z)
    z = z.reshape(arr.shape)
    if np.ndim(u) == 0:
        return float(z)
    return z
