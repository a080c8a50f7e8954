"""Scalar special-function kernel: ln Gamma, digamma, modified Bessel I, Laguerre.

Self-contained (no scipy) so the rest of the package has one audited set of
primitives.  Positive real arguments only; factorial-type ratios are always
formed in log space.
"""

from __future__ import annotations

import math

from .errors import DomainError, RangeOverflowError

EULER_GAMMA = 0.5772156649015328606

# Lanczos approximation, g = 7, 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


def ln_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0, relative error below 1e-12."""
    if not x > 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    if x < 0.5:
        # single recurrence shift instead of the reflection formula
        return ln_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, 9):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def gamma(x: float) -> float:
    """Gamma(x) for x > 0."""
    return math.exp(ln_gamma(x))


# Asymptotic digamma: psi(x) ~ ln x - 1/2x - sum B_2k / (2k x^2k).
_DIGAMMA_TAIL = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)


def digamma(x: float) -> float:
    """psi(x) = d/dx ln Gamma(x) for x > 0, relative error below 1e-10."""
    if not x > 0.0:
        raise DomainError(f"digamma requires x > 0, got {x}")
    acc = 0.0
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    for c in reversed(_DIGAMMA_TAIL):
        tail = (tail + c) * inv2
    return acc + math.log(x) - 0.5 / x + tail


def harmonic_number(n: int) -> float:
    """H_n = 1 + 1/2 + ... + 1/n, with H_0 = 0."""
    if n < 0:
        raise DomainError(f"harmonic_number requires n >= 0, got {n}")
    if n < 30:
        return sum(1.0 / k for k in range(1, n + 1))
    return digamma(n + 1.0) + EULER_GAMMA


_BESSEL_SPLIT = 15.0
_LOG_FLOAT_MAX = math.log(1.7976931348623157e308)


def _bessel_i_series(alpha: float, z: float) -> float:
    # all terms positive, so plain summation is stable
    term = math.exp(alpha * math.log(0.5 * z) - ln_gamma(alpha + 1.0))
    total = term
    q = 0.25 * z * z
    for k in range(500):
        term *= q / ((k + 1.0) * (k + 1.0 + alpha))
        total += term
        if term < 1e-17 * total:
            return total
    return total


def _bessel_i_asymptotic_log(alpha: float, z: float) -> float:
    # I_alpha(z) ~ e^z / sqrt(2 pi z) * sum_k (-1)^k a_k / z^k, truncated at
    # the smallest term (the series is asymptotic, not convergent)
    mu = 4.0 * alpha * alpha
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(60):
        term *= -(mu - (2 * k + 1.0) ** 2) / (8.0 * (k + 1.0) * z)
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if abs(term) < 1e-17 * abs(total):
            break
    return z - 0.5 * math.log(2.0 * math.pi * z) + math.log(total)


def bessel_i(alpha: float, z: float) -> float:
    """Modified Bessel I_alpha(z), alpha >= -1/2, z >= 0.

    Power series below z = 15, asymptotic expansion beyond; relative error
    below 1e-10 on z in [0, 50].  Raises RangeOverflowError instead of
    saturating once e^z leaves double range.
    """
    if alpha < -0.5:
        raise DomainError(f"bessel_i requires alpha >= -1/2, got {alpha}")
    if z < 0.0:
        raise DomainError(f"bessel_i requires z >= 0, got {z}")
    if z == 0.0:
        if alpha == 0.0:
            return 1.0
        if alpha > 0.0:
            return 0.0
        return math.inf  # alpha in [-1/2, 0): z^alpha divergence at the origin
    if z < _BESSEL_SPLIT:
        return _bessel_i_series(alpha, z)
    log_val = _bessel_i_asymptotic_log(alpha, z)
    if log_val > _LOG_FLOAT_MAX:
        raise RangeOverflowError(f"bessel_i({alpha}, {z}) exceeds double range")
    return math.exp(log_val)


def bessel_i_log(alpha: float, z: float) -> float:
    """ln I_alpha(z); safe for arguments where bessel_i itself would overflow."""
    if alpha < -0.5:
        raise DomainError(f"bessel_i_log requires alpha >= -1/2, got {alpha}")
    if z < 0.0:
        raise DomainError(f"bessel_i_log requires z >= 0, got {z}")
    if z == 0.0:
        if alpha == 0.0:
            return 0.0
        return -math.inf if alpha > 0.0 else math.inf
    if z < _BESSEL_SPLIT:
        return math.log(_bessel_i_series(alpha, z))
    return _bessel_i_asymptotic_log(alpha, z)


def laguerre(n: int, alpha: float, u: float) -> float:
    """Generalized Laguerre polynomial L_n^alpha(u) by three-term recurrence."""
    if n < 0 or n != int(n):
        raise DomainError(f"laguerre requires integer n >= 0, got {n}")
    if n > 50:
        raise DomainError(f"laguerre recurrence validated only for n <= 50, got {n}")
    if alpha <= -1.0:
        raise DomainError(f"laguerre requires alpha > -1, got {alpha}")
    if u < 0.0:
        raise DomainError(f"laguerre requires u >= 0, got {u}")
    if n == 0:
        return 1.0
    prev = 1.0
    cur = 1.0 + alpha - u
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - u) * cur - (k + alpha) * prev) / (k + 1.0)
    return cur
