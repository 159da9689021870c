"""Special-function kernel for rotor dynamics.

Self-contained evaluation of Legendre polynomials, normalized spherical
harmonics (theta part), spherical Bessel functions, the confluent
hypergeometric function 1F1 on the imaginary axis, Clebsch-Gordan
coefficients, and Gauss-Legendre quadrature. Everything here is a pure
function of its arguments and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError

SQRT_4PI = math.sqrt(4.0 * math.pi)

# Powers of i, indexed by k mod 4.
I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


# ---------------------------------------------------------------------------
# Legendre polynomials
# ---------------------------------------------------------------------------

def legendre_p(j: int, x):
    """Legendre polynomial P_j(x) by upward recurrence.

    `x` may be a scalar or ndarray with |x| <= 1 (a 1e-12 slack is
    tolerated and clamped).
    """
    if j < 0:
        raise ValueError(f"degree must be >= 0, got {j}")
    x = _check_unit_interval(x)
    return legendre_table(j, x)[j]


def legendre_table(j_max: int, x) -> np.ndarray:
    """Table of P_j(x) for j = 0..j_max, shape (j_max+1,) + shape(x)."""
    x = np.asarray(x, dtype=float)
    table = np.empty((j_max + 1,) + x.shape, dtype=float)
    table[0] = 1.0
    if j_max >= 1:
        table[1] = x
    for n in range(2, j_max + 1):
        # n P_n = (2n-1) x P_{n-1} - (n-1) P_{n-2}
        table[n] = ((2 * n - 1) * x * table[n - 1] - (n - 1) * table[n - 2]) / n
    return table


def _check_unit_interval(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise ValueError("argument outside [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    return x[()] if x.ndim == 0 else x


# ---------------------------------------------------------------------------
# Spherical harmonics (theta part, phase e^{i m phi} factored out)
# ---------------------------------------------------------------------------

def sph_harm_m(j: int, m: int, theta):
    """Real theta-part of Y_j^m in the Condon-Shortley convention.

    Normalized so that 2*pi * integral of sph_harm_m^2 sin(theta) dtheta
    over [0, pi] equals 1; the full harmonic is sph_harm_m * e^{i m phi}.
    """
    if abs(m) > j:
        raise ValueError(f"|m| = {abs(m)} exceeds j = {j}")
    return sph_harm_table(j, m, theta)[j - abs(m)]


def sph_harm_table(j_max: int, m: int, theta) -> np.ndarray:
    """Theta-parts of Y_j^m for j = |m|..j_max, shape (j_max-|m|+1,)+shape."""
    mm = abs(m)
    if mm > j_max:
        raise ValueError(f"|m| = {mm} exceeds j_max = {j_max}")
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    s = np.sin(theta)

    table = np.empty((j_max - mm + 1,) + theta.shape, dtype=float)
    # Seed: normalized P_mm^mm, built up with the Condon-Shortley sign.
    p = np.full(theta.shape, 1.0 / SQRT_4PI)
    for k in range(1, mm + 1):
        p = -math.sqrt((2 * k + 1) / (2.0 * k)) * s * p
    table[0] = p
    if j_max > mm:
        table[1] = math.sqrt(2 * mm + 3.0) * x * p
    for j in range(mm + 2, j_max + 1):
        a = math.sqrt((4.0 * j * j - 1.0) / (j * j - mm * mm))
        b = math.sqrt(
            (2 * j + 1.0) * (j - 1 - mm) * (j - 1 + mm)
            / ((2 * j - 3.0) * (j - mm) * (j + mm))
        )
        table[j - mm] = a * x * table[j - mm - 1] - b * table[j - mm - 2]
    if m < 0 and mm % 2 == 1:
        table = -table
    return table


# ---------------------------------------------------------------------------
# Spherical Bessel functions of the first kind
# ---------------------------------------------------------------------------

def sph_bessel_j(j: int, x: float) -> float:
    """Spherical Bessel function j_j(x) for x >= 0."""
    if j < 0:
        raise ValueError(f"order must be >= 0, got {j}")
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    return sph_bessel_all(j, x)[j]


def sph_bessel_all(j_max: int, x: float) -> np.ndarray:
    """Array of j_n(x) for n = 0..j_max.

    Upward recurrence where it is stable (n < x), downward Miller
    recurrence with rescaling otherwise.
    """
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    out = np.zeros(j_max + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    j0 = math.sin(x) / x
    out[0] = j0
    if j_max == 0:
        return out
    if x > j_max:
        # Upward stable while n < x.
        out[1] = j0 / x - math.cos(x) / x
        for n in range(1, j_max):
            out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
        return out

    # Miller: start ~30 orders above j_max with an arbitrary tiny seed and
    # recur downward; the physical solution dominates by the time n = j_max.
    start = j_max + 30
    scale_step = math.ldexp(1.0, -1000)
    f_hi, f_lo = 0.0, 1e-30
    raw = np.zeros(j_max + 1)
    nscale = np.zeros(j_max + 1, dtype=int)
    scales = 0
    for n in range(start, 0, -1):
        f = (2 * n + 1) / x * f_lo - f_hi
        if abs(f) > 1e250:  # rescale to dodge overflow, remember the shift
            f *= scale_step
            f_lo *= scale_step
            scales += 1
        f_hi, f_lo = f_lo, f
        if n - 1 <= j_max:
            raw[n - 1] = f
            nscale[n - 1] = scales
    norm = j0 / raw[0]
    for n in range(j_max + 1):
        # Entries recorded before later rescalings carry fewer shifts.
        out[n] = raw[n] * norm * math.ldexp(1.0, -1000 * int(nscale[0] - nscale[n]))
    return out


# ---------------------------------------------------------------------------
# Confluent hypergeometric function 1F1(a; b; i p)
# ---------------------------------------------------------------------------

def hyp1f1_imag(a: float, b: float, p: float) -> complex:
    """Kummer function 1F1(a; b; i*p) by direct Maclaurin summation.

    Declared working range |p| <= 50: the series is convergent everywhere
    but loses roughly e^{|p|} * eps of absolute accuracy to cancellation.
    """
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"b must not be a non-positive integer, got {b}")
    if abs(p) > 50.0:
        raise ValueError(f"|p| = {abs(p)} outside declared working range 50")
    z = 1j * p
    term = 1.0 + 0.0j
    total = term
    for n in range(500):
        term *= (a + n) / (b + n) * z / (n + 1)
        total += term
        if abs(term) < 1e-18 * abs(total):
            return total
    raise ConvergenceError(
        f"1F1({a}; {b}; {p}j) did not converge within 500 terms"
    )


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients
# ---------------------------------------------------------------------------

def _lg(n: int) -> float:
    """log(n!) with the convention that negative arguments never occur."""
    return math.lgamma(n + 1)


@lru_cache(maxsize=None)
def clebsch_gordan(j1: int, m1: int, j2: int, m2: int, j3: int, m3: int) -> float:
    """Clebsch-Gordan coefficient <j1 m1, j2 m2 | j3 m3> for integer spins.

    Racah's closed sum evaluated in log-gamma space, which stays accurate
    past the j ~ 15 point where raw factorials overflow. Couplings that
    violate m1+m2 = m3 or the triangle rule return exactly 0.
    """
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if m1 + m2 != m3:
        return 0.0
    if j3 < abs(j1 - j2) or j3 > j1 + j2:
        return 0.0

    log_pref = 0.5 * (
        math.log(2 * j3 + 1.0)
        + _lg(j3 + j1 - j2) + _lg(j3 - j1 + j2) + _lg(j1 + j2 - j3)
        - _lg(j1 + j2 + j3 + 1)
        + _lg(j3 + m3) + _lg(j3 - m3)
        + _lg(j1 - m1) + _lg(j1 + m1)
        + _lg(j2 - m2) + _lg(j2 + m2)
    )
    k_lo = max(0, j2 - j3 - m1, j1 - j3 + m2)
    k_hi = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = 0.0
    for k in range(k_lo, k_hi + 1):
        log_den = (
            _lg(k) + _lg(j1 + j2 - j3 - k) + _lg(j1 - m1 - k)
            + _lg(j2 + m2 - k) + _lg(j3 - j2 + m1 + k) + _lg(j3 - j1 - m2 + k)
        )
        total += (-1.0) ** k * math.exp(log_pref - log_den)
    return total


# ---------------------------------------------------------------------------
# Gauss-Legendre quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights on [-1, 1] (nodes are x = cos(theta))."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, values: np.ndarray):
        """Integral over [-1, 1] of a function sampled at the nodes."""
        return self.weights @ values


MAX_QUADRATURE_ORDER = 4096


def gauss_legendre(order: int) -> QuadratureRule:
    """Gauss-Legendre rule by Newton iteration on P_order.

    Nodes converge to 1e-15; a rule of order n integrates polynomials up
    to degree 2n-1 exactly.
    """
    if not 1 <= order <= MAX_QUADRATURE_ORDER:
        raise ValueError(f"order must be in [1, {MAX_QUADRATURE_ORDER}], got {order}")
    n = order
    i = np.arange(n)
    # Asymptotic initial guess (descending in x), good to ~1e-3.
    x = np.cos(math.pi * (i + 0.75) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, x)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p, dp = _legendre_and_derivative(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    x = x[::-1].copy()
    w = w[::-1].copy()
    # Symmetrize so parity cancellations are exact to the last bit.
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(nodes=x, weights=w, order=n)


def _legendre_and_derivative(n: int, x: np.ndarray):
    pm1 = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        pm1, p = p, ((2 * k - 1) * x * p - (k - 1) * pm1) / k
    dp = n * (x * p - pm1) / (x * x - 1.0)
    return p, dp
