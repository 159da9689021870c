"""Exact wavepackets created by a delta-kick on a rigid rotor.

A sudden pulse multiplies the wavefunction by exp(i(P_eta*cos(theta) +
P_zeta*cos^2(theta))). Expanding that phase factor in Legendre polynomials
and contracting with Clebsch-Gordan coefficients gives the free-rotor
expansion coefficients of the post-kick state. Purely orienting and purely
aligning kicks additionally admit closed forms through spherical Bessel
and confluent hypergeometric functions; those serve as fast paths and as
cross-checks of the general route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, NormalizationError
from .specfun import (
    I_POW,
    QuadratureRule,
    clebsch_gordan,
    gauss_legendre,
    hyp1f1_imag,
    legendre_table,
    sph_bessel_all,
)

MAX_J_PRIME = 60
MAX_K = 120
J_MAX_CAP = 128
TAIL_POPULATION = 1e-14
NORM_ERROR_TOL = 1e-6


@dataclass(frozen=True)
class KickStrengths:
    """Dimensionless kick strengths: time integrals of the orienting
    (p_eta) and aligning (p_zeta) interaction strengths. The studied
    domain is [0, 10] for each."""

    p_eta: float
    p_zeta: float

    def __post_init__(self):
        for name, value in (("p_eta", self.p_eta), ("p_zeta", self.p_zeta)):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class InitialState:
    """Free-rotor eigenstate Y_{j0}^{m0} the kick acts on."""

    j0: int = 0
    m0: int = 0

    def __post_init__(self):
        if self.j0 < 0 or abs(self.m0) > self.j0:
            raise ValueError(f"need 0 <= |m0| <= j0, got j0={self.j0} m0={self.m0}")


@dataclass(frozen=True)
class Wavepacket:
    """Expansion coefficients C^J over free-rotor states at fixed m.

    ``coeffs[i]`` belongs to J = |m| + i, up to ``j_max``. Field-free
    evolution multiplies each by exp(-i J(J+1) tau); the coefficients
    themselves are time independent. Never renormalized: the norm defect
    is a diagnostic for basis truncation.
    """

    m: int
    coeffs: np.ndarray
    j_max: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != self.j_max - abs(self.m) + 1:
            raise ValueError("coefficient count does not match |m|..j_max")

    @property
    def js(self) -> np.ndarray:
        """Angular momentum quantum numbers carried by ``coeffs``."""
        return np.arange(abs(self.m), self.j_max + 1)

    @property
    def energies(self) -> np.ndarray:
        """Free-rotor energies E_J = J(J+1) in units of B."""
        js = self.js
        return (js * (js + 1)).astype(float)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    @property
    def norm_defect(self) -> float:
        return abs(float(np.sum(self.populations)) - 1.0)

    @property
    def phases(self) -> np.ndarray:
        """Coefficient phases gamma_J (zero where a coefficient vanishes)."""
        return np.where(np.abs(self.coeffs) > 0, np.angle(self.coeffs), 0.0)

    def delta_gamma(self, j: int, jp: int) -> float:
        i0 = abs(self.m)
        return float(self.phases[j - i0] - self.phases[jp - i0])

    @staticmethod
    def delta_energy(j: int, jp: int) -> int:
        return j * (j + 1) - jp * (jp + 1)


@dataclass(frozen=True)
class PhaseExpansion:
    """Legendre coefficients c^{J'} of exp(i(P_eta*x + P_zeta*x^2))."""

    c: np.ndarray
    kick: KickStrengths
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    @property
    def j_prime_max(self) -> int:
        return len(self.c) - 1

    def reconstruct(self, x) -> np.ndarray:
        """Evaluate the truncated Legendre sum at x in [-1, 1]."""
        table = legendre_table(self.j_prime_max, x)
        return np.tensordot(self.c, table, axes=(0, 0))


# ---------------------------------------------------------------------------
# Legendre expansion of the kick phase factor
# ---------------------------------------------------------------------------

def phase_coeffs_quadrature(
    kick: KickStrengths,
    j_prime_max: int,
    rule: QuadratureRule | None = None,
) -> PhaseExpansion:
    """c^{J'} by direct Gauss-Legendre quadrature of the defining integral.

    This is the production path: the integrand is entire and the rule
    resolves it to round-off once the order comfortably exceeds the phase
    variation. Requires rule order >= 2*j_prime_max.
    """
    if rule is None:
        rule = gauss_legendre(max(256, 2 * j_prime_max + 2))
    if rule.order < 2 * j_prime_max:
        raise ValueError(
            f"rule order {rule.order} < 2*j_prime_max = {2 * j_prime_max}"
        )
    x = rule.nodes
    f = np.exp(1j * (kick.p_eta * x + kick.p_zeta * x * x)) * rule.weights
    table = legendre_table(j_prime_max, x)
    jp = np.arange(j_prime_max + 1)
    c = (2 * jp + 1) / 2.0 * (table @ f)
    if kick.p_eta == 0.0:
        c[1::2] = 0.0  # even integrand: odd coefficients vanish identically
    return PhaseExpansion(c=c, kick=kick, meta={"method": "quadrature", "rule_order": rule.order})


def _factorials(n: int) -> list[int]:
    f = [1] * (n + 1)
    for i in range(2, n + 1):
        f[i] = f[i - 1] * i
    return f


def _ratio_to_float(num: int, den: int) -> float:
    """num/den for positive big ints, accurate to 1 ulp at any magnitude."""
    shift = den.bit_length() - num.bit_length() + 64
    if shift >= 0:
        return math.ldexp(float((num << shift) // den), -shift)
    return math.ldexp(float(num // (den << -shift)), shift)


def phase_coeffs_series(
    kick: KickStrengths,
    j_prime_max: int,
    k_max: int = 80,
) -> PhaseExpansion:
    """c^{J'} by the explicit double power series in the kick strengths.

    Term k of the outer sum carries the phase i^k; the remaining factor is
    a positive rational times P_eta^{k-l} P_zeta^l and is built from exact
    integer factorials, so each term is accurate to 1 ulp even where the
    alternating sum cancels by many orders. Kept as a mutual check against
    the quadrature path; it is slower.
    """
    if j_prime_max > MAX_J_PRIME:
        raise ValueError(f"j_prime_max must be <= {MAX_J_PRIME}, got {j_prime_max}")
    if k_max > MAX_K:
        raise ValueError(f"k_max must be <= {MAX_K}, got {k_max}")
    p_eta, p_zeta = kick.p_eta, kick.p_zeta
    fact = _factorials(2 * k_max + j_prime_max + 3)

    n_c = j_prime_max + 1
    re_parts: list[list[float]] = [[] for _ in range(n_c)]
    im_parts: list[list[float]] = [[] for _ in range(n_c)]
    shell = np.zeros(n_c)

    for k in range(k_max + 1):
        shell[:] = 0.0
        if p_eta == 0.0:
            ells = (k,)  # only the pure-P_zeta power survives
        elif p_zeta == 0.0:
            ells = (0,)
        else:
            ells = range(k + 1)
        phase = I_POW[k & 3]
        to_re = phase.real != 0.0
        sign = phase.real + phase.imag  # +1 or -1 for either component
        for ell in ells:
            m = k + ell
            pk = p_eta ** (k - ell) * p_zeta**ell
            if pk == 0.0:
                continue
            binom = fact[k] // (fact[ell] * fact[k - ell])
            num_kl = binom * fact[m]
            den_kl = fact[k]
            # J' runs over the parity class of m = k + ell, J' <= m.
            # Shell magnitudes follow the bare sum over k, i.e. without
            # the (2J'+1)/2 prefactor applied at the end.
            for j_prime in range(m % 2, min(m, j_prime_max) + 1, 2):
                a = (m - j_prime) // 2
                b = (m + j_prime) // 2
                num = (num_kl * fact[b + 1]) << (j_prime + 2)
                den = den_kl * fact[a] * fact[2 * b + 2]
                mag = _ratio_to_float(num, den) * pk
                shell[j_prime] += mag
                if to_re:
                    re_parts[j_prime].append(sign * mag)
                else:
                    im_parts[j_prime].append(sign * mag)

    jp = np.arange(n_c)
    c = (2 * jp + 1) / 2.0 * np.array(
        [complex(math.fsum(re_parts[j]), math.fsum(im_parts[j])) for j in range(n_c)]
    )
    last_shell = shell.copy()
    c_scale = float(np.max(np.abs(c)))
    if float(np.max(last_shell)) > 1e-12 * c_scale:
        raise ConvergenceError(
            f"k-shell {k_max} still at {np.max(last_shell):.3e} "
            f"against max |c| = {c_scale:.3e}; increase k_max"
        )
    meta = {
        "method": "series",
        "k_max": k_max,
        "last_shell": last_shell,
        "truncation_estimate": float(np.max(last_shell)),
    }
    return PhaseExpansion(c=c, kick=kick, meta=meta)


# ---------------------------------------------------------------------------
# Kicked wavepackets
# ---------------------------------------------------------------------------

def _contract(init: InitialState, phase: PhaseExpansion, j_max: int) -> np.ndarray:
    j0, m0 = init.j0, init.m0
    if phase.j_prime_max < j_max + j0:
        raise ValueError(
            f"phase expansion covers J' <= {phase.j_prime_max}, "
            f"need {j_max + j0}"
        )
    js = np.arange(abs(m0), j_max + 1)
    coeffs = np.zeros(len(js), dtype=complex)
    for i, j in enumerate(js):
        scale = math.sqrt((2 * j0 + 1) / (2 * j + 1))
        acc = 0.0j
        for jp in range(abs(j - j0), j + j0 + 1):
            if (j + jp + j0) % 2:
                continue
            acc += (
                phase.c[jp]
                * clebsch_gordan(jp, 0, j0, 0, j, 0)
                * clebsch_gordan(jp, 0, j0, m0, j, m0)
            )
        coeffs[i] = scale * acc
    return coeffs


def kick_wavepacket(init: InitialState, phase: PhaseExpansion, j_max: int) -> Wavepacket:
    """Contract the phase expansion with Clebsch-Gordan coefficients.

    C^J = sum over J' in |J-j0|..J+j0 (J+J'+j0 even) of
    c^{J'} sqrt((2j0+1)/(2J+1)) <J'0,j0 0|J0> <J'0,j0 m0|J m0>.
    Raises if the resulting norm is off by more than 1e-6, which signals
    that j_max (or the phase expansion) was too small.
    """
    coeffs = _contract(init, phase, j_max)
    norm = float(np.sum(np.abs(coeffs) ** 2))
    if abs(norm - 1.0) > NORM_ERROR_TOL:
        raise NormalizationError(
            f"post-kick norm {norm:.9f} deviates beyond {NORM_ERROR_TOL}; "
            "increase j_max"
        )
    meta = {
        "kind": "delta_kick",
        "p_eta": phase.kick.p_eta,
        "p_zeta": phase.kick.p_zeta,
        "j0": init.j0,
        "m0": init.m0,
        "j_max": j_max,
        "method": phase.meta.get("method", "unknown"),
        "norm_defect": abs(norm - 1.0),
        "tail_population": float(np.abs(coeffs[-1]) ** 2),
    }
    return Wavepacket(m=init.m0, coeffs=coeffs, j_max=j_max, meta=meta)


def identity_wavepacket(init: InitialState = InitialState(), j_max: int = 20) -> Wavepacket:
    """The unkicked state: C^J = delta_{J,j0}."""
    js = np.arange(abs(init.m0), j_max + 1)
    coeffs = np.zeros(len(js), dtype=complex)
    coeffs[init.j0 - abs(init.m0)] = 1.0
    meta = {
        "kind": "delta_kick",
        "p_eta": 0.0,
        "p_zeta": 0.0,
        "j0": init.j0,
        "m0": init.m0,
        "j_max": j_max,
        "method": "identity",
        "norm_defect": 0.0,
        "tail_population": float(np.abs(coeffs[-1]) ** 2),
    }
    return Wavepacket(m=init.m0, coeffs=coeffs, j_max=j_max, meta=meta)


def sudden_wavepacket(
    kick: KickStrengths,
    init: InitialState = InitialState(),
    j_max: int | None = None,
) -> Wavepacket:
    """Post-kick wavepacket via the quadrature phase expansion.

    With ``j_max=None`` the basis grows from 20, doubling until the last
    population drops below 1e-14 (capped at 128).
    """
    if kick.p_eta == 0.0 and kick.p_zeta == 0.0:
        return identity_wavepacket(init, j_max if j_max is not None else 20)
    if j_max is not None:
        phase = phase_coeffs_quadrature(kick, j_max + init.j0)
        return kick_wavepacket(init, phase, j_max)
    trial = 20
    while True:
        phase = phase_coeffs_quadrature(kick, trial + init.j0)
        tail = np.abs(_contract(init, phase, trial)[-1]) ** 2
        if tail < TAIL_POPULATION or trial >= J_MAX_CAP:
            return kick_wavepacket(init, phase, trial)
        trial = min(2 * trial, J_MAX_CAP)


def orienting_closed_form(p_eta: float, j_max: int | None = None) -> Wavepacket:
    """Purely orienting kick on the ground state: C^J = i^J sqrt(2J+1) j_J(P).

    Normalization is automatic through the spherical Bessel addition
    theorem and is verified rather than imposed.
    """
    if p_eta < 0:
        raise ValueError(f"p_eta must be >= 0, got {p_eta}")
    if j_max is None:
        j_max = _auto_j_max(lambda n: _orienting_coeffs(p_eta, n))
    coeffs = _orienting_coeffs(p_eta, j_max)
    return _closed_form_packet(coeffs, j_max, p_eta=p_eta, p_zeta=0.0,
                               method="orienting_closed_form")


def _orienting_coeffs(p_eta: float, j_max: int) -> np.ndarray:
    js = np.arange(j_max + 1)
    bessel = sph_bessel_all(j_max, p_eta)
    return np.array(I_POW)[js % 4] * np.sqrt(2 * js + 1.0) * bessel


def aligning_closed_form(p_zeta: float, j_max: int | None = None) -> Wavepacket:
    """Purely aligning kick on the ground state.

    Even J: C^J = sqrt(2J+1)/2 (i P)^{J/2} Gamma(J/2+1/2)/Gamma(J+3/2)
    * 1F1(J/2+1/2; J+3/2; iP). Odd-J coefficients vanish exactly.
    """
    if p_zeta < 0:
        raise ValueError(f"p_zeta must be >= 0, got {p_zeta}")
    if j_max is None:
        j_max = _auto_j_max(lambda n: _aligning_coeffs(p_zeta, n))
    coeffs = _aligning_coeffs(p_zeta, j_max)
    return _closed_form_packet(coeffs, j_max, p_eta=0.0, p_zeta=p_zeta,
                               method="aligning_closed_form")


def _aligning_coeffs(p_zeta: float, j_max: int) -> np.ndarray:
    coeffs = np.zeros(j_max + 1, dtype=complex)
    if p_zeta == 0.0:
        coeffs[0] = 1.0
        return coeffs
    for j in range(0, j_max + 1, 2):
        half = j // 2
        # P^{J/2} Gamma(J/2+1/2)/Gamma(J+3/2) in log space to dodge overflow
        log_mag = (
            half * math.log(p_zeta)
            + math.lgamma(half + 0.5)
            - math.lgamma(j + 1.5)
        )
        coeffs[j] = (
            math.sqrt(2 * j + 1.0) / 2.0
            * I_POW[half % 4]
            * math.exp(log_mag)
            * hyp1f1_imag(half + 0.5, j + 1.5, p_zeta)
        )
    return coeffs


def _auto_j_max(builder) -> int:
    trial = 20
    while True:
        coeffs = builder(trial)
        if abs(coeffs[-1]) ** 2 < TAIL_POPULATION or trial >= J_MAX_CAP:
            return trial
        trial = min(2 * trial, J_MAX_CAP)


def _closed_form_packet(coeffs, j_max, p_eta, p_zeta, method) -> Wavepacket:
    norm = float(np.sum(np.abs(coeffs) ** 2))
    if abs(norm - 1.0) > NORM_ERROR_TOL:
        raise NormalizationError(
            f"closed-form norm {norm:.9f} deviates beyond {NORM_ERROR_TOL}; "
            "increase j_max"
        )
    meta = {
        "kind": "delta_kick",
        "p_eta": p_eta,
        "p_zeta": p_zeta,
        "j0": 0,
        "m0": 0,
        "j_max": j_max,
        "method": method,
        "norm_defect": abs(norm - 1.0),
        "tail_population": float(np.abs(coeffs[-1]) ** 2),
    }
    return Wavepacket(m=0, coeffs=coeffs, j_max=j_max, meta=meta)
