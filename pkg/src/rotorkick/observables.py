"""Expectation values and derived signals of a field-free wavepacket.

Everything is evaluated analytically from the expansion coefficients:
the coherence sums couple only J' = J +- 1 (orientation) and J' = J, J +- 2
(alignment), so each time point costs O(j_max), and the line spectra are
exact finite Fourier sums rather than FFTs of sampled signals. All
signals are periodic with the revival time tau_rev = pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .specfun import gauss_legendre, sph_harm_table
from .sudden import Wavepacket

TAU_REVIVAL = math.pi
IMAG_RESIDUE_TOL = 1e-12


@dataclass(frozen=True)
class ObservableSeries:
    """Sampled orientation/alignment signals plus their time-free parts."""

    taus: np.ndarray
    orientation: np.ndarray
    alignment: np.ndarray
    alignment_pop: float
    kinetic: float

    @property
    def alignment_coherent(self) -> np.ndarray:
        return self.alignment - self.alignment_pop


@dataclass(frozen=True)
class Carpet:
    """Probability density |psi(theta, tau)|^2 tabulated on a space-time grid.

    The theta grid carries Gauss-Legendre weights so each time column can
    be integrated: 2*pi * weights . density == 1 for a normalized packet.
    """

    thetas: np.ndarray
    taus: np.ndarray
    density: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class LineSpectrum:
    """Exact line spectrum: (Bohr frequency, cosine amplitude) pairs.

    Amplitudes are the real-signal cosine amplitudes, so the variance of
    the time signal equals half the sum of squared nonzero-frequency
    amplitudes.
    """

    entries: list
    observable: str

    def amplitude(self, freq: int) -> float:
        for f, a in self.entries:
            if f == freq:
                return a
        return 0.0

    @property
    def frequencies(self) -> list:
        return [f for f, _ in self.entries]


def populations(wp: Wavepacket) -> list:
    """Per-state populations [(J, |C^J|^2), ...]; they sum to the norm."""
    return [(int(j), float(p)) for j, p in zip(wp.js, wp.populations)]


def kinetic_energy(wp: Wavepacket) -> float:
    """Post-kick <J^2> = sum_J J(J+1) |C^J|^2, in units of B."""
    return float(wp.energies @ wp.populations)


def _require_m0(wp: Wavepacket, what: str) -> None:
    if wp.m != 0:
        raise ValueError(f"{what} is implemented for m = 0 wavepackets only")


def _orientation_pairs(wp: Wavepacket):
    """Complex amplitudes and frequencies of the Delta J = +1 coherences."""
    c = wp.coeffs
    j = np.arange(wp.j_max)  # pairs (J+1, J)
    amps = (j + 1) / np.sqrt((2 * j + 1.0) * (2 * j + 3.0)) * np.conj(c[1:]) * c[:-1]
    freqs = 2 * (j + 1)
    return amps, freqs


def _alignment_pairs(wp: Wavepacket):
    """Complex amplitudes and frequencies of the Delta J = +2 coherences."""
    c = wp.coeffs
    j = np.arange(wp.j_max - 1)  # pairs (J+2, J)
    amps = (
        (j + 1) * (j + 2)
        / ((2 * j + 3.0) * np.sqrt((2 * j + 1.0) * (2 * j + 5.0)))
        * np.conj(c[2:]) * c[:-2]
    )
    freqs = 2 * (2 * j + 3)
    return amps, freqs


def alignment_population_part(wp: Wavepacket) -> float:
    """Time-independent part of <cos^2 theta>."""
    _require_m0(wp, "alignment")
    j = wp.js.astype(float)
    weights = 1.0 / 3.0 + 2.0 * j * (j + 1) / (3.0 * (2 * j - 1) * (2 * j + 3))
    return float(weights @ wp.populations)


def _coherence_sum(amps, freqs, taus) -> np.ndarray:
    """Evaluate sum of a_f e^{i f tau} plus the conjugate branch."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    phases = np.exp(1j * np.outer(freqs, taus))
    values = amps @ phases + np.conj(amps) @ np.conj(phases)
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > IMAG_RESIDUE_TOL:
        raise NumericalError(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL}; "
            "coefficients look corrupted"
        )
    return values.real


def orientation_series(wp: Wavepacket, taus) -> np.ndarray:
    """<cos theta>(tau) for the field-free evolution after the kick."""
    _require_m0(wp, "orientation")
    amps, freqs = _orientation_pairs(wp)
    return _coherence_sum(amps, freqs, taus)


def alignment_series(wp: Wavepacket, taus):
    """(population part, coherent part sampled at taus) of <cos^2 theta>."""
    pop = alignment_population_part(wp)
    amps, freqs = _alignment_pairs(wp)
    return pop, _coherence_sum(amps, freqs, taus)


def observable_series(wp: Wavepacket, taus) -> ObservableSeries:
    """Bundle orientation, alignment, and kinetic energy over sample times."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    pop, coherent = alignment_series(wp, taus)
    return ObservableSeries(
        taus=taus,
        orientation=orientation_series(wp, taus),
        alignment=pop + coherent,
        alignment_pop=pop,
        kinetic=kinetic_energy(wp),
    )


def line_spectrum(wp: Wavepacket, observable: str) -> LineSpectrum:
    """Exact spectrum of the orientation or alignment signal.

    Orientation peaks sit at the Delta J = +-1 Bohr frequencies 2, 4, ...;
    alignment at 0, 6, 10, ... from Delta J = +-2, 0. Zero-amplitude lines
    are dropped.
    """
    _require_m0(wp, "spectrum")
    if observable == "orientation":
        amps, freqs = _orientation_pairs(wp)
        entries = []
    elif observable == "alignment":
        amps, freqs = _alignment_pairs(wp)
        entries = [(0, alignment_population_part(wp))]
    else:
        raise ValueError(f"observable must be 'orientation' or 'alignment', got {observable!r}")
    entries += [
        (int(f), float(2.0 * abs(a))) for f, a in zip(freqs, amps) if abs(a) > 0.0
    ]
    return LineSpectrum(entries=entries, observable=observable)


def wavefunction_at(wp: Wavepacket, theta, tau: float) -> np.ndarray:
    """psi(theta, tau) = sum_J C^J e^{-i E_J tau} Y_J^m(theta)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -1e-12) or np.any(theta > math.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi]")
    harmonics = sph_harm_table(wp.j_max, wp.m, theta)
    evolved = wp.coeffs * np.exp(-1j * wp.energies * tau)
    return np.tensordot(evolved, harmonics, axes=(0, 0))


def density_at(wp: Wavepacket, theta, tau: float):
    """Probability density per solid angle |psi(theta, tau)|^2.

    Mathematically equal to the population + coherence expansion of the
    density; evaluated as the squared modulus of the direct sum.
    """
    psi = wavefunction_at(wp, theta, tau)
    out = np.abs(psi) ** 2
    return float(out) if np.ndim(out) == 0 else out


def carpet(wp: Wavepacket, n_theta: int = 256, n_tau: int = 512) -> Carpet:
    """Tabulate the density over [0, pi] x [0, pi] (one revival period).

    The theta grid is the arccos image of Gauss-Legendre nodes, so column
    normalization is exactly checkable with the stored weights.
    """
    if n_theta < 2 or n_tau < 2:
        raise ValueError("carpet grids need at least 2 points per axis")
    rule = gauss_legendre(n_theta)
    thetas = np.arccos(rule.nodes)[::-1].copy()  # ascending in theta
    weights = rule.weights[::-1].copy()
    taus = np.linspace(0.0, TAU_REVIVAL, n_tau)
    harmonics = sph_harm_table(wp.j_max, wp.m, thetas)  # (n_j, n_theta)
    phases = np.exp(-1j * np.outer(wp.energies, taus))  # (n_j, n_tau)
    psi = harmonics.T @ (wp.coeffs[:, None] * phases)
    return Carpet(thetas=thetas, taus=taus, density=np.abs(psi) ** 2, weights=weights)


def time_averaged_orientation(wp: Wavepacket) -> float:
    """Exact integral of <cos theta> over one revival [0, pi].

    Every coherence term carries a nonzero even frequency, so each term
    integrates to zero exactly; the return value is the floating-point
    residual of that statement.
    """
    _require_m0(wp, "orientation")
    amps, freqs = _orientation_pairs(wp)
    integrals = (np.exp(1j * freqs * TAU_REVIVAL) - 1.0) / (1j * freqs)
    total = amps @ integrals + np.conj(amps @ integrals)
    return float(total.real)
