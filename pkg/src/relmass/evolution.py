"""
Exact unitary evolution of the atom in the two lowest well states.

The composite state lives on the four product states |N, n> with
N, n in {0, 1}. Arrays are indexed ``2*N + n``. Phases use the energies
of :func:`relmass.spectrum.total_energy`, i.e. with M0 c^2 removed; that
constant multiplies every amplitude identically and drops out of every
density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from relmass.model import PhysicalParams
from relmass.spectrum import omega_cm, omega_ent, total_energy, well_wavefunction

LEVELS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class ProductStateAmplitudes:
    """Four complex amplitudes c_Nn in the order of ``LEVELS``."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex).reshape(4)
        norm = float(np.sum(np.abs(c) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"amplitudes must be normalised, sum |c|^2 = {norm!r}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def amplitude(self, N: int, n: int) -> complex:
        return complex(self.c[2 * N + n])

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.c) ** 2))


@dataclass(frozen=True)
class DensityOperator4:
    rho: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class ReducedDensityMatrix:
    rho_cm: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class ComProbabilityGrid:
    xs: np.ndarray
    t: float
    density: np.ndarray


def default_initial_state() -> ProductStateAmplitudes:
    """Unentangled equal superposition of the two well and two internal states."""
    return ProductStateAmplitudes(np.full(4, 0.5, dtype=complex))


def level_energies(params: PhysicalParams) -> np.ndarray:
    return np.array([total_energy(params, N, n) for N, n in LEVELS])


def evolve_amplitudes(params: PhysicalParams, s0: ProductStateAmplitudes, t: float) -> ProductStateAmplitudes:
    phases = np.exp(-1j * level_energies(params) * t / params.hbar)
    c = s0.c * phases
    # Renormalise away the last-ulp drift of |exp(i phi)| so the type
    # invariant holds for arbitrarily long times.
    c = c / np.sqrt(np.sum(np.abs(c) ** 2))
    return ProductStateAmplitudes(c)


def density_operator(s: ProductStateAmplitudes, t: float = 0.0) -> DensityOperator4:
    return DensityOperator4(np.outer(s.c, s.c.conj()), t)


def reduce_cm(rho: DensityOperator4) -> ReducedDensityMatrix:
    """Partial trace over the internal level."""
    r = rho.rho.reshape(2, 2, 2, 2)  # (N, n, N', n')
    return ReducedDensityMatrix(np.einsum("ikjk->ij", r), rho.t)


def reduced_state(params: PhysicalParams, t: float, s0: ProductStateAmplitudes | None = None) -> ReducedDensityMatrix:
    """Centre-of-mass density matrix at time ``t`` via the full pipeline."""
    s0 = default_initial_state() if s0 is None else s0
    return reduce_cm(density_operator(evolve_amplitudes(params, s0, t), t))


def coherence(params: PhysicalParams, t):
    """Closed-form <0|rho_cm|1> for the default initial state.

    Equals 1/2 exp(i W_cm t) cos(W_ent t). Vectorised over ``t``.
    """
    t = np.asarray(t, dtype=float)
    value = 0.5 * np.exp(1j * omega_cm(params) * t) * np.cos(omega_ent(params) * t)
    return value if value.ndim else complex(value)


def visibility(params: PhysicalParams, t):
    """Interference contrast |cos(W_ent t)|, 1 at t = 0."""
    t = np.asarray(t, dtype=float)
    value = np.abs(np.cos(omega_ent(params) * t))
    return value if value.ndim else float(value)


def purity(rho_cm: ReducedDensityMatrix) -> float:
    r = rho_cm.rho_cm
    return float(np.real(np.trace(r @ r)))


def purity_closed(params: PhysicalParams, t):
    t = np.asarray(t, dtype=float)
    value = 0.5 + 0.5 * np.cos(omega_ent(params) * t) ** 2
    return value if value.ndim else float(value)


def com_probability_density(params: PhysicalParams, t: float, xs) -> ComProbabilityGrid:
    """Centre-of-mass position density for the default initial state.

    The wave functions are real, so the interference term keeps the sign of
    psi_0 psi_1.
    """
    xs = np.asarray(xs, dtype=float)
    L = params.well_length
    if np.any(xs < 0.0) or np.any(xs > L):
        raise ValueError("positions must lie in [0, L]")
    psi0 = well_wavefunction(params, 0, xs)
    psi1 = well_wavefunction(params, 1, xs)
    envelope = np.cos(omega_ent(params) * t) * np.cos(omega_cm(params) * t)
    density = 0.5 * (psi0**2 + psi1**2 + 2.0 * psi0 * psi1 * envelope)
    return ComProbabilityGrid(xs, float(t), density)


def _density_slope(params, t, x):
    L = params.well_length
    k = np.sqrt(2.0 / L) * np.pi / L
    a0 = np.pi * x / L
    psi0, psi1 = np.sqrt(2.0 / L) * np.sin(a0), np.sqrt(2.0 / L) * np.sin(2.0 * a0)
    d0, d1 = k * np.cos(a0), 2.0 * k * np.cos(2.0 * a0)
    envelope = np.cos(omega_ent(params) * t) * np.cos(omega_cm(params) * t)
    return psi0 * d0 + psi1 * d1 + envelope * (d0 * psi1 + psi0 * d1)


def interference_peak_positions(params: PhysicalParams, t: float, seed_points: int = 2001) -> np.ndarray:
    """All global maxima of the density on [0, L], ascending.

    Local maxima of a dense seed grid are polished by bracketing a root of
    the analytic slope, which resolves the peak to rounding level instead
    of the sqrt(eps) floor of a pure value-comparison search.
    """
    L = params.well_length
    xs = np.linspace(0.0, L, seed_points)
    dens = com_probability_density(params, t, xs).density
    peaks = []
    for i in range(1, len(xs) - 1):
        if not (dens[i] >= dens[i - 1] and dens[i] >= dens[i + 1]):
            continue
        lo, hi = xs[i - 1], xs[i + 1]
        s_lo, s_hi = _density_slope(params, t, lo), _density_slope(params, t, hi)
        if s_lo == 0.0:
            x = lo
        elif s_hi == 0.0:
            x = hi
        elif s_lo > 0.0 > s_hi:
            x = brentq(lambda z: _density_slope(params, t, z), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        else:
            x = xs[i]
        peaks.append((float(x), float(com_probability_density(params, t, [x]).density[0])))
    if not peaks:
        raise ValueError("density has no interior maximum")
    best = max(v for _, v in peaks)
    kept = sorted(x for x, v in peaks if v >= best - 1e-9 * abs(best))
    merged = []
    for x in kept:
        if not merged or x - merged[-1] > 2 * (xs[1] - xs[0]):
            merged.append(x)
    return np.array(merged)


def interference_peak_position(params: PhysicalParams, t: float) -> float:
    """Leftmost position of the density maximum on [0, L]."""
    return float(interference_peak_positions(params, t)[0])
