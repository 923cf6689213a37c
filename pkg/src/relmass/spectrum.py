"""
Closed-form spectrum of a two-level atom in a 1-D infinite well.

Levels are labelled (N, n): N >= 0 is the well quantum number with the
ground state at N = 0, and n in {0, 1} is the internal level. The constant
rest energy M0 c^2 is left out of every energy returned here; it only adds
a global phase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from relmass.model import PhysicalParams


def _check_levels(N, n=0):
    if int(N) != N or N < 0:
        raise ValueError(f"well index N must be an integer >= 0, got {N!r}")
    if n not in (0, 1):
        raise ValueError(f"internal index n must be 0 or 1, got {n!r}")


def internal_energy(params: PhysicalParams, n: int) -> float:
    _check_levels(0, n)
    return 0.0 if n == 0 else params.e1_int


def well_energy(params: PhysicalParams, N: int) -> float:
    """(N+1)^2 pi^2 hbar^2 / (2 M0 L^2)."""
    _check_levels(N)
    return (N + 1) ** 2 * np.pi**2 * params.hbar**2 / (2.0 * params.m0 * params.well_length**2)


def well_wavefunction(params: PhysicalParams, N: int, X):
    """Real eigenfunction sqrt(2/L) sin((N+1) pi X / L), zero outside (0, L).

    Accepts scalars or arrays for ``X``.
    """
    _check_levels(N)
    L = params.well_length
    X = np.asarray(X, dtype=float)
    inside = (X > 0.0) & (X < L)
    psi = np.where(inside, np.sqrt(2.0 / L) * np.sin((N + 1) * np.pi * X / L), 0.0)
    return psi if psi.ndim else float(psi)


def p2_matrix_element(params: PhysicalParams, N: int) -> float:
    """<N|P^2|N> = (N+1)^2 pi^2 hbar^2 / L^2."""
    _check_levels(N)
    return (N + 1) ** 2 * np.pi**2 * params.hbar**2 / params.well_length**2


def p4_matrix_element(params: PhysicalParams, N: int) -> float:
    _check_levels(N)
    return (N + 1) ** 4 * np.pi**4 * params.hbar**4 / params.well_length**4


def perturbation_energy(params: PhysicalParams, N: int, n: int) -> float:
    """First-order shift from the kinetic and mass-coupling corrections.

    Both terms are non-positive.
    """
    e_ip = well_energy(params, N)
    e_int = internal_energy(params, n)
    mc2 = params.rest_energy
    return -(e_ip**2) / (2.0 * mc2) - e_ip * e_int / mc2


def total_energy(params: PhysicalParams, N: int, n: int) -> float:
    return well_energy(params, N) + internal_energy(params, n) + perturbation_energy(params, N, n)


def omega_cm(params: PhysicalParams) -> float:
    """Interference frequency of the two lowest well states."""
    E = total_energy
    return abs(E(params, 1, 1) + E(params, 1, 0) - E(params, 0, 1) - E(params, 0, 0)) / (2.0 * params.hbar)


def omega_cm_closed(params: PhysicalParams) -> float:
    """Same frequency written out through the unperturbed levels."""
    e0, e1 = well_energy(params, 0), well_energy(params, 1)
    mc2 = params.rest_energy
    value = (e1 - e0) / params.hbar * (1.0 - (0.0 + params.e1_int) / (2.0 * mc2)) - (e1**2 - e0**2) / (
        2.0 * params.hbar * mc2
    )
    return abs(value)


def omega_ent(params: PhysicalParams) -> float:
    """Collapse/revival frequency set by the centre-of-mass/internal coupling."""
    e0, e1 = well_energy(params, 0), well_energy(params, 1)
    return (e1 - e0) * (params.e1_int - 0.0) / (2.0 * params.hbar * params.rest_energy)


def omega_ent_from_levels(params: PhysicalParams) -> float:
    E = total_energy
    return abs(E(params, 1, 1) + E(params, 0, 0) - E(params, 1, 0) - E(params, 0, 1)) / (2.0 * params.hbar)


def effective_mass(params: PhysicalParams) -> float:
    """M0 plus the mean internal energy of an equal superposition over c^2."""
    return params.m0 + (0.0 + params.e1_int) / (2.0 * params.c**2)


def perturbation_matrix(params: PhysicalParams, N_max: int) -> np.ndarray:
    """Matrix of the first-order correction in the product basis.

    Rows and columns are ordered (0,0), (0,1), (1,0), ... up to (N_max, 1).
    The well states diagonalise both P^2 and P^4, so the result is diagonal;
    it is built from the full operator products rather than assumed so.
    """
    size = N_max + 1
    p2 = np.diag([p2_matrix_element(params, N) for N in range(size)])
    p4 = np.diag([p4_matrix_element(params, N) for N in range(size)])
    h_int = np.diag([0.0, params.e1_int])
    m0, c = params.m0, params.c
    return -np.kron(p4, np.eye(2)) / (8.0 * m0**3 * c**2) - np.kron(p2, h_int) / (2.0 * m0**2 * c**2)


@dataclass(frozen=True)
class SpectrumRow:
    N: int
    n: int
    e_ip: float
    e_int: float
    e1: float
    e_total: float


@dataclass(frozen=True)
class SpectrumTable:
    rows: tuple[SpectrumRow, ...]

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def lookup(self, N: int, n: int) -> SpectrumRow:
        return self.rows[2 * N + n]


def build_table(params: PhysicalParams, N_max: int) -> SpectrumTable:
    if int(N_max) != N_max or N_max < 1:
        raise ValueError(f"N_max must be an integer >= 1, got {N_max!r}")
    rows = []
    for N in range(int(N_max) + 1):
        e_ip = well_energy(params, N)
        for n in (0, 1):
            e_int = internal_energy(params, n)
            e1 = perturbation_energy(params, N, n)
            rows.append(SpectrumRow(N, n, e_ip, e_int, e1, e_ip + e_int + e1))
    return SpectrumTable(tuple(rows))
