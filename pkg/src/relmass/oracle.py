"""
Brute-force cross-checks for the closed forms.

Nothing here reuses the linear algebra in :mod:`relmass.evolution`; the
energies are rebuilt on a position grid, the reduced density matrix is
accumulated element by element, and the classical equations of motion are
compared with finite differences of the Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from relmass import classical, spectrum
from relmass.evolution import com_probability_density, coherence
from relmass.model import PhysicalParams


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``points`` interior nodes on (0, length)."""

    points: int
    length: float

    def __post_init__(self):
        if self.points < 64:
            raise ValueError("grid needs at least 64 interior points")

    @property
    def spacing(self) -> float:
        return self.length / (self.points + 1)


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    closed_form: float
    oracle_value: float
    abs_err: float
    rel_err: float
    tolerance: float = math.inf

    @classmethod
    def compare(cls, quantity, closed_form, oracle_value, tolerance=math.inf, relative=True):
        abs_err = abs(closed_form - oracle_value)
        rel_err = abs_err / abs(closed_form) if closed_form != 0 else abs_err
        return cls(quantity, float(closed_form), float(oracle_value), float(abs_err), float(rel_err), tolerance)

    @property
    def passed(self) -> bool:
        return self.rel_err < self.tolerance


def _p2_operator(params: PhysicalParams, grid: GridSpec) -> sp.csr_matrix:
    h = grid.spacing
    n = grid.points
    k = params.hbar**2 / h**2
    return sp.diags([-k * np.ones(n - 1), 2 * k * np.ones(n), -k * np.ones(n - 1)], [-1, 0, 1], format="csr")


def grid_hamiltonian(params: PhysicalParams, grid: GridSpec, n: int) -> sp.csr_matrix:
    """Discrete H for internal level ``n`` with Dirichlet walls.

    P^2 is the three-point second difference times -hbar^2 and P^4 its
    matrix square.
    """
    p2 = _p2_operator(params, grid)
    p4 = p2 @ p2
    m0, c = params.m0, params.c
    e_int = 0.0 if n == 0 else params.e1_int
    eye = sp.identity(grid.points, format="csr")
    return p2 / (2 * m0) - p4 / (8 * m0**3 * c**2) + e_int * (eye - p2 / (2 * m0**2 * c**2))


def grid_hamiltonian_eigs(params: PhysicalParams, grid: GridSpec, n_levels: int) -> np.ndarray:
    """Lowest ``n_levels`` well levels of both internal branches.

    Returns an array of shape (n_levels, 2); column n is the internal level.

    The truncated -P^4 term makes the discrete H unbounded below in the
    highest grid modes, so "lowest" is taken in the order of the kinetic
    energy: eigenvectors of the tridiagonal P^2 are found first, and H,
    which commutes with P^2, is evaluated on them through <P^2> and <P^4>.
    Each vector's residual |H v - E v| against the assembled sparse H is
    checked against eps |H|.
    """
    if n_levels < 1 or n_levels > grid.points // 8:
        raise ValueError("n_levels must lie in [1, points/8]")
    h = grid.spacing
    k = params.hbar**2 / h**2
    diag = np.full(grid.points, 2 * k)
    off = np.full(grid.points - 1, -k)
    try:
        lam, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"tridiagonal eigensolver failed on {grid.points} points: {exc}") from exc

    # <P^2> as k sum (v_{i+1} - v_i)^2 with zero walls has no cancellation;
    # <P^4> = |P^2 v|^2 avoids the far larger cancellation in v.P^4.v.
    padded = np.vstack([np.zeros((1, n_levels)), vecs, np.zeros((1, n_levels))])
    p2_mean = k * np.sum(np.diff(padded, axis=0) ** 2, axis=0)
    p2 = _p2_operator(params, grid)
    p4_mean = np.sum((p2 @ vecs) ** 2, axis=0)
    m0, c = params.m0, params.c

    out = np.empty((n_levels, 2))
    for n in (0, 1):
        e_int = 0.0 if n == 0 else params.e1_int
        energies = p2_mean / (2 * m0) - p4_mean / (8 * m0**3 * c**2) + e_int * (1.0 - p2_mean / (2 * m0**2 * c**2))
        H = grid_hamiltonian(params, grid, n)
        resid = np.linalg.norm(H @ vecs - vecs * energies, axis=0)
        # Rounding in the vectors is amplified by |H|, dominated by P^4;
        # the expectation values themselves are only affected at second order.
        h_norm = abs(H).sum(axis=1).max()
        bad = resid > 1e4 * np.finfo(float).eps * h_norm
        if np.any(bad):
            raise EigensolverError(
                f"branch n={n}: eigenvector residuals {resid[bad]} too large on {grid.points} points"
            )
        out[:, n] = energies
    if np.any(np.diff(lam) <= 0):
        raise EigensolverError("kinetic eigenvalues not strictly increasing")
    return out


def richardson(coarse: float, fine: float, h_coarse: float, h_fine: float, order: int = 2) -> float:
    r = (h_coarse / h_fine) ** order
    return (r * fine - coarse) / (r - 1.0)


@dataclass(frozen=True)
class GridConvergence:
    points: tuple[int, ...]
    raw: np.ndarray  # (len(points), n_levels, 2)
    extrapolated: np.ndarray  # (n_levels, 2)
    orders: np.ndarray  # (len(points)-1, n_levels, 2) observed log2 error ratios


def extrapolated_levels(params: PhysicalParams, points=(512, 1024, 2048), n_levels: int = 2) -> GridConvergence:
    """Grid energies on each grid and the two-level extrapolation from the finest pair.

    Observed convergence orders are measured against the closed-form energies.
    """
    points = tuple(sorted(points))
    grids = [GridSpec(p, params.well_length) for p in points]
    raw = np.array([grid_hamiltonian_eigs(params, g, n_levels) for g in grids])
    ext = richardson(raw[-2], raw[-1], grids[-2].spacing, grids[-1].spacing)
    exact = np.array([[spectrum.total_energy(params, N, n) for n in (0, 1)] for N in range(n_levels)])
    err = np.abs(raw - exact)
    ratio = np.array([grids[i].spacing / grids[i + 1].spacing for i in range(len(grids) - 1)])
    orders = np.log(err[:-1] / err[1:]) / np.log(ratio)[:, None, None]
    return GridConvergence(points, raw, ext, orders)


def brute_force_coherence(params: PhysicalParams, s0, t: float) -> complex:
    """<0|rho_cm|1> from an explicit double sum over product states.

    rho_{(N,n),(N',n')} = c_Nn c*_N'n' exp(-i (E_Nn - E_N'n') t / hbar), then
    the internal index is summed on the diagonal.
    """
    amps = np.asarray(getattr(s0, "c", s0), dtype=complex).reshape(4)
    energy = {}
    for N in (0, 1):
        for n in (0, 1):
            energy[N, n] = spectrum.total_energy(params, N, n)

    def rho(N, n, Np, np_):
        phase = -(energy[N, n] - energy[Np, np_]) * t / params.hbar
        return amps[2 * N + n] * amps[2 * Np + np_].conjugate() * complex(math.cos(phase), math.sin(phase))

    total = 0j
    for k in (0, 1):
        total += rho(0, k, 1, k)
    return total


def quadrature_norm(params: PhysicalParams, t: float, points: int = 2001) -> float:
    """Composite trapezoid integral of the centre-of-mass density over [0, L]."""
    if points < 2:
        raise ValueError("need at least two quadrature points")
    xs = np.linspace(0.0, params.well_length, points)
    return float(np.trapezoid(com_probability_density(params, t, xs).density, xs))


def overlap_integral(params: PhysicalParams, points: int = 2001) -> float:
    """Trapezoid estimate of the integral of psi_0 psi_1 over the well.

    The product is odd about L/2, so mirrored samples are paired before
    summation and cancel exactly.
    """
    xs = np.linspace(0.0, params.well_length, points)
    f = spectrum.well_wavefunction(params, 0, xs) * spectrum.well_wavefunction(params, 1, xs)
    w = np.full(points, xs[1] - xs[0])
    w[0] = w[-1] = 0.5 * (xs[1] - xs[0])
    paired = (f * w + (f * w)[::-1]) / 2.0
    return float(np.sum(paired))


def _fd_gradient(fun, y, steps):
    g = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = steps[i]
        # fourth-order central stencil
        g[i] = (8 * (fun(y + e) - fun(y - e)) - (fun(y + 2 * e) - fun(y - 2 * e))) / (12 * steps[i])
    return g


def eom_errors(params, potential, osc, state, step: float = 1e-6) -> np.ndarray:
    """Per-component relative error of the analytic flow against FD of H.

    The FD flow is (dH/dP, -dH/dX, dH/dp_int, -dH/dq), each derivative a
    fourth-order central difference with step ``step`` times the
    coordinate's scale.
    Errors are relative to the larger of the two values and the component's
    natural magnitude, so a flow component passing through zero does not
    blow up the ratio: the internal rates use their oscillation amplitude,
    dx/dt is floored at 1e-3 c and dp/dt at the trap force k L. Components
    that are exactly zero on both sides count as error 0.
    """
    y = state.vector() if isinstance(state, classical.ClassicalState) else np.asarray(state, dtype=float)
    amp_q = math.hypot(y[2], y[3] / (osc.mu * osc.omega_int))
    # Internal steps use the amplitude an oscillator holding M0 c^2 would
    # have: H is exactly quadratic in (q, p_int), so a large step costs no
    # truncation error while keeping the rounding floor eps*H/step low.
    q_scale = math.sqrt(params.rest_energy / osc.mu) / osc.omega_int
    scales = np.array(
        [
            max(abs(y[0]), params.well_length),
            max(abs(y[1]), params.m0 * params.c),
            q_scale,
            q_scale * osc.mu * osc.omega_int,
        ]
    )
    H = lambda z: classical.total_hamiltonian(params, potential, osc, z)  # noqa: E731
    grad = _fd_gradient(H, y, step * scales)
    fd = np.array([grad[1], -grad[0], grad[3], -grad[2]])
    an = classical.equations_of_motion(params, potential, osc, y)

    slow = params.rest_energy / math.hypot(params.rest_energy, y[1] * params.c)
    natural = np.array(
        [
            1e-3 * params.c,
            potential.k * params.well_length,
            slow * osc.omega_int * amp_q,
            slow * osc.mu * osc.omega_int**2 * amp_q,
        ]
    )
    denom = np.maximum(np.maximum(np.abs(an), np.abs(fd)), natural)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(denom > 0, np.abs(an - fd) / denom, 0.0)
    return rel


def random_states(params, osc, n_samples: int, rng, max_internal_ratio: float = 1e-2, max_momentum: float = 1.0):
    """Random in-regime states: |P| <= max_momentum M0 c, H_int <= ratio M0 c^2."""
    states = []
    for _ in range(n_samples):
        e = rng.uniform(0.05, 1.0) * max_internal_ratio * params.rest_energy
        phase = rng.uniform(0.0, 2 * math.pi)
        amp = osc.amplitude_for(e)
        q = amp * math.cos(phase)
        p_int = -amp * osc.mu * osc.omega_int * math.sin(phase)
        p = rng.uniform(-max_momentum, max_momentum) * params.m0 * params.c
        x = rng.uniform(-1.0, 1.0) * params.well_length
        states.append(classical.ClassicalState(0.0, x, p, q, p_int))
    return states


def classical_eom_check(params, potential, osc, n_samples: int, seed: int = 0, step: float = 1e-6, tolerance: float = 1e-6):
    """Worst-case FD mismatch of each flow component over random states."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    errs = np.array([eom_errors(params, potential, osc, s, step) for s in random_states(params, osc, n_samples, rng)])
    worst = errs.max(axis=0)
    names = ("dx/dt", "dp/dt", "dq/dt", "dp_int/dt")
    return [OracleReport(f"eom {name} max rel err", 0.0, float(w), float(w), float(w), tolerance) for name, w in zip(names, worst)]


def run_all(params: PhysicalParams, grid_points: int = 2048, seed: int = 0) -> list[OracleReport]:
    """Every oracle check used by the CLI, in a fixed order."""
    reports: list[OracleReport] = []

    pts = (grid_points // 4, grid_points // 2, grid_points)
    conv = extrapolated_levels(params, pts, n_levels=2)
    for N in (0, 1):
        for n in (0, 1):
            reports.append(
                OracleReport.compare(
                    f"E_{N}{n} grid-extrapolated", spectrum.total_energy(params, N, n), conv.extrapolated[N, n], 1e-6
                )
            )

    reports.append(OracleReport.compare("omega_cm two-way", spectrum.omega_cm(params), spectrum.omega_cm_closed(params), 1e-12))
    reports.append(
        OracleReport.compare("omega_ent two-way", spectrum.omega_ent(params), spectrum.omega_ent_from_levels(params), 1e-12)
    )

    w_ent = spectrum.omega_ent(params)
    t_span = 2 * math.pi / w_ent if w_ent > 0 else 2 * math.pi / spectrum.omega_cm(params)
    ts = np.linspace(0.0, t_span, 1000)
    from relmass.evolution import default_initial_state

    s0 = default_initial_state()
    diffs = [abs(coherence(params, t) - brute_force_coherence(params, s0, t)) for t in ts]
    worst = max(diffs)
    reports.append(OracleReport("coherence max abs diff", 0.0, worst, worst, worst, 1e-12))

    for t in (0.0, 0.25 * t_span):
        reports.append(OracleReport.compare(f"P_cm norm t={t:.17g}", 1.0, quadrature_norm(params, t, 2001), 1e-9))

    cl_params, potential, osc, _ = classical.classical_presets()["free_p0.6"]
    reports.extend(classical_eom_check(cl_params, potential, osc, 100, seed=seed))
    return reports
