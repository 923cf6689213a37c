"""
Classical dynamics of a composite body whose internal energy feeds its mass.

The internal system is a 1-D harmonic oscillator, H_int = p^2/2mu + mu w^2 q^2/2,
so its phase gives a clock whose coordinate-time period exposes time dilation.
State vectors are ordered (x, p, q, p_int).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from relmass.model import PhysicalParams


class IntegrationError(RuntimeError):
    """The adaptive integrator gave up; ``last_state`` is the last accepted point."""

    def __init__(self, message: str, last_state: "ClassicalState | None" = None):
        super().__init__(message)
        self.last_state = last_state


class InsufficientDataError(ValueError):
    pass


class InvalidVelocityError(ValueError):
    pass


@dataclass(frozen=True)
class InternalOscillator:
    omega_int: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not (self.omega_int > 0 and self.mu > 0):
            raise ValueError("omega_int and mu must be positive")

    def energy(self, q, p_int):
        return p_int**2 / (2.0 * self.mu) + 0.5 * self.mu * self.omega_int**2 * q**2

    def amplitude_for(self, energy: float) -> float:
        """Turning point q0 of an oscillation with the given energy."""
        return math.sqrt(2.0 * energy / (self.mu * self.omega_int**2))

    @property
    def rest_period(self) -> float:
        return 2.0 * math.pi / self.omega_int


@dataclass(frozen=True)
class ExternalPotential:
    """Either free motion or a harmonic trap 1/2 k (x - center)^2."""

    kind: str = "free"
    k: float = 0.0
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in ("free", "harmonic_trap"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.k < 0:
            raise ValueError("trap stiffness must be non-negative")

    @classmethod
    def free(cls) -> "ExternalPotential":
        return cls("free")

    @classmethod
    def harmonic_trap(cls, k: float, center: float = 0.0) -> "ExternalPotential":
        return cls("harmonic_trap", k, center)

    def energy(self, x):
        if self.kind == "free":
            return 0.0 * x
        return 0.5 * self.k * (x - self.center) ** 2

    def force(self, x):
        if self.kind == "free":
            return 0.0 * x
        return -self.k * (x - self.center)


@dataclass(frozen=True)
class ClassicalState:
    t: float
    x: float
    p: float
    q: float
    p_int: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.t, self.x, self.p, self.q, self.p_int)):
            raise ValueError("state components must be finite")

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.p, self.q, self.p_int])

    @classmethod
    def from_vector(cls, t, y) -> "ClassicalState":
        return cls(float(t), float(y[0]), float(y[1]), float(y[2]), float(y[3]))


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[ClassicalState, ...]
    energy: np.ndarray
    energy_drift: float
    params: PhysicalParams
    osc: InternalOscillator

    @property
    def t(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples])


def _rest_energy_of_motion(params, p):
    # sqrt(M0^2 c^4 + P^2 c^2)
    return np.sqrt(params.rest_energy**2 + (p * params.c) ** 2)


def total_hamiltonian(params: PhysicalParams, potential: ExternalPotential, osc: InternalOscillator, s) -> float:
    """Energy of the coupled system.

    sqrt(M0^2 c^4 + P^2 c^2) + U(X) + M0 c^2 H_int / sqrt(M0^2 c^4 + P^2 c^2)
    """
    x, p, q, p_int = _unpack(s)
    e_kin = _rest_energy_of_motion(params, p)
    return e_kin + potential.energy(x) + params.rest_energy * osc.energy(q, p_int) / e_kin


def com_velocity(params: PhysicalParams, s, osc: InternalOscillator | None = None, h_int: float | None = None) -> float:
    """dX/dt = dH/dP, exact for the first-order Hamiltonian.

    The internal energy comes from ``h_int`` when given, else from ``osc``
    evaluated on the state, else it is taken as zero.
    """
    _, p, q, p_int = _unpack(s)
    if h_int is None:
        h_int = osc.energy(q, p_int) if osc is not None else 0.0
    e_kin = _rest_energy_of_motion(params, p)
    return p * params.c**2 / e_kin * (1.0 - params.rest_energy * h_int / e_kin**2)


def point_velocity(params: PhysicalParams, p) -> float:
    """Velocity P c^2 / sqrt(M0^2 c^4 + P^2 c^2) of a structureless mass M0."""
    return p * params.c**2 / _rest_energy_of_motion(params, p)


def lorentz_factor(v, c: float):
    return 1.0 / np.sqrt(1.0 - (np.asarray(v) / c) ** 2)


def equations_of_motion(params: PhysicalParams, potential: ExternalPotential, osc: InternalOscillator, s) -> np.ndarray:
    """Time derivatives of (x, p, q, p_int).

    The internal pair obeys the rest-frame oscillator equations slowed by
    M0 c^2 / sqrt(M0^2 c^4 + P^2 c^2).
    """
    x, p, q, p_int = _unpack(s)
    e_kin = _rest_energy_of_motion(params, p)
    slow = params.rest_energy / e_kin
    h_int = osc.energy(q, p_int)
    return np.array(
        [
            p * params.c**2 / e_kin * (1.0 - params.rest_energy * h_int / e_kin**2),
            potential.force(x),
            slow * p_int / osc.mu,
            -slow * osc.mu * osc.omega_int**2 * q,
        ]
    )


def _unpack(s):
    if isinstance(s, ClassicalState):
        return s.x, s.p, s.q, s.p_int
    x, p, q, p_int = s
    return x, p, q, p_int


def integrate(
    params: PhysicalParams,
    potential: ExternalPotential,
    osc: InternalOscillator,
    s0: ClassicalState,
    t_end: float,
    rel_tol: float = 1e-10,
    samples: int | None = None,
    samples_per_period: int = 400,
) -> Trajectory:
    """Integrate the coupled equations from ``s0`` to ``t_end``.

    Uses an adaptive 8(5,3) Dormand-Prince pair with dense output. Output is
    sampled uniformly: ``samples`` points if given, otherwise enough for
    ``samples_per_period`` points per rest-frame internal period.
    """
    if not t_end > s0.t:
        raise ValueError("t_end must exceed the initial time")
    if not 1e-14 < rel_tol < 1e-3:
        raise ValueError("rel_tol must lie in (1e-14, 1e-3)")
    if samples is None:
        samples = max(2, int(math.ceil((t_end - s0.t) / osc.rest_period * samples_per_period)) + 1)
    if samples < 2:
        raise ValueError("need at least two samples")

    y0 = s0.vector()
    scale = np.maximum(np.abs(y0), 1.0)
    scale[2] = max(abs(s0.q), abs(s0.p_int) / (osc.mu * osc.omega_int), 1e-300)
    scale[3] = scale[2] * osc.mu * osc.omega_int
    sol = solve_ivp(
        lambda t, y: equations_of_motion(params, potential, osc, y),
        (s0.t, t_end),
        y0,
        method="DOP853",
        dense_output=True,
        rtol=rel_tol,
        atol=rel_tol * 1e-2 * scale,
    )
    if sol.status != 0:
        # sol.t holds the accepted steps only
        last = ClassicalState.from_vector(sol.t[-1], sol.y[:, -1]) if sol.t.size else None
        raise IntegrationError(f"integration failed: {sol.message}", last)

    t_eval = np.linspace(s0.t, t_end, samples)
    y = sol.sol(t_eval)
    y[:, 0] = y0
    states = tuple(ClassicalState.from_vector(t, col) for t, col in zip(t_eval, y.T))
    energy = total_hamiltonian(params, potential, osc, y)
    drift = float(np.max(np.abs(energy - energy[0])) / abs(energy[0]))
    return Trajectory(states, energy, drift, params, osc)


def _zero_crossings(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    s = np.sign(y)
    idx = np.flatnonzero((s[:-1] * s[1:] < 0) | ((s[:-1] != 0) & (s[1:] == 0)))
    t0, t1, y0, y1 = t[idx], t[idx + 1], y[idx], y[idx + 1]
    return t0 - y0 * (t1 - t0) / (y1 - y0)


def measured_internal_period(traj: Trajectory, coordinate: str = "q") -> float:
    """Coordinate-time period of the internal oscillation.

    Zero crossings of ``q`` are located by linear interpolation and a
    straight line is fitted to crossing time versus crossing index; twice
    its slope is the period.
    """
    times = _zero_crossings(traj.t, traj.column(coordinate))
    if times.size < 3:
        raise InsufficientDataError(f"need at least 3 zero crossings of {coordinate}, found {times.size}")
    k = np.arange(times.size)
    slope = np.polyfit(k, times, 1)[0]
    return float(2.0 * slope)


def dilation_factor(traj: Trajectory, params: PhysicalParams | None = None) -> float:
    """Measured internal period over the rest-frame period 2 pi / w."""
    return measured_internal_period(traj) / traj.osc.rest_period


def mean_com_velocity(traj: Trajectory) -> float:
    ys = np.array([s.vector() for s in traj.samples]).T
    return float(np.mean(com_velocity(traj.params, ys, traj.osc)))


def mean_point_velocity(traj: Trajectory) -> float:
    return float(np.mean(point_velocity(traj.params, traj.column("p"))))


@dataclass(frozen=True)
class DilationSummary:
    measured: float
    velocity: float
    expected: float
    rel_err: float
    full_velocity: float
    full_expected: float
    full_rel_err: float
    internal_ratio: float


def dilation_summary(traj: Trajectory) -> DilationSummary:
    """Compare the measured clock slow-down with 1/sqrt(1 - V^2/c^2).

    ``expected`` uses the leading-order velocity P c^2 / E of a mass M0;
    ``full_expected`` uses the trajectory-averaged dX/dt including the
    internal-energy term. The two differ by about (H_int/M0 c^2) (V/c)^2,
    the order the Hamiltonian itself neglects.
    """
    params = traj.params
    measured = dilation_factor(traj)
    v0 = mean_point_velocity(traj)
    v1 = mean_com_velocity(traj)
    g0 = float(lorentz_factor(v0, params.c))
    g1 = float(lorentz_factor(v1, params.c))
    s = traj.samples[0]
    ratio = float(traj.osc.energy(s.q, s.p_int) / params.rest_energy)
    return DilationSummary(measured, v0, g0, abs(measured - g0) / g0, v1, g1, abs(measured - g1) / g1, ratio)


def boosted_clock_state(
    params: PhysicalParams, osc: InternalOscillator, momentum: float, internal_ratio: float, x0: float = 0.0
) -> ClassicalState:
    """Initial state with total momentum ``momentum`` and the oscillator at a
    turning point holding H_int = internal_ratio * M0 c^2."""
    q0 = osc.amplitude_for(internal_ratio * params.rest_energy)
    return ClassicalState(0.0, x0, momentum, q0, 0.0)


@dataclass(frozen=True)
class LegendreReport:
    p_analytic: float
    p_numeric: float
    residual: float
    rel_residual: float
    rest_energy: float


def rest_lagrangian(params: PhysicalParams, osc: InternalOscillator, q, q_prime):
    """Rest-frame Lagrangian -M0 c^2 + mu q'^2/2 - mu w^2 q^2/2 (q' = dq/dtau)."""
    return -params.rest_energy + 0.5 * osc.mu * q_prime**2 - 0.5 * osc.mu * osc.omega_int**2 * q**2


def lab_lagrangian(params: PhysicalParams, osc: InternalOscillator, v, q, q_dot):
    """L_rest(q, q_dot dt/dtau) sqrt(1 - V^2/c^2) as a function of lab-frame velocities."""
    root = math.sqrt(1.0 - (v / params.c) ** 2)
    return rest_lagrangian(params, osc, q, q_dot / root) * root


def verify_legendre(
    params: PhysicalParams, osc: InternalOscillator, v: float, q: float, q_prime: float, step: float = 1e-5
) -> LegendreReport:
    """Check P = (E_rest/c^2) V / sqrt(1 - V^2/c^2) against dL/dV.

    The internal state is given in the rest frame as (q, q'). The numerical
    momentum is the partial derivative of the lab Lagrangian in V with the
    lab-frame internal velocity dq/dt held fixed, taken with a five-point
    central stencil of spacing ``step * c``.
    """
    c = params.c
    if not abs(v) < c:
        raise InvalidVelocityError(f"|v| must be below c, got {v!r}")
    h = step * c
    if abs(v) + 2 * h >= c:
        raise InvalidVelocityError("velocity too close to c for the finite-difference stencil")

    h_int = 0.5 * osc.mu * q_prime**2 + 0.5 * osc.mu * osc.omega_int**2 * q**2
    e_rest = params.rest_energy + h_int
    gamma = 1.0 / math.sqrt(1.0 - (v / c) ** 2)
    p_analytic = e_rest / c**2 * v * gamma

    q_dot = q_prime / gamma
    L = lambda u: lab_lagrangian(params, osc, u, q, q_dot)  # noqa: E731
    p_numeric = (-L(v + 2 * h) + 8 * L(v + h) - 8 * L(v - h) + L(v - 2 * h)) / (12 * h)

    residual = abs(p_analytic - p_numeric)
    rel = residual / abs(p_analytic) if p_analytic != 0 else residual
    return LegendreReport(p_analytic, p_numeric, residual, rel, e_rest)


# Shipped presets for the classical module: (params, potential, oscillator, initial state).
def classical_presets():
    cl = PhysicalParams(hbar=1.0, c=1.0, m0=1.0, well_length=1.0, e1_int=0.0)
    osc = InternalOscillator(omega_int=1.0, mu=1.0)
    return {
        "free_p0.6": (cl, ExternalPotential.free(), osc, boosted_clock_state(cl, osc, 0.6, 1e-4)),
        "free_p1.0": (cl, ExternalPotential.free(), osc, boosted_clock_state(cl, osc, 1.0, 1e-4)),
        "trap": (
            cl,
            ExternalPotential.harmonic_trap(k=0.01, center=0.0),
            osc,
            boosted_clock_state(cl, osc, 0.3, 1e-4, x0=0.5),
        ),
    }
