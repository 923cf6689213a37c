import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relmass import evolution as ev
from relmass.spectrum import omega_cm, omega_ent, total_energy

W_ENT = 0.037011016504085094  # (3 pi^2/2)(0.5)/(2*100), CP1
T_COLLAPSE = math.pi / (2 * W_ENT)
T_REVIVAL = math.pi / W_ENT


def test_cp1_entangling_frequency(cp1):
    assert omega_ent(cp1) == pytest.approx(W_ENT, rel=1e-14)
    assert T_COLLAPSE == pytest.approx(42.440725, abs=1e-3)
    assert T_REVIVAL == pytest.approx(84.881451, abs=2e-3)


def test_default_initial_state():
    s = ev.default_initial_state()
    np.testing.assert_array_equal(s.c, np.full(4, 0.5))
    assert s.norm == 1.0
    assert s.amplitude(1, 0) == 0.5


def test_amplitudes_must_be_normalised():
    with pytest.raises(ValueError):
        ev.ProductStateAmplitudes(np.ones(4))


def test_evolve_identity_at_zero(cp1):
    s = ev.default_initial_state()
    np.testing.assert_array_equal(ev.evolve_amplitudes(cp1, s, 0.0).c, s.c)


@given(st.floats(-1e4, 1e4))
def test_evolution_preserves_norm(t):
    from relmass.model import CP1

    s = ev.evolve_amplitudes(CP1, ev.default_initial_state(), t)
    assert abs(s.norm - 1.0) < 1e-12


def test_ground_phase_period(cp1):
    e00 = total_energy(cp1, 0, 0)
    assert e00 == pytest.approx(4.813040, abs=1e-6)
    s = ev.evolve_amplitudes(cp1, ev.default_initial_state(), 2 * math.pi / e00)
    assert abs(np.angle(s.amplitude(0, 0))) < 1e-10


def test_density_operator_default(cp1):
    rho = ev.density_operator(ev.default_initial_state())
    np.testing.assert_allclose(rho.rho, np.full((4, 4), 0.25), atol=0)
    assert np.trace(rho.rho).real == pytest.approx(1.0, abs=1e-15)
    assert np.trace(rho.rho @ rho.rho).real == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("t", [0.0, 3.7, 42.0, 500.0])
def test_density_operator_invariants(cp1, t):
    rho = ev.density_operator(ev.evolve_amplitudes(cp1, ev.default_initial_state(), t)).rho
    assert np.linalg.norm(rho - rho.conj().T) < 1e-12
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-10
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 1


def test_reduced_state_t0(cp1):
    r = ev.reduced_state(cp1, 0.0).rho_cm
    np.testing.assert_allclose(r, np.full((2, 2), 0.5), atol=1e-15)


def test_reduced_state_collapse(cp1):
    r = ev.reduced_state(cp1, T_COLLAPSE).rho_cm
    assert abs(r[0, 1]) < 1e-12
    np.testing.assert_allclose(np.diag(r).real, [0.5, 0.5], atol=1e-13)


def test_partial_trace_by_hand():
    # Non-symmetric amplitudes: trace out n explicitly.
    c = np.array([0.1 + 0.2j, 0.3, -0.4j, 0.5])
    c = c / np.linalg.norm(c)
    s = ev.ProductStateAmplitudes(c)
    r = ev.reduce_cm(ev.density_operator(s)).rho_cm
    expected = np.array(
        [
            [abs(c[0]) ** 2 + abs(c[1]) ** 2, c[0] * np.conj(c[2]) + c[1] * np.conj(c[3])],
            [c[2] * np.conj(c[0]) + c[3] * np.conj(c[1]), abs(c[2]) ** 2 + abs(c[3]) ** 2],
        ]
    )
    np.testing.assert_allclose(r, expected, atol=1e-15)


def test_coherence_values(cp1):
    assert ev.coherence(cp1, 0.0) == 0.5 + 0j
    assert abs(ev.coherence(cp1, T_REVIVAL)) == pytest.approx(0.5, abs=1e-12)
    assert abs(ev.coherence(cp1, T_COLLAPSE)) < 1e-12
    # 0.5 cos(10 W_ent)
    assert abs(ev.coherence(cp1, 10.0)) == pytest.approx(0.5 * math.cos(10 * W_ENT), rel=1e-13)


def test_coherence_matches_pipeline(cp1):
    rng = np.random.default_rng(1)
    ts = rng.uniform(0.0, 4 * math.pi / W_ENT, 1000)
    closed = ev.coherence(cp1, ts)
    built = np.array([ev.reduced_state(cp1, t).rho_cm[0, 1] for t in ts])
    assert np.max(np.abs(closed - built)) < 1e-12


def test_diagonal_is_always_half(cp1):
    for t in np.linspace(0, 400, 97):
        r = ev.reduced_state(cp1, t).rho_cm
        assert np.max(np.abs(np.diag(r) - 0.5)) < 1e-13


def test_visibility(cp1):
    assert ev.visibility(cp1, 0.0) == 1.0
    assert ev.visibility(cp1, T_COLLAPSE) < 1e-12
    assert ev.visibility(cp1, T_REVIVAL) == pytest.approx(1.0, abs=1e-12)
    ts = np.linspace(0, 300, 211)
    np.testing.assert_allclose(ev.visibility(cp1, ts + T_REVIVAL), ev.visibility(cp1, ts), atol=1e-12)


def test_no_collapse_without_internal_splitting(cp1):
    p = cp1.replace(e1_int=0.0)
    np.testing.assert_array_equal(ev.visibility(p, np.linspace(0, 1e4, 50)), 1.0)


def test_purity_values(cp1):
    assert ev.purity(ev.reduced_state(cp1, 0.0)) == pytest.approx(1.0, abs=1e-15)
    assert ev.purity(ev.reduced_state(cp1, T_COLLAPSE)) == pytest.approx(0.5, abs=1e-12)
    assert ev.purity(ev.reduced_state(cp1, T_COLLAPSE / 2)) == pytest.approx(0.75, abs=1e-12)


def test_purity_closed_form_and_bounds(cp1):
    for t in np.linspace(0, 400, 173):
        r = ev.reduced_state(cp1, t)
        pu = ev.purity(r)
        assert 0.5 - 1e-10 <= pu <= 1 + 1e-10
        assert pu == pytest.approx(ev.purity_closed(cp1, t), abs=1e-12)
        eig = np.linalg.eigvalsh(r.rho_cm)
        assert eig.min() >= -1e-10 and eig.max() <= 1 + 1e-10


def test_general_state_pipeline_differs_from_closed_form(cp1):
    # The closed form only describes the equal superposition.
    c = np.array([0.8, 0.0, 0.6, 0.0], dtype=complex)
    r = ev.reduced_state(cp1, 10.0, ev.ProductStateAmplitudes(c)).rho_cm
    assert abs(r[0, 1]) == pytest.approx(0.48, abs=1e-14)  # no internal superposition: no collapse
    np.testing.assert_allclose(np.diag(r).real, [0.64, 0.36], atol=1e-14)


def test_density_at_centre_is_one(cp1):
    for t in (0.0, 1.234, T_COLLAPSE, 77.0):
        d = ev.com_probability_density(cp1, t, [0.5]).density[0]
        assert d == pytest.approx(1.0, abs=1e-12)


def test_density_quarter_point_t0(cp1):
    # psi0(1/4) = 1, psi1(1/4) = sqrt 2
    d = ev.com_probability_density(cp1, 0.0, [0.25]).density[0]
    assert d == pytest.approx(0.5 * (1 + 2 + 2 * math.sqrt(2)), rel=1e-14)
    assert d == pytest.approx(2.914214, abs=1e-6)


def test_density_entangled_is_symmetric(cp1):
    xs = np.linspace(0, 1, 1001)
    d = ev.com_probability_density(cp1, T_COLLAPSE, xs).density
    assert np.max(np.abs(d - d[::-1])) < 1e-12
    psi0 = np.sqrt(2) * np.sin(np.pi * xs)
    psi1 = np.sqrt(2) * np.sin(2 * np.pi * xs)
    np.testing.assert_allclose(d, 0.5 * (psi0**2 + psi1**2), atol=1e-14)


def test_density_positive_and_normalised(cp1):
    rng = np.random.default_rng(2)
    xs = np.linspace(0, 1, 2001)
    for t in rng.uniform(0, 400, 20):
        d = ev.com_probability_density(cp1, t, xs).density
        assert d.min() >= -1e-12
        assert np.trapezoid(d, xs) == pytest.approx(1.0, abs=1e-9)


def test_density_rejects_outside_points(cp1):
    with pytest.raises(ValueError):
        ev.com_probability_density(cp1, 0.0, [-0.1, 0.5])


def test_density_matches_trace_formula(cp1):
    # P(X) = sum_KK' rho_KK' psi_K'(X) psi_K(X) from the constructive rho_cm.
    xs = np.linspace(0, 1, 101)
    psi = np.vstack([np.sqrt(2) * np.sin(np.pi * xs), np.sqrt(2) * np.sin(2 * np.pi * xs)])
    for t in (0.0, 3.3, 50.0):
        r = ev.reduced_state(cp1, t).rho_cm
        built = np.einsum("kl,lx,kx->x", r, psi, psi).real
        np.testing.assert_allclose(ev.com_probability_density(cp1, t, xs).density, built, atol=1e-13)


# Brute-force argmax on a 2e6-point grid:
#   t = 0      -> 0.2979155 (closed form arccos((sqrt33 - 1)/8)/pi = 0.29791559850761384)
#   t = t_coll -> 0.2902155 (closed form arccos(-1/4)/(2 pi)      = 0.29021531162758313)
PEAK_T0 = 0.29791559850761384
PEAK_ENTANGLED = 0.29021531162758313


def test_peak_position_t0(cp1):
    assert ev.interference_peak_position(cp1, 0.0) == pytest.approx(PEAK_T0, abs=1e-9)
    assert ev.interference_peak_position(cp1, 0.0) == pytest.approx(0.297897, abs=1e-4)


def test_peak_positions_entangled(cp1):
    peaks = ev.interference_peak_positions(cp1, T_COLLAPSE)
    assert len(peaks) == 2
    assert peaks[0] == pytest.approx(PEAK_ENTANGLED, abs=1e-9)
    assert peaks[0] + peaks[1] == pytest.approx(1.0, abs=1e-9)
    # centre is a local minimum of the symmetric profile
    d = ev.com_probability_density(cp1, T_COLLAPSE, [0.49, 0.5, 0.51]).density
    assert d[1] < d[0] and d[1] < d[2]


def test_peak_oracle_values():
    x = np.linspace(0, 1, 2_000_001)
    f0 = (np.sin(np.pi * x) + np.sin(2 * np.pi * x)) ** 2
    f1 = np.sin(np.pi * x) ** 2 + np.sin(2 * np.pi * x) ** 2
    assert x[f0.argmax()] == pytest.approx(PEAK_T0, abs=1e-6)
    assert x[f1.argmax()] == pytest.approx(PEAK_ENTANGLED, abs=1e-6)
