import math
import warnings

import numpy as np
import pytest
from scipy.integrate import trapezoid

from pilotnonlocal import (
    CouplingProfile,
    Exact,
    ExperimentConfig,
    Grid,
    MonteCarlo,
    PerturbationParams,
    balanced_distribution_search,
    bound_check,
    delta_sweep,
    detailed_balance_check,
    entanglement_sweep,
    equilibrium_distribution,
    evaluate_bound,
    half_square,
    linear_tilt,
    nonlocal_bits,
    outcome_statistics,
    point_mass,
    shift_at_B,
    signal,
    transition_fractions,
)
from pilotnonlocal.geometry import clip_convex
from pilotnonlocal.nonlocality import _partition

EQUAL = ExperimentConfig()
TWO_ONE = ExperimentConfig(CouplingProfile(2.0, 1.0))
MC = MonteCarlo(2 * 10**5, 42)


@pytest.mark.parametrize("cfg", [EQUAL, TWO_ONE], ids=["equal", "2:1"])
@pytest.mark.parametrize("tA, tB", [(0.0, 0.0), (0.3, 1.9), (-1.0, 2.5)])
def test_exact_statistics(cfg, tA, tB):
    st = outcome_statistics(tA, tB, cfg, method=Exact())
    assert st.correlation.value == pytest.approx(-math.cos(tA - tB), abs=1e-12)
    assert st.p_A_plus.value == pytest.approx(0.5, abs=1e-12)
    assert st.p_B_plus.value == pytest.approx(0.5, abs=1e-12)


def test_monte_carlo_correlation():
    st = outcome_statistics(0.0, 2.0, EQUAL, method=MC)
    assert abs(st.correlation.value + math.cos(2.0)) <= 3 * st.correlation.error


def test_point_mass_statistics():
    st = outcome_statistics(0.0, 0.0, EQUAL, point_mass(-0.2, 0.3), Grid(10))
    assert st.p_A_plus.value == 0.0 and st.p_B_plus.value == 1.0 and st.correlation.value == -1.0


def test_quarter_turn_transitions():
    rep = transition_fractions("A", 0.0, 0.0, math.pi / 2, method=Exact())
    assert rep.nu_plus_minus.value == pytest.approx(0.125, abs=1e-12)
    assert rep.nu_minus_plus.value == pytest.approx(0.125, abs=1e-12)
    assert rep.alpha == pytest.approx(0.25, abs=1e-12)
    assert not rep.local


def test_local_shift_asymmetric():
    rep = transition_fractions("B", 0.0, 0.0, math.pi / 2, local=True, config=TWO_ONE, method=Exact())
    assert rep.local and rep.alpha == pytest.approx(0.375, abs=1e-12)


def test_no_shift_no_transitions():
    assert transition_fractions("A", 0.0, 0.0, 0.0, method=Grid(200)).alpha == 0.0


def test_grid_and_exact_agree():
    g = shift_at_B(0.0, 0.0, 1.0, method=Grid(1000))
    e = shift_at_B(0.0, 0.0, 1.0, method=Exact())
    assert abs(g.alpha.alpha - e.alpha.alpha) <= g.alpha.alpha_error
    assert abs(g.beta_tilde.alpha - e.beta_tilde.alpha) <= g.beta_tilde.alpha_error


@pytest.mark.parametrize("delta", [math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2, 2 * math.pi / 3, math.pi])
def test_symmetric_identity_exact(delta):
    rep = shift_at_B(0.0, 0.0, delta, method=Exact())
    ref = 0.25 * (1 - math.cos(delta))
    assert rep.alpha.alpha == pytest.approx(ref, abs=1e-12)
    assert rep.beta_tilde.alpha == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("delta", [0.4, 1.3, 2.9])
def test_exchange_symmetry(delta):
    a = transition_fractions("A", 0.0, 0.0, delta, method=Exact()).alpha
    b = transition_fractions("B", 0.0, 0.0, -delta, method=Exact()).alpha
    assert a == pytest.approx(b, abs=1e-12)


def test_detailed_balance_exact_random():
    rng = np.random.default_rng(1)
    for cfg in (EQUAL, TWO_ONE):
        for tA, tB, tB2 in rng.uniform(-math.pi, math.pi, (6, 3)):
            db = detailed_balance_check("A", tA, tB, tB2, cfg, Exact())
            assert db.difference <= 1e-12


def test_detailed_balance_monte_carlo():
    db = detailed_balance_check("A", 0.0, 0.0, math.pi / 2, EQUAL, MC)
    assert db.difference <= 3 * db.error


def test_signal_vanishes_in_equilibrium():
    s = signal("A", 0.2, -0.4, 1.7, method=MC)
    assert abs(s.signal) <= 3 * s.stderr
    assert signal("B", 0.2, -0.4, 1.7, method=Exact()).signal == pytest.approx(0.0, abs=1e-12)


def test_signal_half_square_reference():
    s = signal("A", 0.0, 0.0, math.pi / 2, dist=half_square("right"), method=Exact())
    assert s.signal == pytest.approx(0.25, abs=1e-12)
    assert s.p_before == pytest.approx(0.75) and s.p_after == pytest.approx(1.0)


def test_signal_on_transition_set_is_minus_one():
    # put all the mass at a point taken from the exact T_A(+,-) polygon
    P0 = _partition(EQUAL.amplitudes(0, 0), EQUAL.couplings, EQUAL.packet)
    P1 = _partition(EQUAL.amplitudes(0, math.pi / 2), EQUAL.couplings, EQUAL.packet)
    pieces = [clip_convex(p.polygon, c.polygon) for p in P0 for c in P1 if p.sigma_A > 0 and c.sigma_A < 0]
    x, y = next(piece for piece in pieces if len(piece) >= 3).mean(axis=0)
    s = signal("A", 0.0, 0.0, math.pi / 2, dist=point_mass(float(x), float(y)), method=Grid(10))
    assert s.signal == -1.0


def test_bound_examples():
    b5 = bound_check(5, delta=math.pi / 2, alpha=0.25)
    assert b5.satisfied and b5.gap == pytest.approx(0.0)
    b1 = bound_check(1, theta_B_prime=math.pi / 2, alpha=0.125, beta_tilde=0.375)
    assert b1.rhs == pytest.approx(0.5) and b1.gap == pytest.approx(0.0)


def test_bound3_strong_coupling_warns():
    cp = CouplingProfile(100.0, 1.0)
    with pytest.warns(UserWarning, match="exchange symmetry"):
        b = bound_check(3, delta=math.pi / 2, alpha=0.0025, beta=0.4975, couplings=cp)
    assert b.rhs == pytest.approx(0.5) and b.gap == pytest.approx(0.0, abs=1e-12)


def test_no_warning_with_equal_couplings():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bound_check(5, delta=1.0, alpha=0.2, couplings=CouplingProfile())


@pytest.mark.parametrize("bound_id", [1, 2, 3, 4, 5])
def test_bounds_hold_exactly(bound_id):
    rng = np.random.default_rng(bound_id)
    for tA, tB, d in rng.uniform(-math.pi, math.pi, (4, 3)):
        b = evaluate_bound(bound_id, theta_A=tA, theta_B=tB, theta_B_prime=tB + d, delta=d, method=Exact())
        assert b.lhs >= b.rhs - 1e-12


def test_bits():
    assert nonlocal_bits(-math.pi, math.pi) == pytest.approx(0.25, abs=1e-15)
    assert nonlocal_bits(-math.pi / 2, math.pi / 2) == pytest.approx(0.25 * (1 - 2 / math.pi), abs=1e-15)
    assert nonlocal_bits(0.0, 0.0) == 0.0


def test_bits_match_numeric_average():
    d = np.linspace(-1.0, 2.0, 200001)
    assert nonlocal_bits(-1.0, 2.0) == pytest.approx(trapezoid(0.25 * (1 - np.cos(d)), d) / 3.0, abs=1e-9)


def test_delta_sweep_saturates_bound5():
    sw = delta_sweep(np.radians(np.arange(0, 181, 30)), method=Exact())
    np.testing.assert_allclose(sw.gap, 0.0, atol=1e-12)
    row = next(sw.rows())
    assert list(row) == ["delta_rad", "alpha", "alpha_err", "beta_tilde", "beta_tilde_err", "bound_rhs", "gap"]


def test_entanglement_sweep_zero_epsilon():
    sw = entanglement_sweep([0.0], [math.pi / 3, math.pi])
    np.testing.assert_allclose(sw.alpha[0], [0.25 * (1 - math.cos(math.pi / 3)), 0.5], atol=1e-12)


def test_perturbed_alpha_closed_form():
    # for eps_pp = eps_mm = 0: alpha(0,0,pi) = 1/2 - d^2 / (1 + d) with
    # d = |a_+-|^2 - |a_-+|^2 = eps / (1 + eps^2 / 4)
    for eps in (0.01, 0.05, 0.1):
        cfg = ExperimentConfig(state=PerturbationParams.from_epsilon(eps))
        a = transition_fractions("A", 0.0, 0.0, math.pi, config=cfg, method=Exact()).alpha
        d = eps / (1 + eps**2 / 4)
        assert a == pytest.approx(0.5 - d**2 / (1 + d), abs=1e-12)


def test_balanced_search_single_triple():
    res = balanced_distribution_search([(0.0, 0.0, math.pi / 2)], m=32)
    assert res.max_residual <= 1e-12
    assert res.disequilibrium > 0.1


def test_balanced_search_empty():
    res = balanced_distribution_search([])
    assert res.distribution.kind == "equilibrium-uniform" and res.residuals.size == 0


def test_balanced_search_linear_tilt():
    rng = np.random.default_rng(8)
    triples = [tuple(t) for t in rng.uniform(-math.pi, math.pi, (8, 3))]
    res = balanced_distribution_search(triples, family="linear-tilt", m=32)
    assert res.residuals.shape == (8,) and res.distribution.kind == "linear-tilt"
    # the reported residuals are exact for the grid version of the candidate
    assert np.all(np.isfinite(res.residuals))


def test_balanced_search_several_triples_grid_lp():
    triples = [(0.0, 0.0, math.pi / 2), (0.0, 0.3, 1.4), (0.5, -0.2, 2.0)]
    res = balanced_distribution_search(triples, m=24)
    assert res.max_residual <= 1e-9 and res.disequilibrium > 0.0
