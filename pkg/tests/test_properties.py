"""Property-based checks of the model's invariants."""
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from pilotnonlocal import (
    BranchState,
    CouplingProfile,
    Exact,
    ExperimentConfig,
    HiddenVariable,
    MeasurementSettings,
    PacketSpec,
    PerturbationParams,
    PhasePoint,
    evolve_exact,
    outcome_map,
    perturbed_singlet,
    shift_at_B,
    single_spin_position,
    singlet_amplitudes,
    velocity,
)

angles = st.floats(-10.0, 10.0, allow_nan=False)
inside = st.floats(-0.5, 0.4999, allow_nan=False)
couplings = st.floats(0.2, 5.0)
small_eps = st.floats(-0.2, 0.2)


@given(angles, angles)
def test_singlet_normalized(tA, tB):
    a = singlet_amplitudes(MeasurementSettings(tA, tB))
    assert abs(a.weights().sum() - 1) <= 1e-12


@given(angles, angles)
def test_singlet_rotational_invariance(tA, tB):
    a = singlet_amplitudes(MeasurementSettings(tA, tB))
    b = singlet_amplitudes(MeasurementSettings(0.0, tB - tA))
    assert a == b


@given(angles, angles)
def test_singlet_correlation(tA, tB):
    a = singlet_amplitudes(MeasurementSettings(tA, tB))
    assert abs(a.correlation() + math.cos(tA - tB)) <= 1e-12


@given(small_eps, small_eps, small_eps, angles, angles)
def test_perturbed_normalized(pp, pm, mm, tA, tB):
    a = perturbed_singlet(PerturbationParams(pp, pm, pm, mm), MeasurementSettings(tA, tB))
    assert abs(a.weights().sum() - 1) <= 1e-12


@given(inside, inside, st.floats(0, 2), angles)
def test_velocity_bounded(x, y, t, delta):
    st_ = BranchState(singlet_amplitudes(MeasurementSettings(0.0, delta)), CouplingProfile(1.0, 2.0))
    try:
        vA, vB = velocity(PhasePoint(x, y, t), st_)
    except ValueError:
        return
    assert abs(vA) <= 1.0 + 1e-12 and abs(vB) <= 2.0 + 1e-12


@settings(max_examples=60, deadline=None)
@given(inside, inside, angles, couplings, couplings, st.sampled_from([0.25, 0.5, 2.0, 4.0]))
def test_scale_equivariance(x, y, delta, aA, aB, k):
    amps = singlet_amplitudes(MeasurementSettings(0.0, delta))
    cp = CouplingProfile(aA, aB)
    base = evolve_exact(HiddenVariable(x, y), amps, cp)
    scaled = evolve_exact(HiddenVariable(k * x, k * y), amps, CouplingProfile(k * aA, k * aB), PacketSpec(k))
    assert base.outcome == scaled.outcome
    np.testing.assert_array_equal(k * base.r_A, scaled.r_A)
    np.testing.assert_array_equal(k * base.r_B, scaled.r_B)
    np.testing.assert_array_equal(base.t, scaled.t)


@settings(max_examples=40, deadline=None)
@given(inside, inside, angles, couplings, couplings)
def test_determinism(x, y, delta, aA, aB):
    amps = singlet_amplitudes(MeasurementSettings(0.0, delta))
    cp = CouplingProfile(aA, aB)
    a = evolve_exact(HiddenVariable(x, y), amps, cp)
    b = evolve_exact(HiddenVariable(x, y), amps, cp)
    for f in ("t", "r_A", "r_B", "region_id"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))


@settings(max_examples=40, deadline=None)
@given(inside, inside, angles, couplings, couplings)
def test_exact_outcome_is_final_sign(x, y, delta, aA, aB):
    amps = singlet_amplitudes(MeasurementSettings(0.0, delta))
    tr = evolve_exact(HiddenVariable(x, y), amps, CouplingProfile(aA, aB))
    sA, sB = outcome_map(x, y, amps, CouplingProfile(aA, aB))
    assert (int(sA), int(sB)) == (tr.outcome.sigma_A, tr.outcome.sigma_B)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["x+", "x-", "z+", "z-"]), angles, st.floats(0.1, 3.0))
def test_single_spin_non_crossing(state, theta, g):
    r0 = np.linspace(-0.5, 0.5, 101)[:-1]
    t = np.linspace(0, 3, 31)
    paths = single_spin_position(r0[:, None], t[None, :], state, theta, g)
    assert np.all(np.diff(paths, axis=0) >= 0)


@settings(max_examples=25, deadline=None)
@given(angles, angles, angles, st.sampled_from([(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)]))
def test_detailed_balance_and_bound1(tA, tB, tB2, cp):
    rep = shift_at_B(tA, tB, tB2, ExperimentConfig(CouplingProfile(*cp)), method=Exact())
    assert abs(rep.alpha.nu_plus_minus.value - rep.alpha.nu_minus_plus.value) <= 1e-12
    assert rep.bound1.lhs >= rep.bound1.rhs - 1e-12
