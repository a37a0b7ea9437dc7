import math

import numpy as np
import pytest

from pilotnonlocal import (
    BranchState,
    CouplingProfile,
    MeasurementSettings,
    PacketSpec,
    PhasePoint,
    UndefinedVelocityError,
    branch_density,
    equilibrium_density,
    single_spin_velocity,
    singlet_amplitudes,
    velocity,
)


def state(delta=0.0, couplings=CouplingProfile(), width=1.0):
    return BranchState(singlet_amplitudes(MeasurementSettings(0.0, delta)), couplings, PacketSpec(width))


def test_branch_density_origin():
    st = state(width=2.0)
    assert branch_density(PhasePoint(0, 0, 0), (1, -1), st) == pytest.approx(0.5 / 4)


def test_branch_pp_vanishes_for_aligned_singlet():
    assert branch_density(PhasePoint(0.1, -0.2, 0), (1, 1), state()) == 0.0


def test_branch_density_outside_support():
    assert branch_density(PhasePoint(3, 3, 0.1), (1, -1), state()) == 0.0


def test_equilibrium_uniform_at_start():
    st = state(0.7)
    x = np.linspace(-0.49, 0.49, 7)
    np.testing.assert_allclose(equilibrium_density(x, x[::-1], 0.0, st), 1.0)
    assert equilibrium_density(1.0, 1.0, 0.0, st) == 0.0


def test_half_open_support():
    pk = PacketSpec()
    assert pk.inside(-0.5) and not pk.inside(0.5)


@pytest.mark.parametrize("t", [0.0, 0.3, 0.75, 2.0])
def test_equilibrium_normalized(t):
    st = state(1.1, CouplingProfile(1.0, 2.0))
    m = 1200
    lo, hi = -0.5 - 2.0 * t, 0.5 + 2.0 * t
    g = lo + (np.arange(m) + 0.5) * (hi - lo) / m
    X, Y = np.meshgrid(g, g)
    total = equilibrium_density(X, Y, t, st).sum() * ((hi - lo) / m) ** 2
    assert total == pytest.approx(1.0, abs=1e-2)


def test_separated_branches_carry_weights():
    st = state(math.pi / 2)
    for (i, j), w in zip([(1, 1), (1, -1), (-1, 1), (-1, -1)], st.amplitudes.weights()):
        assert equilibrium_density(i * 5.0, j * 5.0, 5.0, st) == pytest.approx(w)


def test_velocity_at_rest_in_overlap():
    assert velocity(PhasePoint(0.0, 0.0, 0.1), state()) == (0.0, 0.0)


def test_velocity_single_branch():
    # at t = 0.4 the point (0.7, -0.7) is only inside psi_{+-}
    assert velocity(PhasePoint(0.7, -0.7, 0.4), state()) == (1.0, -1.0)


@pytest.mark.parametrize("delta", [0.3, math.pi / 3, 2.0])
def test_velocity_tilted_two_branch_overlap(delta):
    # right of both A- packets, inside the A+ branches where ++ and +- overlap
    v = velocity(PhasePoint(0.45, 0.0, 0.1), state(delta))
    assert v[0] == pytest.approx(1.0)
    assert v[1] == pytest.approx(-math.cos(delta))


def test_velocity_undefined_outside():
    with pytest.raises(UndefinedVelocityError):
        velocity(PhasePoint(5.0, 5.0, 0.0), state())


def test_velocity_global_phase_invariant():
    st = state(1.0)
    rot = BranchState(type(st.amplitudes).from_array(np.exp(0.7j) * np.array(list(st.amplitudes))))
    p = PhasePoint(0.2, -0.1, 0.15)
    assert velocity(p, st) == pytest.approx(velocity(p, rot))


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        equilibrium_density(0.0, 0.0, -1.0, state())


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_coupling_validation(bad):
    with pytest.raises(ValueError, match="a_A"):
        CouplingProfile(bad, 1.0)


def test_packet_validation():
    with pytest.raises(ValueError, match="packet.width"):
        PacketSpec(-1.0)


def test_single_spin_velocities():
    r = np.linspace(-0.45, 0.45, 10)
    np.testing.assert_allclose(single_spin_velocity(r, 0.0, "z+", 0.0, 2.0), 2.0)
    np.testing.assert_allclose(single_spin_velocity(r, 0.0, "z+", math.pi, 2.0), -2.0)
    assert single_spin_velocity(0.0, 0.1, "x+", 0.0) == pytest.approx(0.0)


def test_single_spin_undefined_outside():
    with pytest.raises(UndefinedVelocityError):
        single_spin_velocity(3.0, 0.0, "x+", 0.0)
