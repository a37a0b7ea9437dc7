import math

import numpy as np
import pytest

from pilotnonlocal import MeasurementSettings, PerturbationParams, SpinAmplitudes, canonicalize_angle, perturbed_singlet, singlet_amplitudes

R2 = 1 / math.sqrt(2)


def amps(tA, tB, mode="von-neumann"):
    return np.array(list(singlet_amplitudes(MeasurementSettings(tA, tB, mode))))


def test_singlet_aligned():
    np.testing.assert_allclose(amps(0, 0), [0, R2, -R2, 0], atol=1e-15)


def test_singlet_quarter_turn():
    np.testing.assert_allclose(amps(0, math.pi / 2), [0.5, 0.5, -0.5, 0.5], atol=1e-15)


@pytest.mark.parametrize("theta", [-2.0, 0.3, math.pi, 7.1])
def test_singlet_equal_angles(theta):
    np.testing.assert_allclose(amps(theta, theta), [0, R2, -R2, 0], atol=1e-15)


def test_singlet_depends_on_difference_only():
    assert singlet_amplitudes(MeasurementSettings(0.4, 1.7)) == singlet_amplitudes(MeasurementSettings(0.0, 1.7 - 0.4))


@pytest.mark.parametrize("delta", np.linspace(-math.pi, math.pi, 13))
def test_correlation_is_minus_cos(delta):
    a = singlet_amplitudes(MeasurementSettings(0.0, delta))
    assert a.correlation() == pytest.approx(-math.cos(delta), abs=1e-12)


def test_amplitudes_reject_bad_norm():
    with pytest.raises(ValueError):
        SpinAmplitudes(1, 1, 0, 0)


def test_zero_perturbation_is_singlet_bitwise():
    for tA, tB in [(0, 0), (0.2, 1.3), (0, math.pi)]:
        s = MeasurementSettings(tA, tB)
        assert perturbed_singlet(PerturbationParams(), s) == singlet_amplitudes(s)


def test_epsilon_from_constraint():
    x = 0.05 / (2 * math.sqrt(2))
    assert PerturbationParams(eps_pm=x, eps_mp=x).epsilon == pytest.approx(0.05, abs=1e-15)


def test_perturbed_aligned_basis():
    p = PerturbationParams(0.01, 0.02, 0.02, 0.03)
    a = np.array(list(perturbed_singlet(p, MeasurementSettings(0, 0))))
    raw = np.array([0.01, R2 + 0.02, -R2 + 0.02, 0.03])
    np.testing.assert_allclose(a, raw / np.linalg.norm(raw), atol=1e-14)


def test_perturbed_reversed_basis_matches_primed_amplitudes():
    p = PerturbationParams(0.01, 0.02, 0.02, 0.03)
    a = np.array(list(perturbed_singlet(p, MeasurementSettings(0, math.pi))))
    raw = np.array([R2 + 0.02, -0.01, 0.03, R2 - 0.02])
    np.testing.assert_allclose(a, raw / np.linalg.norm(raw), atol=1e-14)


def test_perturbed_reversed_basis_cross_terms_vanish():
    p = PerturbationParams.from_epsilon(0.1)
    a = perturbed_singlet(p, MeasurementSettings(0, math.pi))
    assert abs(a.a_pm) < 1e-15 and abs(a.a_mp) < 1e-15


@pytest.mark.parametrize("kw", [{"eps_pp": 0.3}, {"eps_pm": 0.1, "eps_mp": 0.2}, {"eps_mm": float("nan")}])
def test_perturbation_rejected(kw):
    with pytest.raises(ValueError):
        PerturbationParams(**kw)


@pytest.mark.parametrize(
    "theta, mode, expected",
    [
        (math.pi, "stern-gerlach", 0.0),
        (math.pi, "von-neumann", math.pi),
        (3 * math.pi / 4, "stern-gerlach", -math.pi / 4),
        (math.pi / 2, "stern-gerlach", math.pi / 2),
        (-math.pi / 2, "stern-gerlach", math.pi / 2),
    ],
)
def test_canonicalize(theta, mode, expected):
    assert canonicalize_angle(theta, mode) == pytest.approx(expected, abs=1e-15)


def test_canonicalize_rejects_infinite():
    with pytest.raises(ValueError):
        canonicalize_angle(math.inf)


def test_stern_gerlach_identifies_pi_shift():
    sg = singlet_amplitudes(MeasurementSettings(0.0, math.pi, "stern-gerlach"))
    assert sg == singlet_amplitudes(MeasurementSettings(0.0, 0.0))
    vn = singlet_amplitudes(MeasurementSettings(0.0, math.pi))
    assert vn != sg
