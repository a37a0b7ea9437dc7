import math

import numpy as np
import pytest
from scipy import stats

from pilotnonlocal import (
    Exact,
    Grid,
    MonteCarlo,
    PacketSpec,
    equilibrium_distribution,
    grid_weights,
    half_square,
    linear_tilt,
    point_mass,
    quadrant,
    read_grid_weights,
    region_fraction,
    sample,
    sub_rectangle,
    write_grid_weights,
)
from pilotnonlocal.ensemble import EnsembleDistribution


def test_equilibrium_density_and_halves():
    d = equilibrium_distribution()
    assert d.density(0.1, -0.3) == 1.0
    assert region_fraction(d, lambda x, y: x > 0, Grid(100)).value == pytest.approx(0.5)
    assert region_fraction(d, lambda x, y: (x > 0) & (y > 0), Grid(100)).value == pytest.approx(0.25)


def test_equilibrium_width_two():
    d = equilibrium_distribution(PacketSpec(2.0))
    assert d.density(0.9, 0.9) == pytest.approx(0.25)
    assert d.density(1.0, 0.0) == 0.0


def test_quadrant_masses_monte_carlo():
    s = sample(equilibrium_distribution(), 42, 10**6)
    for sx in (1, -1):
        for sy in (1, -1):
            p = np.mean((np.sign(s.r_A) == sx) & (np.sign(s.r_B) == sy))
            assert abs(p - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 10**6)


def test_point_mass_samples():
    s = sample(point_mass(0.1, -0.2), 1, 100)
    assert np.all(s.r_A == 0.1) and np.all(s.r_B == -0.2)


def test_half_square_sampling():
    s = sample(half_square("right"), 3, 10**6)
    assert np.mean(s.r_A < 0) == 0.0


def test_reproducible_and_chunk_independent():
    a = sample(equilibrium_distribution(), 9, 70000)
    b = sample(equilibrium_distribution(), 9, 70000)
    c = sample(equilibrium_distribution(), 9, 100000)
    np.testing.assert_array_equal(a.r_A, b.r_A)
    np.testing.assert_array_equal(a.r_A, c.r_A[:70000])
    assert not np.array_equal(a.r_A, sample(equilibrium_distribution(), 10, 70000).r_A)


@pytest.mark.parametrize(
    "dist",
    [
        equilibrium_distribution(),
        sub_rectangle(-0.3, 0.2, -0.5, 0.1),
        quadrant(-1, 1),
        linear_tilt(1.5),
        linear_tilt(-2.0),
        grid_weights(np.arange(1, 17, dtype=float).reshape(4, 4)),
    ],
    ids=lambda d: d.kind,
)
def test_sampling_chi_square(dist):
    s = sample(dist, 123, 10**5)
    edges = np.linspace(-0.5, 0.5, 11)
    counts, _, _ = np.histogram2d(s.r_A, s.r_B, bins=[edges, edges])
    # expected cell masses by fine midpoint quadrature of the density
    g = np.linspace(-0.5, 0.5, 401)
    mid = 0.5 * (g[1:] + g[:-1])
    X, Y = np.meshgrid(mid, mid, indexing="ij")
    dens = dist.density(X, Y) / 400**2
    exp = dens.reshape(10, 40, 10, 40).sum(axis=(1, 3)) * 10**5
    keep = exp > 0
    assert counts[~keep].sum() == 0
    chi2 = ((counts[keep] - exp[keep]) ** 2 / exp[keep]).sum()
    assert stats.chi2.sf(chi2, keep.sum() - 1) > 1e-3


@pytest.mark.parametrize(
    "dist",
    [equilibrium_distribution(), half_square("top"), linear_tilt(1.0), sub_rectangle(-0.5, 0.0, -0.2, 0.3)],
    ids=lambda d: d.kind,
)
def test_normalized(dist):
    _, _, w = dist.grid_points(500)
    assert w.sum() == pytest.approx(1.0, abs=1e-9)
    g = -0.5 + (np.arange(2000) + 0.5) / 2000
    X, Y = np.meshgrid(g, g)
    assert dist.density(X, Y).sum() / 2000**2 == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "kind, params",
    [
        ("linear-tilt", {"c": 3.0}),
        ("sub-rectangle-uniform", {"x0": 0.2, "x1": 0.1, "y0": 0, "y1": 0.1}),
        ("quadrant", {"sign_A": 2}),
        ("grid-weights", {"weights": np.zeros((3, 3))}),
        ("point-mass", {"r_A": 0.5, "r_B": 0.0}),
        ("bogus", {}),
    ],
)
def test_invalid_parameters(kind, params):
    with pytest.raises(ValueError):
        EnsembleDistribution(kind, PacketSpec(), **params)


def test_grid_weights_file_roundtrip(tmp_path):
    w = np.arange(9, dtype=float).reshape(3, 3)
    path = tmp_path / "w.txt"
    write_grid_weights(path, grid_weights(w))
    d = read_grid_weights(path)
    np.testing.assert_allclose(d.params["weights"], w / w.sum())
    assert d.packet.width == 1.0


def test_grid_weights_bad_header(tmp_path):
    path = tmp_path / "w.txt"
    path.write_text("3 2 3 1.0\n" + " ".join(["1"] * 9))
    with pytest.raises(ValueError, match="m x m"):
        read_grid_weights(path)


def test_grid_weights_orientation():
    w = np.zeros((2, 2))
    w[1, 0] = 1.0  # row 1 = upper half in r_B, column 0 = left half in r_A
    d = grid_weights(w)
    assert d.density(-0.25, 0.25) == pytest.approx(4.0)
    assert d.density(0.25, -0.25) == 0.0


def test_region_fraction_methods_agree():
    rng = np.random.default_rng(0)
    dists = [equilibrium_distribution(), linear_tilt(1.2), half_square("left"), quadrant(1, -1)]
    for k in range(20):
        dist = dists[k % len(dists)]
        a, b, c = rng.normal(size=3)
        ind = lambda x, y: a * x + b * y + 0.2 * c > 0  # noqa: E731
        mc = region_fraction(dist, ind, MonteCarlo(2 * 10**5, k))
        gr = region_fraction(dist, ind, Grid(400))
        assert abs(mc.value - gr.value) <= 3 * mc.error + gr.error + 1e-12


def test_region_fraction_point_mass():
    d = point_mass(0.1, 0.2)
    assert region_fraction(d, lambda x, y: x > y, Grid(10)).value == 0.0
    assert region_fraction(d, lambda x, y: x < y, Exact()).value == 1.0


def test_linear_tilt_exact_mass():
    from pilotnonlocal.geometry import rectangle

    d = linear_tilt(2.0)
    # integral of (1 + 2x) over the right half
    assert d.polygon_mass(rectangle(0, 0.5, -0.5, 0.5)) == pytest.approx(0.5 + 0.25)
