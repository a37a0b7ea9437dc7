import numpy as np
import pytest

from pilotnonlocal import geometry as g


def test_area_and_centroid():
    sq = g.rectangle(0, 2, 0, 1)
    assert g.area(sq) == 2.0
    np.testing.assert_allclose(g.centroid(sq), [1.0, 0.5])


def test_clip_halfplane():
    sq = g.rectangle(-1, 1, -1, 1)
    half = g.clip_halfplane(sq, (1.0, 0.0, 0.0))  # x <= 0
    assert g.area(half) == pytest.approx(2.0)
    tri = g.clip_halfplane(sq, (-1.0, 1.0, 0.0))  # y <= x
    assert g.area(tri) == pytest.approx(2.0)
    assert len(g.clip_halfplane(sq, (1.0, 0.0, 5.0))) == 0


def test_clip_convex():
    a = g.rectangle(0, 2, 0, 2)
    b = g.rectangle(1, 3, 1, 3)
    assert g.area(g.clip_convex(a, b)) == pytest.approx(1.0)


def test_integrate_linear():
    sq = g.rectangle(0, 1, 0, 1)
    assert g.integrate_linear(sq, (2.0, 0.0, 1.0)) == pytest.approx(2.0)


def test_clip_ignores_degenerate_clipper_edge():
    tri = np.array([[-0.5, -0.5], [0.5, -0.5], [-0.01999200319872058, 0.01999200319872052]])
    quad = np.array([[-0.5, -0.5], [-0.01999200319872063, -0.5],
                     [-0.01999200319872063, 0.0], [-0.01999200319872058, 0.0]])
    assert g.area(g.clip_convex(tri, quad)) == pytest.approx(g.area(g.clip_convex(quad, tri)), abs=1e-12)
    assert g.area(g.clip_convex(tri, quad)) > 0.1
