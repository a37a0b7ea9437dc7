"""Convex polygon helpers used for exact region areas.

Polygons are (k, 2) float arrays of vertices in counter-clockwise order.
Half-planes are coefficient triples ``c`` meaning c[0]*x + c[1]*y + c[2] <= 0.
"""
from __future__ import annotations

import numpy as np

AREA_EPS = 1e-18


def rectangle(x0: float, x1: float, y0: float, y1: float) -> np.ndarray:
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def area(poly: np.ndarray) -> float:
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def centroid(poly: np.ndarray) -> np.ndarray:
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if abs(a) < AREA_EPS:
        return poly.mean(axis=0)
    return np.array([((x + xn) * cross).sum(), ((y + yn) * cross).sum()]) / (6.0 * a)


def clip_halfplane(poly: np.ndarray, c) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon to c . (x, y, 1) <= 0."""
    if len(poly) == 0:
        return poly
    c = np.asarray(c, dtype=float)
    vals = poly @ c[:2] + c[2]
    # scale-aware tolerance so near-tangent planes do not create slivers
    tol = 1e-13 * (np.abs(c[:2]).sum() * (np.abs(poly).max() + 1.0) + abs(c[2]))
    if np.all(vals <= tol):
        return poly
    if np.all(vals >= -tol):
        return poly[:0]
    out = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        vp, vq = vals[k], vals[(k + 1) % n]
        if vp <= 0:
            out.append(p)
        if (vp < 0 < vq) or (vq < 0 < vp):
            s = vp / (vp - vq)
            out.append(p + s * (q - p))
    return dedupe(np.array(out)) if out else poly[:0]


def dedupe(poly: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Drop vertices closer than ``rtol * scale`` to their predecessor."""
    if len(poly) < 2:
        return poly
    scale = np.abs(poly).max() + 1.0
    step = np.abs(poly - np.roll(poly, 1, axis=0)).max(axis=1)
    keep = step > rtol * scale
    if not keep.any():
        return poly[:1]
    return poly[keep]


def clip_convex(poly: np.ndarray, clipper: np.ndarray) -> np.ndarray:
    """Intersection of two convex CCW polygons."""
    out = poly
    n = len(clipper)
    for k in range(n):
        if len(out) == 0:
            break
        p, q = clipper[k], clipper[(k + 1) % n]
        if np.abs(q - p).max() <= 1e-12 * (np.abs(clipper).max() + 1.0):
            continue  # a degenerate edge carries no direction
        # left of edge p->q is inside for CCW order: cross(q - p, x - p) >= 0
        ex, ey = q - p
        out = clip_halfplane(out, (ey, -ex, -(ey * p[0] - ex * p[1])))
    return out


def integrate_linear(poly: np.ndarray, coef) -> float:
    """Integral of coef[0]*x + coef[1]*y + coef[2] over the polygon."""
    a = area(poly)
    if a <= 0:
        return 0.0
    cx, cy = centroid(poly)
    return a * (coef[0] * cx + coef[1] * cy + coef[2])
