"""Distributions of hidden variables over the initial square and quadrature.

Three integration methods are supported for region masses:

``MonteCarlo(n, seed)``
    i.i.d. samples; error is the binomial standard error.
``Grid(m)``
    midpoint rule on m x m cells; error is the mass of cells that straddle
    the indicator boundary (a perimeter/m style bound).
``Exact()``
    convex-polygon regions integrated in closed form (used by the
    nonlocality layer with polygon outcome partitions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry
from .packets import PacketSpec

KINDS = (
    "equilibrium-uniform",
    "sub-rectangle-uniform",
    "half-square",
    "quadrant",
    "linear-tilt",
    "grid-weights",
    "point-mass",
)
NORM_TOL = 1e-9
SAMPLE_CHUNK = 1 << 16


@dataclass(frozen=True)
class MonteCarlo:
    n: int = 10**6
    seed: int = 42

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("method.n must be >= 1")


@dataclass(frozen=True)
class Grid:
    m: int = 1000

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("method.m must be >= 1")


@dataclass(frozen=True)
class Exact:
    pass


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float

    def __iter__(self):
        return iter((self.value, self.error))

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class SampleStream:
    seed: int
    count: int
    r_A: np.ndarray = field(repr=False)
    r_B: np.ndarray = field(repr=False)


class EnsembleDistribution:
    """Immutable probability density on the initial square of a packet.

    Build instances with the module-level constructors
    (:func:`equilibrium_distribution`, :func:`half_square`, ...).
    """

    def __init__(self, kind: str, packet: PacketSpec = PacketSpec(), **params):
        if kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {kind!r}")
        self.kind = kind
        self.packet = packet
        self.params = dict(params)
        h = packet.half
        if kind == "equilibrium-uniform":
            self._rect = (-h, h, -h, h)
        elif kind == "sub-rectangle-uniform":
            x0, x1, y0, y1 = (float(params[k]) for k in ("x0", "x1", "y0", "y1"))
            if not (-h <= x0 < x1 <= h and -h <= y0 < y1 <= h):
                raise ValueError("sub-rectangle must be a nonempty subset of the initial square")
            self._rect = (x0, x1, y0, y1)
        elif kind == "half-square":
            side = params.get("side", "right")
            rects = {"right": (0, h, -h, h), "left": (-h, 0, -h, h), "top": (-h, h, 0, h), "bottom": (-h, h, -h, 0)}
            if side not in rects:
                raise ValueError(f"unknown half-square side {side!r}")
            self._rect = rects[side]
        elif kind == "quadrant":
            sa, sb = int(params.get("sign_A", 1)), int(params.get("sign_B", 1))
            if sa not in (1, -1) or sb not in (1, -1):
                raise ValueError("quadrant signs must be +1 or -1")
            xs = (0, h) if sa > 0 else (-h, 0)
            ys = (0, h) if sb > 0 else (-h, 0)
            self._rect = xs + ys
        elif kind == "linear-tilt":
            c = float(params.get("c", 0.0))
            if abs(c) > 2.0 / packet.width + 1e-15:
                raise ValueError(f"linear-tilt slope |c| must be <= 2/width, got {c!r}")
            self._c = c
        elif kind == "grid-weights":
            w = np.asarray(params["weights"], dtype=float)
            if w.ndim != 2 or w.shape[0] != w.shape[1]:
                raise ValueError("grid weights must be a square m x m array")
            if np.any(w < 0) or not np.isfinite(w).all():
                raise ValueError("grid weights must be finite and nonnegative")
            total = w.sum()
            if total <= 0:
                raise ValueError("grid weights are not normalizable")
            self._w = w / total
            self.params["weights"] = self._w
        elif kind == "point-mass":
            x, y = float(params["r_A"]), float(params["r_B"])
            if not (-h <= x < h and -h <= y < h):
                raise ValueError("point mass must lie in the initial square")
            self._pt = (x, y)

    def __repr__(self):
        shown = {k: v for k, v in self.params.items() if k != "weights"}
        return f"EnsembleDistribution({self.kind!r}, width={self.packet.width}, {shown})"

    @property
    def is_equilibrium(self) -> bool:
        return self.kind == "equilibrium-uniform" or (self.kind == "linear-tilt" and self._c == 0.0)

    # -- density ------------------------------------------------------------

    def density(self, r_A, r_B):
        """Point-wise density (the point mass has no density; returns NaN)."""
        r_A, r_B = np.broadcast_arrays(np.asarray(r_A, dtype=float), np.asarray(r_B, dtype=float))
        h, width = self.packet.half, self.packet.width
        inside = (r_A >= -h) & (r_A < h) & (r_B >= -h) & (r_B < h)
        if hasattr(self, "_rect"):
            x0, x1, y0, y1 = self._rect
            in_rect = (r_A >= x0) & (r_A < x1) & (r_B >= y0) & (r_B < y1)
            return np.where(in_rect, 1.0 / ((x1 - x0) * (y1 - y0)), 0.0)
        if self.kind == "linear-tilt":
            return np.where(inside, (1.0 + self._c * r_A) / width**2, 0.0)
        if self.kind == "grid-weights":
            m = self._w.shape[0]
            col = np.clip(np.floor((r_A + h) / width * m).astype(int), 0, m - 1)
            row = np.clip(np.floor((r_B + h) / width * m).astype(int), 0, m - 1)
            return np.where(inside, self._w[row, col] * (m / width) ** 2, 0.0)
        return np.full(r_A.shape, np.nan)

    # -- quadrature ---------------------------------------------------------

    def grid_points(self, m: int):
        """Midpoints and normalized weights for an m x m midpoint rule."""
        if self.kind == "point-mass":
            return np.array([self._pt[0]]), np.array([self._pt[1]]), np.array([1.0])
        h, width = self.packet.half, self.packet.width
        g = -h + (np.arange(m) + 0.5) * width / m
        X, Y = np.meshgrid(g, g)
        if self.kind == "grid-weights" and self._w.shape[0] == m:
            wts = self._w.copy()
        else:
            wts = self.density(X, Y)
        total = wts.sum()
        if total <= 0:
            raise ValueError(f"grid m={m} does not resolve the support of {self!r}")
        return X, Y, wts / total

    def polygon_mass(self, poly: np.ndarray) -> float:
        """Exact probability of a convex polygon (point mass: not supported)."""
        if len(poly) < 3:
            return 0.0
        width = self.packet.width
        if hasattr(self, "_rect"):
            x0, x1, y0, y1 = self._rect
            clipped = geometry.clip_convex(poly, geometry.rectangle(x0, x1, y0, y1))
            return geometry.area(clipped) / ((x1 - x0) * (y1 - y0)) if len(clipped) >= 3 else 0.0
        if self.kind == "linear-tilt":
            return geometry.integrate_linear(poly, (self._c, 0.0, 1.0)) / width**2
        if self.kind == "grid-weights":
            m = self._w.shape[0]
            h = self.packet.half
            cell = width / m
            lo, hi = poly.min(axis=0), poly.max(axis=0)
            c0, c1 = max(int((lo[0] + h) // cell), 0), min(int((hi[0] + h) // cell) + 1, m)
            r0, r1 = max(int((lo[1] + h) // cell), 0), min(int((hi[1] + h) // cell) + 1, m)
            total = 0.0
            for row in range(r0, r1):
                for col in range(c0, c1):
                    wt = self._w[row, col]
                    if wt == 0:
                        continue
                    rect = geometry.rectangle(-h + col * cell, -h + (col + 1) * cell, -h + row * cell, -h + (row + 1) * cell)
                    piece = geometry.clip_convex(poly, rect)
                    if len(piece) >= 3:
                        total += wt * geometry.area(piece) / cell**2
            return total
        raise NotImplementedError(f"exact polygon mass is not defined for {self.kind}")

    def contains_point_mass(self, poly: np.ndarray) -> bool:
        x, y = self._pt
        n = len(poly)
        for k in range(n):
            p, q = poly[k], poly[(k + 1) % n]
            if (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]) < 0:
                return False
        return True

    # -- sampling -----------------------------------------------------------

    def _draw(self, rng: np.random.Generator, n: int):
        h, width = self.packet.half, self.packet.width
        if hasattr(self, "_rect"):
            x0, x1, y0, y1 = self._rect
            u = rng.random((2, n))
            return x0 + (x1 - x0) * u[0], y0 + (y1 - y0) * u[1]
        if self.kind == "linear-tilt":
            u = rng.random((2, n))
            c = self._c
            if c == 0.0:
                x = -h + width * u[0]
            else:
                # invert F(x) = (x + h + c (x^2 - h^2) / 2) / width
                a2, b = c / 2, 1.0
                cst = h - c * h * h / 2 - width * u[0]
                disc = np.maximum(b * b - 4 * a2 * cst, 0.0)
                x = (-b + np.sqrt(disc)) / (2 * a2)
                x = np.clip(x, -h, np.nextafter(h, -np.inf))
            return x, -h + width * u[1]
        if self.kind == "grid-weights":
            m = self._w.shape[0]
            cell = width / m
            flat = np.cumsum(self._w.ravel())
            idx = np.searchsorted(flat, rng.random(n) * flat[-1], side="right")
            idx = np.minimum(idx, m * m - 1)
            row, col = np.divmod(idx, m)
            u = rng.random((2, n))
            return -h + (col + u[0]) * cell, -h + (row + u[1]) * cell
        return np.full(n, self._pt[0]), np.full(n, self._pt[1])


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, chunk])))


def sample(dist: EnsembleDistribution, seed: int, n: int) -> SampleStream:
    """Draw ``n`` reproducible samples.

    Sample ``i`` comes from the counter-based stream for chunk
    ``i // SAMPLE_CHUNK`` of ``seed``, so it does not depend on ``n`` or on
    the order in which chunks are generated.
    """
    if n < 1:
        raise ValueError("sample count must be >= 1")
    xs, ys = [], []
    for chunk in range(-(-n // SAMPLE_CHUNK)):
        k = min(SAMPLE_CHUNK, n - chunk * SAMPLE_CHUNK)
        x, y = dist._draw(_chunk_rng(seed, chunk), SAMPLE_CHUNK)
        xs.append(x[:k])
        ys.append(y[:k])
    return SampleStream(seed, n, np.concatenate(xs), np.concatenate(ys))


# -- constructors ---------------------------------------------------------------


def equilibrium_distribution(packet: PacketSpec = PacketSpec()) -> EnsembleDistribution:
    return EnsembleDistribution("equilibrium-uniform", packet)


def sub_rectangle(x0, x1, y0, y1, packet: PacketSpec = PacketSpec()) -> EnsembleDistribution:
    return EnsembleDistribution("sub-rectangle-uniform", packet, x0=x0, x1=x1, y0=y0, y1=y1)


def half_square(side: str = "right", packet: PacketSpec = PacketSpec()) -> EnsembleDistribution:
    return EnsembleDistribution("half-square", packet, side=side)


def quadrant(sign_A: int = 1, sign_B: int = 1, packet: PacketSpec = PacketSpec()) -> EnsembleDistribution:
    return EnsembleDistribution("quadrant", packet, sign_A=sign_A, sign_B=sign_B)


def linear_tilt(c: float, packet: PacketSpec = PacketSpec()) -> EnsembleDistribution:
    return EnsembleDistribution("linear-tilt", packet, c=c)


def grid_weights(weights, packet: PacketSpec = PacketSpec()) -> EnsembleDistribution:
    return EnsembleDistribution("grid-weights", packet, weights=weights)


def point_mass(r_A: float, r_B: float, packet: PacketSpec = PacketSpec()) -> EnsembleDistribution:
    return EnsembleDistribution("point-mass", packet, r_A=r_A, r_B=r_B)


def make_distribution(kind: str, packet: PacketSpec = PacketSpec(), **params) -> EnsembleDistribution:
    return EnsembleDistribution(kind, packet, **params)


def read_grid_weights(path, packet: PacketSpec | None = None) -> EnsembleDistribution:
    """Load a grid-weights file.

    Format: a header line ``m rows cols width`` (rows == cols == m) followed
    by m*m nonnegative weights in row-major order, row 0 at the lowest r_B
    and column 0 at the lowest r_A. Weights are normalized on load.
    """
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 4:
        raise ValueError(f"{path}: missing header 'm rows cols width'")
    m, rows, cols = (int(tok) for tok in tokens[:3])
    width = float(tokens[3])
    if rows != m or cols != m:
        raise ValueError(f"{path}: expected an m x m grid, header says {rows} x {cols} with m={m}")
    values = np.array([float(tok) for tok in tokens[4:]])
    if values.size != m * m:
        raise ValueError(f"{path}: expected {m * m} weights, found {values.size}")
    if packet is None:
        packet = PacketSpec(width)
    elif not math.isclose(packet.width, width):
        raise ValueError(f"{path}: width {width} does not match packet width {packet.width}")
    return grid_weights(values.reshape(m, m), packet)


def write_grid_weights(path, dist: EnsembleDistribution) -> None:
    w = dist.params["weights"]
    m = w.shape[0]
    with open(path, "w") as fh:
        fh.write(f"{m} {m} {m} {dist.packet.width!r}\n")
        for row in w:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


# -- region fractions -------------------------------------------------------


def _boundary_cells(ind: np.ndarray) -> np.ndarray:
    edge = np.zeros(ind.shape, dtype=bool)
    dx = ind[:, 1:] != ind[:, :-1]
    dy = ind[1:, :] != ind[:-1, :]
    edge[:, 1:] |= dx
    edge[:, :-1] |= dx
    edge[1:, :] |= dy
    edge[:-1, :] |= dy
    return edge


def region_fraction(dist: EnsembleDistribution, indicator: Callable, method=Grid()) -> Estimate:
    """Probability of ``{lambda : indicator(r_A, r_B)}`` under ``dist``.

    ``indicator`` must be vectorised: it receives two arrays and returns a
    boolean array of the same shape.
    """
    if isinstance(method, MonteCarlo):
        s = sample(dist, method.seed, method.n)
        hits = np.asarray(indicator(s.r_A, s.r_B), dtype=bool)
        p = hits.mean()
        return Estimate(float(p), float(math.sqrt(p * (1 - p) / method.n)))
    if isinstance(method, Grid):
        X, Y, wts = dist.grid_points(method.m)
        hits = np.asarray(indicator(X, Y), dtype=bool)
        value = float((wts * hits).sum())
        if dist.kind == "point-mass":
            return Estimate(value, 0.0)
        return Estimate(value, float(wts[_boundary_cells(hits)].sum()))
    if isinstance(method, Exact):
        if dist.kind == "point-mass":
            x, y = dist._pt
            return Estimate(float(bool(np.asarray(indicator(np.array([x]), np.array([y])))[0])), 0.0)
        raise TypeError("exact fractions need polygon regions; use the nonlocality layer")
    raise TypeError(f"unknown method {method!r}")
