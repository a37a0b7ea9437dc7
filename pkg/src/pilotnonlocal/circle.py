"""Toy hidden-variable model on the unit disc.

The hidden variable is (p, q) with p^2 + q^2 <= 1. Before the distant
shift, sigma_A = +1 on the right of the vertical diameter (p > 0). The shift
rotates the dividing diameter by ``gamma`` about the origin; afterwards
sigma_A = +1 where p cos(gamma) + q sin(gamma) > 0. We take gamma equal to
the setting shift theta_B' - theta_B.

Equilibrium is the uniform disc measure, for which each transition wedge
has mass |gamma| / (2 pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ensemble import Estimate, Grid, MonteCarlo, _chunk_rng


@dataclass(frozen=True)
class DiscDistribution:
    """Density on the unit disc, given up to normalization.

    ``kind`` is ``uniform``, ``upper-half`` or ``custom`` (with ``density``
    a vectorised callable of (p, q)).
    """

    kind: str = "uniform"
    density: Callable | None = None

    def weight(self, p, q):
        inside = p * p + q * q <= 1.0
        if self.kind == "uniform":
            return inside.astype(float)
        if self.kind == "upper-half":
            return (inside & (q > 0)).astype(float)
        if self.kind == "custom":
            return np.where(inside, np.asarray(self.density(p, q), dtype=float), 0.0)
        raise ValueError(f"unknown disc distribution {self.kind!r}")

    def sample(self, seed: int, n: int):
        """Rejection sampling from the bounding square."""
        out_p, out_q = [], []
        got, chunk = 0, 0
        wmax = None
        while got < n:
            rng = _chunk_rng(seed, chunk)
            chunk += 1
            p, q = rng.uniform(-1, 1, (2, 1 << 16))
            u = rng.random(1 << 16)
            w = self.weight(p, q)
            if wmax is None:
                wmax = w.max() if self.kind == "custom" else 1.0
                if wmax <= 0:
                    raise ValueError("disc density vanishes on the sample probe")
            keep = u * wmax < w
            out_p.append(p[keep])
            out_q.append(q[keep])
            got += int(keep.sum())
        return np.concatenate(out_p)[:n], np.concatenate(out_q)[:n]


@dataclass(frozen=True)
class CircleReport:
    gamma: float
    p_plus_before: Estimate
    p_plus_after: Estimate
    nu_plus_minus: Estimate
    nu_minus_plus: Estimate

    @property
    def ratio_before(self) -> float:
        """Ratio of +1 to -1 outcomes before the rotation."""
        p = self.p_plus_before.value
        return p / (1 - p) if p < 1 else math.inf

    @property
    def ratio_after(self) -> float:
        p = self.p_plus_after.value
        return p / (1 - p) if p < 1 else math.inf

    @property
    def alpha(self) -> float:
        return self.nu_plus_minus.value + self.nu_minus_plus.value

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "gamma_convention": "chord rotation = theta_B' - theta_B",
                "p_plus_before": self.p_plus_before.value, "p_plus_after": self.p_plus_after.value,
                "ratio_before": self.ratio_before, "ratio_after": self.ratio_after,
                "nu_plus_minus": self.nu_plus_minus.value, "nu_plus_minus_err": self.nu_plus_minus.error,
                "nu_minus_plus": self.nu_minus_plus.value, "nu_minus_plus_err": self.nu_minus_plus.error,
                "alpha": self.alpha}


def sigma_A(p, q, gamma: float = 0.0):
    return np.where(p * math.cos(gamma) + q * math.sin(gamma) > 0, 1, -1)


def wedge_fraction(gamma: float) -> float:
    """Uniform-disc mass of one transition wedge."""
    return abs(gamma) / (2 * math.pi)


def circle_model_run(gamma: float, dist: DiscDistribution = DiscDistribution(), method=Grid(1000)) -> CircleReport:
    if abs(gamma) > math.pi:
        raise ValueError("chord rotation must satisfy |gamma| <= pi")
    if isinstance(method, MonteCarlo):
        p, q = dist.sample(method.seed, method.n)
        w = np.full(p.size, 1.0 / p.size)
        n = p.size
    elif isinstance(method, Grid):
        g = -1 + (np.arange(method.m) + 0.5) * 2.0 / method.m
        p, q = np.meshgrid(g, g)
        w = dist.weight(p, q)
        w = w / w.sum()
        n = None
    else:
        raise TypeError(f"unsupported method {method!r}")
    s0, s1 = sigma_A(p, q), sigma_A(p, q, gamma)

    def est(ind):
        v = float((w * ind).sum())
        if n is not None:
            return Estimate(v, math.sqrt(v * (1 - v) / n))
        # cells cut by a dividing line: about 2 m cells per diameter
        return Estimate(v, 4.0 / method.m)

    return CircleReport(gamma, est(s0 > 0), est(s1 > 0), est((s0 > 0) & (s1 < 0)), est((s0 < 0) & (s1 > 0)))
