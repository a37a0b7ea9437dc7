"""Outcome statistics, transition sets and degrees of nonlocality.

One engine serves alpha, beta and beta-tilde: pick the wing whose outcome
is compared and the wing whose setting is shifted.

========  =================  ===============
quantity  compared outcome   shifted setting
========  =================  ===============
alpha     A                  theta_B
beta      B                  theta_A
beta~     B                  theta_B
alpha~    A                  theta_A
========  =================  ===============
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import geometry
from .ensemble import (
    EnsembleDistribution,
    Estimate,
    Exact,
    Grid,
    MonteCarlo,
    equilibrium_distribution,
    sample,
    _boundary_cells,
)
from .packets import CouplingProfile, PacketSpec
from .spin_state import (
    VON_NEUMANN,
    MeasurementSettings,
    PerturbationParams,
    SpinAmplitudes,
    perturbed_singlet,
    singlet_amplitudes,
)
from .trajectory import outcome_map, outcome_partition

WINGS = ("A", "B")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything besides the angles that fixes the deterministic outcome map.

    ``state`` is ``"singlet"`` or a :class:`PerturbationParams`.
    """

    couplings: CouplingProfile = CouplingProfile()
    packet: PacketSpec = PacketSpec()
    mode: str = VON_NEUMANN
    state: object = "singlet"

    def amplitudes(self, theta_A: float, theta_B: float) -> SpinAmplitudes:
        settings = MeasurementSettings(theta_A, theta_B, self.mode)
        if isinstance(self.state, PerturbationParams):
            return perturbed_singlet(self.state, settings)
        if self.state == "singlet":
            return singlet_amplitudes(settings)
        raise ValueError(f"unsupported state {self.state!r}")


# -- outcome evaluation ------------------------------------------------------


@lru_cache(maxsize=128)
def _partition(amps: SpinAmplitudes, couplings: CouplingProfile, packet: PacketSpec):
    return tuple(outcome_partition(amps, couplings, packet))


@lru_cache(maxsize=32)
def _grid_outcomes(amps: SpinAmplitudes, couplings: CouplingProfile, packet: PacketSpec, m: int):
    h, width = packet.half, packet.width
    g = -h + (np.arange(m) + 0.5) * width / m
    X, Y = np.meshgrid(g, g)
    sA, sB = outcome_map(X, Y, amps, couplings, packet)
    sA.setflags(write=False)
    sB.setflags(write=False)
    return sA, sB


class _Quadrature:
    """Points and weights of one integration method for one distribution."""

    def __init__(self, dist: EnsembleDistribution, method):
        self.dist, self.method = dist, method
        if isinstance(method, MonteCarlo):
            s = sample(dist, method.seed, method.n)
            self.x, self.y = s.r_A, s.r_B
            self.w = None
        elif isinstance(method, Grid):
            self.x, self.y, self.w = dist.grid_points(method.m)
        else:
            raise TypeError(f"unknown method {method!r}")
        self._uniform_grid = isinstance(method, Grid) and dist.kind != "point-mass"

    def outcomes(self, amps: SpinAmplitudes, config: ExperimentConfig):
        if self._uniform_grid:
            return _grid_outcomes(amps, config.couplings, config.packet, self.method.m)
        return outcome_map(self.x, self.y, amps, config.couplings, config.packet)

    def mean(self, ind) -> Estimate:
        """Mass of a boolean indicator on the quadrature points."""
        ind = np.asarray(ind, dtype=bool)
        if self.w is None:
            n = ind.size
            p = float(ind.mean())
            return Estimate(p, math.sqrt(p * (1 - p) / n))
        value = float((self.w * ind).sum())
        err = 0.0 if not self._uniform_grid else float(self.w[_boundary_cells(ind)].sum())
        return Estimate(value, err)

    def mean_signed(self, plus, minus) -> Estimate:
        """Mass of ``plus`` minus mass of ``minus`` (disjoint indicators)."""
        plus, minus = np.asarray(plus, dtype=bool), np.asarray(minus, dtype=bool)
        if self.w is None:
            n = plus.size
            p1, p2 = plus.mean(), minus.mean()
            d = p1 - p2
            return Estimate(float(d), math.sqrt(max(p1 + p2 - d * d, 0.0) / n))
        d = float((self.w * plus).sum() - (self.w * minus).sum())
        if not self._uniform_grid:
            return Estimate(d, 0.0)
        err = self.w[_boundary_cells(plus)].sum() + self.w[_boundary_cells(minus)].sum()
        return Estimate(d, float(err))


def _exact_mass(dist: EnsembleDistribution, poly) -> float:
    if dist.kind == "point-mass":
        return 1.0 if dist.contains_point_mass(poly) else 0.0
    return dist.polygon_mass(poly)


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class OutcomeStatistics:
    p_A_plus: Estimate
    p_B_plus: Estimate
    correlation: Estimate
    theta_A: float
    theta_B: float

    @property
    def p_A_minus(self) -> float:
        return 1.0 - self.p_A_plus.value

    @property
    def p_B_minus(self) -> float:
        return 1.0 - self.p_B_plus.value


@dataclass(frozen=True)
class TransitionReport:
    """Transition fractions at one wing under one setting shift.

    ``alpha`` is the sum nu(+,-) + nu(-,+) whichever wing is compared (it
    is beta or beta-tilde when ``wing == "B"``).
    """

    nu_plus_minus: Estimate
    nu_minus_plus: Estimate
    wing: str
    shifted_wing: str
    before: tuple
    after: tuple
    method: str

    @property
    def alpha(self) -> float:
        return self.nu_plus_minus.value + self.nu_minus_plus.value

    @property
    def alpha_error(self) -> float:
        return self.nu_plus_minus.error + self.nu_minus_plus.error

    @property
    def local(self) -> bool:
        return self.wing == self.shifted_wing

    @property
    def bits_per_pair(self) -> float:
        """Average bits of outcome information changed per pair (equals alpha)."""
        return self.alpha

    def as_dict(self) -> dict:
        return {
            "wing": self.wing,
            "shifted_wing": self.shifted_wing,
            "local": self.local,
            "theta_before": list(self.before),
            "theta_after": list(self.after),
            "nu_plus_minus": self.nu_plus_minus.value,
            "nu_plus_minus_err": self.nu_plus_minus.error,
            "nu_minus_plus": self.nu_minus_plus.value,
            "nu_minus_plus_err": self.nu_minus_plus.error,
            "alpha": self.alpha,
            "alpha_err": self.alpha_error,
            "bits_per_pair": self.bits_per_pair,
            "method": self.method,
        }


@dataclass(frozen=True)
class SignalReport:
    p_before: float
    p_after: float
    signal: float
    stderr: float
    wing: str

    def as_dict(self) -> dict:
        return {"wing": self.wing, "p_plus_before": self.p_before, "p_plus_after": self.p_after,
                "signal": self.signal, "stderr": self.stderr}


@dataclass(frozen=True)
class DetailedBalance:
    nu_plus_minus: Estimate
    nu_minus_plus: Estimate
    difference: float
    error: float


@dataclass(frozen=True)
class BoundCheck:
    bound_id: int
    lhs: float
    rhs: float
    tolerance: float = 0.0

    @property
    def satisfied(self) -> bool:
        return self.lhs >= self.rhs - self.tolerance

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs

    def as_dict(self) -> dict:
        return {"bound": self.bound_id, "lhs": self.lhs, "rhs": self.rhs, "gap": self.gap,
                "satisfied": self.satisfied, "tolerance": self.tolerance}


def _method_name(method) -> str:
    if isinstance(method, MonteCarlo):
        return f"mc(n={method.n}, seed={method.seed})"
    if isinstance(method, Grid):
        return f"grid(m={method.m})"
    return "exact"


# -- operations ---------------------------------------------------------------


def outcome_statistics(theta_A: float, theta_B: float, config=ExperimentConfig(), dist=None, method=Grid()) -> OutcomeStatistics:
    dist = dist or equilibrium_distribution(config.packet)
    amps = config.amplitudes(theta_A, theta_B)
    if isinstance(method, Exact):
        pa = pb = e = 0.0
        for cell in _partition(amps, config.couplings, config.packet):
            mass = _exact_mass(dist, cell.polygon)
            pa += mass * (cell.sigma_A > 0)
            pb += mass * (cell.sigma_B > 0)
            e += mass * cell.sigma_A * cell.sigma_B
        return OutcomeStatistics(Estimate(pa, 0.0), Estimate(pb, 0.0), Estimate(e, 0.0), theta_A, theta_B)
    q = _Quadrature(dist, method)
    sA, sB = q.outcomes(amps, config)
    same = sA == sB
    corr = q.mean_signed(same, ~same)
    return OutcomeStatistics(q.mean(sA > 0), q.mean(sB > 0), corr, theta_A, theta_B)


def _shifted(theta_A, theta_B, theta_shifted, shifted_wing):
    if shifted_wing == "A":
        return (theta_A, theta_B), (theta_shifted, theta_B)
    return (theta_A, theta_B), (theta_A, theta_shifted)


def _transitions(before, after, config, dist, method):
    """nu(+,-), nu(-,+) at both wings for one pair of settings."""
    amps0 = config.amplitudes(*before)
    amps1 = config.amplitudes(*after)
    if isinstance(method, Exact):
        P0 = _partition(amps0, config.couplings, config.packet)
        P1 = _partition(amps1, config.couplings, config.packet)
        nu = {("A", 1): 0.0, ("A", -1): 0.0, ("B", 1): 0.0, ("B", -1): 0.0}
        for p in P0:
            for c in P1:
                dA = p.sigma_A != c.sigma_A
                dB = p.sigma_B != c.sigma_B
                if not (dA or dB):
                    continue
                piece = geometry.clip_convex(p.polygon, c.polygon)
                if len(piece) < 3:
                    continue
                mass = _exact_mass(dist, piece)
                if dA:
                    nu[("A", p.sigma_A)] += mass
                if dB:
                    nu[("B", p.sigma_B)] += mass
        return {w: (Estimate(nu[(w, 1)], 0.0), Estimate(nu[(w, -1)], 0.0), Estimate(nu[(w, -1)] - nu[(w, 1)], 0.0)) for w in WINGS}
    q = _Quadrature(dist, method)
    o0, o1 = q.outcomes(amps0, config), q.outcomes(amps1, config)
    out = {}
    for k, w in enumerate(WINGS):
        pm = (o0[k] > 0) & (o1[k] < 0)
        mp = (o0[k] < 0) & (o1[k] > 0)
        out[w] = (q.mean(pm), q.mean(mp), q.mean_signed(mp, pm))
    return out


def transition_fractions(wing: str, theta_A: float, theta_B: float, theta_shifted: float, local: bool = False,
                         config=ExperimentConfig(), dist=None, method=Grid()) -> TransitionReport:
    """Fractions of outcomes at ``wing`` that flip under a setting shift.

    The shifted setting belongs to the other wing unless ``local`` is true.
    """
    if wing not in WINGS:
        raise ValueError(f"wing must be 'A' or 'B', got {wing!r}")
    dist = dist or equilibrium_distribution(config.packet)
    shifted_wing = wing if local else ("B" if wing == "A" else "A")
    before, after = _shifted(theta_A, theta_B, theta_shifted, shifted_wing)
    pm, mp, _ = _transitions(before, after, config, dist, method)[wing]
    return TransitionReport(pm, mp, wing, shifted_wing, before, after, _method_name(method))


@dataclass(frozen=True)
class NonlocalityReport:
    """alpha and beta-tilde for a shift at B, plus bound (1)."""

    alpha: TransitionReport
    beta_tilde: TransitionReport
    bound1: BoundCheck

    def as_dict(self) -> dict:
        return {"alpha": self.alpha.alpha, "alpha_err": self.alpha.alpha_error,
                "beta_tilde": self.beta_tilde.alpha, "beta_tilde_err": self.beta_tilde.alpha_error,
                "transitions_A": self.alpha.as_dict(), "transitions_B": self.beta_tilde.as_dict(),
                "bound1": self.bound1.as_dict()}


def shift_at_B(theta_A: float, theta_B: float, theta_B_prime: float, config=ExperimentConfig(), dist=None, method=Grid()) -> NonlocalityReport:
    """alpha and beta-tilde from one evaluation of the two outcome maps."""
    dist = dist or equilibrium_distribution(config.packet)
    before, after = (theta_A, theta_B), (theta_A, theta_B_prime)
    res = _transitions(before, after, config, dist, method)
    name = _method_name(method)
    alpha = TransitionReport(res["A"][0], res["A"][1], "A", "B", before, after, name)
    beta_t = TransitionReport(res["B"][0], res["B"][1], "B", "B", before, after, name)
    b1 = bound_check(1, theta_A=theta_A, theta_B=theta_B, theta_B_prime=theta_B_prime,
                     alpha=alpha.alpha, beta_tilde=beta_t.alpha,
                     tolerance=3 * (alpha.alpha_error + beta_t.alpha_error))
    return NonlocalityReport(alpha, beta_t, b1)


def detailed_balance_check(wing: str, theta_A: float, theta_B: float, theta_shifted: float,
                           config=ExperimentConfig(), method=MonteCarlo()) -> DetailedBalance:
    """Equilibrium nu(+,-) and nu(-,+) for a nonlocal shift and their difference."""
    dist = equilibrium_distribution(config.packet)
    shifted_wing = "B" if wing == "A" else "A"
    before, after = _shifted(theta_A, theta_B, theta_shifted, shifted_wing)
    pm, mp, diff = _transitions(before, after, config, dist, method)[wing]
    return DetailedBalance(pm, mp, abs(diff.value), diff.error)


def signal(wing: str, theta_A: float, theta_B: float, theta_shifted: float, config=ExperimentConfig(),
           dist=None, method=MonteCarlo()) -> SignalReport:
    """Change of P(sigma_wing = +1) caused by shifting the distant setting."""
    dist = dist or equilibrium_distribution(config.packet)
    shifted_wing = "B" if wing == "A" else "A"
    before, after = _shifted(theta_A, theta_B, theta_shifted, shifted_wing)
    k = WINGS.index(wing)
    if isinstance(method, Exact):
        p0 = outcome_statistics(*before, config=config, dist=dist, method=method)
        p1 = outcome_statistics(*after, config=config, dist=dist, method=method)
        pb = (p0.p_A_plus, p0.p_B_plus)[k].value
        pa = (p1.p_A_plus, p1.p_B_plus)[k].value
        return SignalReport(pb, pa, pa - pb, 0.0, wing)
    q = _Quadrature(dist, method)
    o0 = q.outcomes(config.amplitudes(*before), config)[k]
    o1 = q.outcomes(config.amplitudes(*after), config)[k]
    pb, pa = q.mean(o0 > 0).value, q.mean(o1 > 0).value
    d = q.mean_signed((o0 < 0) & (o1 > 0), (o0 > 0) & (o1 < 0))
    return SignalReport(pb, pa, d.value, d.error, wing)


# -- bounds -------------------------------------------------------------------

_SYMMETRIC_BOUNDS = (2, 3, 4, 5)


def bound_rhs(bound_id: int, theta_A=0.0, theta_B=0.0, theta_B_prime=None, delta=None) -> float:
    """Right-hand side of lower bound (1)-(5)."""
    if bound_id == 1:
        return 0.5 * abs(math.cos(theta_A - theta_B_prime) - math.cos(theta_A - theta_B))
    if bound_id == 2:
        return 0.5 * abs(math.cos(theta_A - theta_B - delta) - math.cos(theta_A - theta_B))
    if bound_id == 3:
        return 0.5 * (1 - math.cos(delta))
    if bound_id == 4:
        return 0.25 * abs(math.cos(theta_A - theta_B - delta) - math.cos(theta_A - theta_B))
    if bound_id == 5:
        return 0.25 * (1 - math.cos(delta))
    raise ValueError(f"unknown bound id {bound_id!r}")


def bound_check(bound_id: int, *, theta_A=0.0, theta_B=0.0, theta_B_prime=None, delta=None,
                alpha=None, beta=None, beta_tilde=None, couplings: CouplingProfile | None = None,
                tolerance: float = 0.0) -> BoundCheck:
    """Compare measured degrees of nonlocality with a lower bound.

    ========  =============================================  ====================
    bound     lhs                                            arguments
    ========  =============================================  ====================
    1         alpha + beta_tilde                             theta_A, theta_B, theta_B_prime
    2         alpha(.., theta_B+delta) + beta(.., theta_A-delta)   theta_A, theta_B, delta
    3         alpha(0,0,delta) + beta(0,0,-delta)            delta
    4         alpha(.., theta_B+delta)                       theta_A, theta_B, delta
    5         alpha(0,0,delta)                               delta
    ========  =============================================  ====================

    Bounds 2-5 assume rotational (and for 4, 5 exchange) symmetry; a
    warning is issued when ``couplings`` show unequal coupling strengths.
    """
    if bound_id in _SYMMETRIC_BOUNDS and couplings is not None and not couplings.equal:
        warnings.warn(
            f"bound ({bound_id}) presumes exchange symmetry, but a_A={couplings.a_A} != a_B={couplings.a_B}",
            stacklevel=2,
        )
    if bound_id == 1:
        lhs = alpha + beta_tilde
    elif bound_id in (2, 3):
        lhs = alpha + beta
    elif bound_id in (4, 5):
        lhs = alpha
    else:
        raise ValueError(f"unknown bound id {bound_id!r}")
    rhs = bound_rhs(bound_id, theta_A, theta_B, theta_B_prime, delta)
    return BoundCheck(bound_id, float(lhs), float(rhs), tolerance)


def evaluate_bound(bound_id: int, *, theta_A=0.0, theta_B=0.0, theta_B_prime=None, delta=None,
                   config=ExperimentConfig(), method=Grid(), error_factor=3.0) -> BoundCheck:
    """Compute the needed degrees of nonlocality and check a bound."""
    dist = equilibrium_distribution(config.packet)
    kw = dict(config=config, dist=dist, method=method)
    if bound_id in (3, 5):
        theta_A = theta_B = 0.0
    if bound_id == 1:
        rep = shift_at_B(theta_A, theta_B, theta_B_prime, **kw)
        err = rep.alpha.alpha_error + rep.beta_tilde.alpha_error
        return bound_check(1, theta_A=theta_A, theta_B=theta_B, theta_B_prime=theta_B_prime,
                           alpha=rep.alpha.alpha, beta_tilde=rep.beta_tilde.alpha,
                           couplings=config.couplings, tolerance=error_factor * err)
    a = transition_fractions("A", theta_A, theta_B, theta_B + delta, **kw)
    if bound_id in (2, 3):
        b = transition_fractions("B", theta_A, theta_B, theta_A - delta, **kw)
        return bound_check(bound_id, theta_A=theta_A, theta_B=theta_B, delta=delta, alpha=a.alpha, beta=b.alpha,
                           couplings=config.couplings, tolerance=error_factor * (a.alpha_error + b.alpha_error))
    return bound_check(bound_id, theta_A=theta_A, theta_B=theta_B, delta=delta, alpha=a.alpha,
                       couplings=config.couplings, tolerance=error_factor * a.alpha_error)


# -- information ----------------------------------------------------------------


def nonlocal_bits(lo: float = -math.pi, hi: float = math.pi) -> float:
    """Average over delta in (lo, hi) of the lower bound (1 - cos delta) / 4.

    Closed form: (1 - (sin hi - sin lo) / (hi - lo)) / 4; a degenerate range
    returns the bound at that single angle.
    """
    if hi < lo:
        lo, hi = hi, lo
    if hi == lo:
        return 0.25 * (1 - math.cos(lo))
    return 0.25 * (1 - (math.sin(hi) - math.sin(lo)) / (hi - lo))


@dataclass
class DeltaSweep:
    delta: np.ndarray
    alpha: np.ndarray
    alpha_err: np.ndarray
    beta_tilde: np.ndarray
    beta_tilde_err: np.ndarray
    bound_rhs: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.alpha - self.bound_rhs

    def rows(self):
        for k in range(self.delta.size):
            yield {"delta_rad": float(self.delta[k]), "alpha": float(self.alpha[k]), "alpha_err": float(self.alpha_err[k]),
                   "beta_tilde": float(self.beta_tilde[k]), "beta_tilde_err": float(self.beta_tilde_err[k]),
                   "bound_rhs": float(self.bound_rhs[k]), "gap": float(self.gap[k])}


def delta_sweep(deltas, config=ExperimentConfig(), method=Grid(), bound_id: int = 5) -> DeltaSweep:
    """alpha(0,0,delta) and beta-tilde(0,0,delta) along a grid of shifts."""
    deltas = np.asarray(deltas, dtype=float)
    out = np.zeros((4, deltas.size))
    for k, d in enumerate(deltas):
        rep = shift_at_B(0.0, 0.0, float(d), config=config, method=method)
        out[:, k] = rep.alpha.alpha, rep.alpha.alpha_error, rep.beta_tilde.alpha, rep.beta_tilde.alpha_error
    if bound_id == 5:
        rhs = 0.25 * (1 - np.cos(deltas))
    elif bound_id == 1:
        rhs = 0.5 * np.abs(np.cos(deltas) - 1.0)
    else:
        raise ValueError("delta sweep supports bound 1 or 5")
    return DeltaSweep(deltas, out[0], out[1], out[2], out[3], rhs)


@dataclass
class EntanglementSweep:
    epsilon: np.ndarray
    delta: np.ndarray
    alpha: np.ndarray  # shape (len(epsilon), len(delta))
    fit_delta: float
    fit_intercept: float
    fit_quadratic: float
    fit_poly: np.ndarray  # full degree-2 polyfit, highest power first


def entanglement_sweep(epsilons, deltas, couplings=CouplingProfile(), packet=PacketSpec(), method=Exact(),
                       fit_delta: float = math.pi) -> EntanglementSweep:
    """alpha(0,0,delta) for perturbed singlets and a quadratic fit in epsilon.

    The perturbation is eps_pm = eps_mp = epsilon / (2 sqrt 2) with
    eps_pp = eps_mm = 0. The fit ``alpha = c0 + c2 epsilon**2`` is done at
    ``fit_delta`` over the supplied epsilons.
    """
    eps = np.asarray(epsilons, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    table = np.zeros((eps.size, deltas.size))
    fit_vals = np.zeros(eps.size)
    for i, e in enumerate(eps):
        cfg = ExperimentConfig(couplings, packet, state=PerturbationParams.from_epsilon(float(e)))
        for j, d in enumerate(deltas):
            table[i, j] = transition_fractions("A", 0.0, 0.0, float(d), config=cfg, method=method).alpha
        hit = np.flatnonzero(np.isclose(deltas, fit_delta))
        if hit.size:
            fit_vals[i] = table[i, hit[0]]
        else:
            fit_vals[i] = transition_fractions("A", 0.0, 0.0, fit_delta, config=cfg, method=method).alpha
    design = np.stack([np.ones_like(eps), eps**2], axis=1)
    (c0, c2), *_ = np.linalg.lstsq(design, fit_vals, rcond=None)
    poly = np.polyfit(eps, fit_vals, 2) if eps.size >= 3 else np.array([np.nan] * 3)
    return EntanglementSweep(eps, deltas, table, fit_delta, float(c0), float(c2), poly)


# -- balanced nonequilibrium search ---------------------------------------------


@dataclass
class BalancedSearchResult:
    distribution: EnsembleDistribution
    residuals: np.ndarray  # nu(-,+) - nu(+,-) per triple under the candidate
    triples: list
    family: str
    disequilibrium: float  # total variation distance from rho_eq, in [0, 1]
    note: str = ""

    @property
    def max_residual(self) -> float:
        return float(np.abs(self.residuals).max()) if self.residuals.size else 0.0


def _cell_coverage(polys, m: int, packet: PacketSpec) -> np.ndarray:
    """Fraction of each of the m x m cells covered by a set of disjoint polygons."""
    h, width = packet.half, packet.width
    cell = width / m
    cov = np.zeros((m, m))
    for poly in polys:
        lo, hi = poly.min(axis=0), poly.max(axis=0)
        c0, c1 = max(int((lo[0] + h) // cell), 0), min(int(math.ceil((hi[0] + h) / cell)), m)
        r0, r1 = max(int((lo[1] + h) // cell), 0), min(int(math.ceil((hi[1] + h) / cell)), m)
        for row in range(r0, r1):
            for col in range(c0, c1):
                rect = geometry.rectangle(-h + col * cell, -h + (col + 1) * cell, -h + row * cell, -h + (row + 1) * cell)
                piece = geometry.clip_convex(poly, rect)
                if len(piece) >= 3:
                    cov[row, col] += geometry.area(piece) / cell**2
    return np.clip(cov, 0.0, 1.0)


def _transition_indicators(triples, config, m):
    """Per-triple wing-A (T(+,-), T(-,+)) coverage fractions on an m x m grid."""
    out = []
    for tA, tB, tB2 in triples:
        P0 = _partition(config.amplitudes(tA, tB), config.couplings, config.packet)
        P1 = _partition(config.amplitudes(tA, tB2), config.couplings, config.packet)
        pm, mp = [], []
        for p in P0:
            for c in P1:
                if p.sigma_A == c.sigma_A:
                    continue
                piece = geometry.clip_convex(p.polygon, c.polygon)
                if len(piece) >= 3:
                    (pm if p.sigma_A > 0 else mp).append(piece)
        out.append((_cell_coverage(pm, m, config.packet), _cell_coverage(mp, m, config.packet)))
    return out


def _tv_distance(weights: np.ndarray) -> float:
    m2 = weights.size
    return 0.5 * float(np.abs(weights - 1.0 / m2).sum())


def balanced_distribution_search(triples, family: str = "grid-weights", config=ExperimentConfig(), m: int = 64,
                                 budget: int = 200, seed: int = 0, min_disequilibrium: float = 0.1) -> BalancedSearchResult:
    """Look for rho != rho_eq with balanced wing-A transition sets at all triples.

    Exploratory. Candidates are piecewise constant on an m x m grid and
    residuals are exact for them (cell coverage of the polygon transition
    sets). Sub-rectangle candidates are snapped to that grid.

    * ``grid-weights``: one triple uses rho proportional to rho_eq on
      T(+,-) u T(-,+); several triples solve a linear programme maximizing
      the mass on the right half subject to exact (grid) balance.
    * ``linear-tilt``: residuals are linear in the slope c, so the best
      candidate at total-variation distance ``min_disequilibrium`` is
      reported.
    * ``sub-rectangle-uniform``: ``budget`` random rectangles (seeded),
      smallest worst-case residual wins.
    """
    from . import ensemble as ens

    triples = [tuple(map(float, t)) for t in triples]
    packet = config.packet
    if not triples:
        dist = ens.equilibrium_distribution(packet)
        return BalancedSearchResult(dist, np.zeros(0), triples, family, 0.0, "no constraints: rho_eq returned")
    inds = _transition_indicators(triples, config, m)
    h, width = packet.half, packet.width
    g = -h + (np.arange(m) + 0.5) * width / m
    X, _ = np.meshgrid(g, g)

    def residuals(wts):
        return np.array([(wts * mp).sum() - (wts * pm).sum() for pm, mp in inds])

    if family == "grid-weights":
        if len(triples) == 1:
            pm, mp = inds[0]
            wts = pm + mp
            wts = wts / wts.sum()
            note = "rho proportional to rho_eq on the two transition sets"
        else:
            from scipy.optimize import linprog

            A_eq = np.vstack([(mp - pm).ravel() for pm, mp in inds] + [np.ones(m * m)])
            b_eq = np.zeros(len(inds) + 1)
            b_eq[-1] = 1.0
            target = -(X.ravel() > 0).astype(float)
            res = linprog(target, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
            if not res.success:
                raise RuntimeError(f"linear programme failed: {res.message}")
            wts = res.x.reshape(m, m)
            note = "LP: maximal right-half mass subject to grid balance"
        dist = ens.grid_weights(wts, packet)
        return BalancedSearchResult(dist, residuals(dist.params["weights"]), triples, family, _tv_distance(dist.params["weights"]), note)

    if family == "linear-tilt":
        base = residuals(np.full((m, m), 1.0 / m**2))
        slope = residuals(X / m**2)  # derivative of residuals with respect to c
        # total variation of (1 + c x)/width^2 from uniform is |c| width / 8
        c_mag = min(8 * min_disequilibrium / width, 2 / width)
        cands = [c_mag, -c_mag]
        best = min(cands, key=lambda c: np.abs(base + c * slope).max())
        dist = ens.linear_tilt(best, packet)
        return BalancedSearchResult(dist, base + best * slope, triples, family, abs(best) * width / 8,
                                    "residual is linear in the slope; no exact balance claimed")

    if family == "sub-rectangle-uniform":
        rng = np.random.default_rng(seed)
        best = None
        for _ in range(budget):
            c0, c1 = np.sort(rng.integers(0, m + 1, 2))
            r0, r1 = np.sort(rng.integers(0, m + 1, 2))
            if c1 == c0 or r1 == r0:
                continue
            tv = 1 - (c1 - c0) * (r1 - r0) / m**2
            if tv < min_disequilibrium:
                continue
            edge = lambda k: -h + k * width / m
            dist = ens.sub_rectangle(edge(c0), edge(c1), edge(r0), edge(r1), packet)
            wts = np.zeros((m, m))
            wts[r0:r1, c0:c1] = 1.0 / ((c1 - c0) * (r1 - r0))
            r = residuals(wts)
            score = np.abs(r).max()
            if best is None or score < best[0]:
                best = (score, dist, r, tv)
        if best is None:
            raise RuntimeError("no admissible rectangle found within budget")
        return BalancedSearchResult(best[1], best[2], triples, family, best[3], f"best of {budget} random rectangles")

    raise ValueError(f"unsupported search family {family!r}")
