"""Deterministic pointer trajectories and outcome maps.

For square packets the guidance field is piecewise constant: it only depends
on which branches currently cover the point. Each branch is the product of an
A-interval (sign i) and a B-interval (sign j), so coverage is tracked with
four membership flags A+, A-, B+, B-. Because |v_A| <= a_A, the A+ interval
moves down relative to the point and the A- interval moves up, and likewise
at B. A flag therefore switches off at most once, never back on, which bounds
the number of events by four and makes the exact integrator a short loop.

Three independent routes to the outcome map live here:

* :func:`evolve_exact` / :func:`outcome_map` - closed-form event stepping;
* :func:`evolve_numeric` / :func:`outcome_map_numeric` - fixed-step Euler on
  the point-wise field of :mod:`pilotnonlocal.packets`, with step halving
  at region changes;
* :func:`outcome_partition` - the same event rules applied symbolically to
  convex polygons of initial conditions, giving exact outcome regions.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .packets import (
    BranchState,
    CouplingProfile,
    PacketSpec,
    branch_densities,
    single_spin_amplitudes,
    velocity_field,
)
from .spin_state import BRANCHES, SpinAmplitudes

# branch k needs flags (A index, B index); flag order is A+, A-, B+, B-
_BRANCH_FLAGS = ((0, 2), (0, 3), (1, 2), (1, 3))
_SIGN_A = np.array([i for i, _ in BRANCHES], dtype=float)
_SIGN_B = np.array([j for _, j in BRANCHES], dtype=float)

WEIGHT_FLOOR = 1e-20
EVENT_RTOL = 1e-12
MAX_EVENTS = 8


class StallError(RuntimeError):
    """The event loop failed to separate the branches."""


@dataclass(frozen=True)
class HiddenVariable:
    r_A0: float
    r_B0: float

    def check(self, packet: PacketSpec) -> None:
        h = packet.half
        if not (-h <= self.r_A0 < h and -h <= self.r_B0 < h):
            raise ValueError(f"hidden variable {self} outside the initial square of width {packet.width}")


@dataclass(frozen=True)
class OutcomePair:
    sigma_A: int
    sigma_B: int

    def __post_init__(self):
        if self.sigma_A not in (1, -1) or self.sigma_B not in (1, -1):
            raise ValueError("outcomes must be +1 or -1")


@dataclass
class Trajectory:
    t: np.ndarray
    r_A: np.ndarray
    r_B: np.ndarray
    region_id: np.ndarray
    outcome: OutcomePair | None = None
    meta: dict = field(default_factory=dict)

    def position(self, t):
        """Piecewise-linear interpolation of (r_A, r_B) at time(s) t."""
        return np.interp(t, self.t, self.r_A), np.interp(t, self.t, self.r_B)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "r_A", "r_B", "region_id"])
            for row in zip(self.t, self.r_A, self.r_B, self.region_id):
                writer.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3])])


def region_id(active) -> np.ndarray:
    """Bitmask of covering branches, bit k for branch k in (++, +-, -+, --)."""
    active = np.asarray(active, dtype=bool)
    return (active * (1 << np.arange(4))).sum(axis=-1)


def _weights(amplitudes: SpinAmplitudes) -> np.ndarray:
    w = amplitudes.weights()
    w[w < WEIGHT_FLOOR] = 0.0
    return w / w.sum()


def _active(flags: np.ndarray, live: np.ndarray) -> np.ndarray:
    act = np.empty(flags.shape[:-1] + (4,), dtype=bool)
    for k, (fa, fb) in enumerate(_BRANCH_FLAGS):
        act[..., k] = flags[..., fa] & flags[..., fb] & live[k]
    return act


def _event_loop(x, y, w, couplings: CouplingProfile, packet: PacketSpec, record=False):
    """Run the exact event loop on arrays of initial points.

    Returns (branch index per point, -1 where degenerate; decision times;
    final positions; history of (t, x, y, region) snapshots when recording).
    """
    a_A, a_B, half = couplings.a_A, couplings.a_B, packet.half
    n = x.shape[0]
    x = x.astype(float).copy()
    y = y.astype(float).copy()
    t = np.zeros(n)
    flags = np.ones((n, 4), dtype=bool)
    live = w > 0
    branch = np.full(n, -1)
    history = []
    tol = EVENT_RTOL * packet.width / max(a_A, a_B)
    pending = np.arange(n)

    for _ in range(MAX_EVENTS + 1):
        act = _active(flags[pending], live)
        count = act.sum(axis=1)
        if record:
            history.append((t[pending].copy(), x[pending].copy(), y[pending].copy(), region_id(act)))
        done = count == 1
        branch[pending[done]] = np.argmax(act[done], axis=1)
        # empty coverage only on measure-zero ties; caller resolves them
        keep = count > 1
        pending, act = pending[keep], act[keep]
        if pending.size == 0:
            return branch, t, x, y, history

        ww = act * w
        W = ww.sum(axis=1)
        v_A = a_A * (ww @ _SIGN_A) / W
        v_B = a_B * (ww @ _SIGN_B) / W
        xp, yp, tp = x[pending], y[pending], t[pending]
        speeds = np.stack([v_A - a_A, v_A + a_A, v_B - a_B, v_B + a_B], axis=1)
        gaps = np.stack(
            [
                -half - (xp - a_A * tp),
                half - (xp + a_A * tp),
                -half - (yp - a_B * tp),
                half - (yp + a_B * tp),
            ],
            axis=1,
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            dt = gaps / speeds
        # only edges approached at a nonzero relative speed are ever reached
        toward = speeds * np.array([-1.0, 1.0, -1.0, 1.0]) > 1e-12 * (a_A + a_B)
        dt = np.where(flags[pending] & toward, dt, np.inf)
        dt = np.maximum(dt, 0.0)
        step = dt.min(axis=1)
        if not np.all(np.isfinite(step)):
            raise StallError("no membership event although several branches overlap")
        flags[pending] &= ~(dt <= (step + tol)[:, None])
        x[pending] = xp + v_A * step
        y[pending] = yp + v_B * step
        t[pending] = tp + step
    raise StallError("event budget exhausted")


def _nudges(packet: PacketSpec):
    for eta in (1e-9, 1e-7, 1e-5):
        yield eta * packet.width, 1e-2 * eta * packet.width


def outcome_map(r_A0, r_B0, amplitudes: SpinAmplitudes, couplings=CouplingProfile(), packet=PacketSpec()):
    """Vectorised exact outcomes (sigma_A, sigma_B) for arrays of initial points.

    Points whose coverage empties through a simultaneous exit (a measure-zero
    tie) are re-run from a point displaced by (eta, eta/100) * width, i.e.
    they are assigned to the region on the +r_A side, matching the lower-edge
    inclusive packet support.
    """
    r_A0 = np.asarray(r_A0, dtype=float)
    r_B0 = np.asarray(r_B0, dtype=float)
    shape = np.broadcast(r_A0, r_B0).shape
    x = np.broadcast_to(r_A0, shape).ravel()
    y = np.broadcast_to(r_B0, shape).ravel()
    w = _weights(amplitudes)
    branch = _event_loop(x, y, w, couplings, packet)[0]
    bad = np.flatnonzero(branch < 0)
    for dx, dy in _nudges(packet):
        if bad.size == 0:
            break
        fixed = _event_loop(x[bad] + dx, y[bad] + dy, w, couplings, packet)[0]
        branch[bad] = fixed
        bad = bad[fixed < 0]
    if bad.size:
        raise StallError(f"{bad.size} points could not be resolved")
    return _SIGN_A[branch].astype(int).reshape(shape), _SIGN_B[branch].astype(int).reshape(shape)


def evolve_exact(lam: HiddenVariable, amplitudes: SpinAmplitudes, couplings=CouplingProfile(), packet=PacketSpec()) -> Trajectory:
    """Exact piecewise-linear trajectory of one hidden variable.

    The last breakpoint is placed at the full separation time
    width / min(a_A, a_B) (or at the decision time if later), where the
    point sits inside a single branch whose support excludes the origin.
    """
    lam.check(packet)
    w = _weights(amplitudes)
    x0, y0 = np.array([lam.r_A0]), np.array([lam.r_B0])
    branch, t, x, y, hist = _event_loop(x0, y0, w, couplings, packet, record=True)
    nudged = False
    for dx, dy in _nudges(packet):
        if branch[0] >= 0:
            break
        nudged = True
        branch, t, x, y, hist = _event_loop(x0 + dx, y0 + dy, w, couplings, packet, record=True)
    if branch[0] < 0:
        raise StallError(f"could not resolve outcome for {lam}")
    k = int(branch[0])
    ts = [float(h[0][0]) for h in hist]
    xs = [float(h[1][0]) for h in hist]
    ys = [float(h[2][0]) for h in hist]
    ids = [int(h[3][0]) for h in hist]
    # collapse zero-length steps produced by coalesced events
    keep = [0] + [i for i in range(1, len(ts)) if ts[i] > ts[i - 1]]
    ts, xs, ys, ids = ([seq[i] for i in keep] for seq in (ts, xs, ys, ids))
    ids[-1] = int(region_id(np.eye(4, dtype=bool)[k]))
    t_end = max(couplings.separation_time(packet.width), ts[-1])
    if t_end > ts[-1]:
        v = (_SIGN_A[k] * couplings.a_A, _SIGN_B[k] * couplings.a_B)
        ts.append(t_end)
        xs.append(xs[-1] + v[0] * (t_end - ts[-2]))
        ys.append(ys[-1] + v[1] * (t_end - ts[-2]))
        ids.append(ids[-1])
    outcome = OutcomePair(int(_SIGN_A[k]), int(_SIGN_B[k]))
    assert np.sign(xs[-1]) == outcome.sigma_A and np.sign(ys[-1]) == outcome.sigma_B
    return Trajectory(
        np.array(ts), np.array(xs), np.array(ys), np.array(ids), outcome,
        meta={"nudged": nudged, "decision_time": float(t[0])},
    )


def classify_outcome(lam: HiddenVariable, amplitudes: SpinAmplitudes, couplings=CouplingProfile(), packet=PacketSpec()) -> OutcomePair:
    return evolve_exact(lam, amplitudes, couplings, packet).outcome


# -- numeric oracle ---------------------------------------------------------


def _support_mask(x, y, t, state: BranchState) -> np.ndarray:
    return branch_densities(x, y, t, state) > 0


def outcome_map_numeric(r_A0, r_B0, amplitudes: SpinAmplitudes, couplings=CouplingProfile(), packet=PacketSpec(), dt=None, refine=20, t_final=None, return_paths=False):
    """Explicit Euler integration of the point-wise guidance field.

    A step is rejected and the step size halved whenever the end point
    leaves the support or lands in a different set of covering branches,
    down to ``dt / 2**refine``; at that size region changes are accepted,
    while steps leaving the support keep being halved.
    Integration stops once a point is covered by exactly one branch, or at
    ``t_final`` if given. Points that cannot move without leaving the support
    (simultaneous exits) are re-run from the displaced start used by
    :func:`outcome_map`.
    """
    if dt is None:
        dt = packet.width / (1000.0 * max(couplings.a_A, couplings.a_B))
    if dt <= 0:
        raise ValueError("dt must be positive")
    w = _weights(amplitudes)
    state = BranchState(SpinAmplitudes.from_array(np.sqrt(w)), couplings, packet)
    r_A0_flat = np.atleast_1d(np.asarray(r_A0, dtype=float)).ravel()
    r_B0_flat = np.atleast_1d(np.asarray(r_B0, dtype=float)).ravel()
    x, y = r_A0_flat.copy(), r_B0_flat.copy()
    n = x.size
    t = np.zeros(n)
    h = np.full(n, dt)
    dt_min = dt / 2**refine
    tiny = dt * 2.0**-30  # well above the float spacing of t, near the exact event tolerance
    ties = np.zeros(n, dtype=bool)
    running = np.ones(n, dtype=bool)
    t_stop = np.inf if t_final is None else t_final
    paths = [[(0.0, x[i], y[i])] for i in range(n)] if return_paths else None
    max_iter = int(50 * (couplings.separation_time(packet.width) / dt + 1) + 200 * refine)
    for _ in range(max_iter):
        if t_final is None:
            cover = _support_mask(x, y, t, state).sum(axis=0)
            running &= cover > 1
        else:
            running &= t < t_stop
        idx = np.flatnonzero(running)
        if idx.size == 0:
            break
        xi, yi, ti = x[idx], y[idx], t[idx]
        hi = np.minimum(h[idx], t_stop - ti)
        v_A, v_B = velocity_field(xi, yi, ti, state)
        nx, ny, nt = xi + v_A * hi, yi + v_B * hi, ti + hi
        before = region_id(_support_mask(xi, yi, ti, state).T)
        after = region_id(_support_mask(nx, ny, nt, state).T)
        ok = (after != 0) & ((after == before) | (hi <= dt_min))
        acc = idx[ok]
        x[acc], y[acc], t[acc] = nx[ok], ny[ok], nt[ok]
        h[acc] = dt
        # a point whose every step leaves the support sits on a simultaneous
        # exit (a measure-zero tie); hand it to the shared tie-break below
        stuck = ~ok & (after == 0) & (hi <= tiny)
        running[idx[stuck]] = False
        ties[idx[stuck]] = True
        rej = idx[~ok & ~stuck]
        h[rej] = h[rej] / 2
        if return_paths:
            for i, xx, yy, tt in zip(acc, x[acc], y[acc], t[acc]):
                paths[i].append((tt, xx, yy))
    else:
        raise StallError("numeric integration did not terminate")
    if t_final is not None:
        sA, sB = np.where(x >= 0, 1, -1), np.where(y >= 0, 1, -1)
    else:
        # single covering branch: its velocity is constant from here on
        cover = _support_mask(x, y, t, state)
        k = np.argmax(cover, axis=0)
        sA, sB = _SIGN_A[k].astype(int), _SIGN_B[k].astype(int)
    bad = np.flatnonzero(ties)
    for dx, dy in _nudges(packet) if bad.size else ():
        try:
            res = outcome_map_numeric(r_A0_flat[bad] + dx, r_B0_flat[bad] + dy, amplitudes, couplings, packet,
                                      dt, refine, t_final, return_paths)
        except StallError:
            continue
        sA[bad], sB[bad] = res[0], res[1]
        if return_paths:
            for i, path in zip(bad, res[2]):
                paths[i] = path
        bad = bad[:0]
        break
    if bad.size:
        raise StallError(f"{bad.size} points stalled at a support boundary")
    if return_paths:
        return sA, sB, paths
    return sA, sB


def evolve_numeric(lam: HiddenVariable, amplitudes: SpinAmplitudes, couplings=CouplingProfile(), packet=PacketSpec(), dt=None, t_final=None) -> Trajectory:
    """Single-point numeric trajectory (cross-check oracle for :func:`evolve_exact`)."""
    lam.check(packet)
    if t_final is not None and t_final <= 0:
        return Trajectory(np.array([0.0]), np.array([lam.r_A0]), np.array([lam.r_B0]), np.array([15]), None)
    sA, sB, paths = outcome_map_numeric(lam.r_A0, lam.r_B0, amplitudes, couplings, packet, dt=dt, t_final=t_final, return_paths=True)
    arr = np.array(paths[0])
    state = BranchState(amplitudes, couplings, packet)
    ids = region_id(_support_mask(arr[:, 1], arr[:, 2], arr[:, 0], state).T)
    return Trajectory(arr[:, 0], arr[:, 1], arr[:, 2], ids, OutcomePair(int(sA[0]), int(sB[0])))


# -- exact polygon partition -------------------------------------------------


@dataclass(frozen=True)
class OutcomeCell:
    polygon: np.ndarray
    sigma_A: int
    sigma_B: int

    @property
    def area(self) -> float:
        return geometry.area(self.polygon)


def outcome_partition(amplitudes: SpinAmplitudes, couplings=CouplingProfile(), packet=PacketSpec()) -> list[OutcomeCell]:
    """Partition the initial square into convex cells of constant outcome.

    Positions and times are affine in the initial point as long as the
    sequence of membership events is fixed, so each event splits a cell
    along the lines where two candidate exit times coincide.
    """
    a_A, a_B, half = couplings.a_A, couplings.a_B, packet.half
    w = _weights(amplitudes)
    live = w > 0
    min_area = 1e-16 * packet.width**2
    square = geometry.rectangle(-half, half, -half, half)
    e_x, e_y, zero = np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.zeros(3)
    stack = [(square, e_x, e_y, zero, (True,) * 4, 0)]
    cells: list[OutcomeCell] = []
    while stack:
        poly, X, Y, T, flags, depth = stack.pop()
        if depth > MAX_EVENTS:
            raise StallError("polygon partition did not terminate")
        act = _active(np.array(flags), live)
        if act.sum() == 1:
            k = int(np.argmax(act))
            cells.append(OutcomeCell(poly, int(_SIGN_A[k]), int(_SIGN_B[k])))
            continue
        if act.sum() == 0:
            continue  # only reachable on zero-area slivers
        ww = act * w
        v_A = a_A * ww @ _SIGN_A / ww.sum()
        v_B = a_B * ww @ _SIGN_B / ww.sum()
        # exit time T_k = T + (edge - u) / c with u affine in the initial point
        rel = [(X - a_A * T, v_A - a_A, -half), (X + a_A * T, v_A + a_A, half),
               (Y - a_B * T, v_B - a_B, -half), (Y + a_B * T, v_B + a_B, half)]
        exits = {}
        c_tol = 1e-12 * (a_A + a_B)
        for k, (u, c, edge) in enumerate(rel):
            # only edges approached at a nonzero relative speed are ever reached
            if flags[k] and c * np.sign(edge) > c_tol:
                exits[k] = T + (np.array([0.0, 0.0, edge]) - u) / c
        if not exits:
            raise StallError("no membership event although several branches overlap")
        for k, Tk in exits.items():
            piece = poly
            same = [k]
            for j, Tj in exits.items():
                if j == k:
                    continue
                diff = Tk - Tj
                if np.abs(diff).max() <= 1e-12 * (np.abs(Tk).max() + 1.0):
                    if j < k:
                        piece = piece[:0]
                        break
                    same.append(j)
                    continue
                piece = geometry.clip_halfplane(piece, diff)
                if len(piece) == 0:
                    break
            if len(piece) < 3 or geometry.area(piece) <= min_area:
                continue
            dT = Tk - T
            new_flags = tuple(f and (j not in same) for j, f in enumerate(flags))
            stack.append((piece, X + v_A * dT, Y + v_B * dT, Tk, new_flags, depth + 1))
    return cells


# -- single spin -------------------------------------------------------------


def _single_spin_plan(r0, spin_state, theta, coupling, packet):
    """Overlap velocity, exit time and final velocity for each initial r0."""
    c = single_spin_amplitudes(spin_state, theta)
    w_up, w_dn = abs(c[0]) ** 2, abs(c[1]) ** 2
    if w_up < WEIGHT_FLOOR:
        w_up = 0.0
    if w_dn < WEIGHT_FLOOR:
        w_dn = 0.0
    r0 = np.asarray(r0, dtype=float)
    half = packet.half
    if np.any((r0 < -half) | (r0 >= half)):
        raise ValueError("initial pointer position outside the packet")
    g = coupling
    if w_dn == 0.0 or w_up == 0.0:
        sign = 1.0 if w_dn == 0.0 else -1.0
        v = np.full(r0.shape, sign * g)
        return v, np.zeros(r0.shape), v
    v0 = g * (w_up - w_dn) / (w_up + w_dn)
    t_up = (r0 + half) / (g - v0)   # up-branch lower edge reaches the point
    t_dn = (half - r0) / (v0 + g)   # down-branch upper edge reaches the point
    # on a tie the lower-edge-inclusive up branch keeps the point
    final = np.where(t_dn <= t_up, g, -g)
    t_exit = np.minimum(t_up, t_dn)
    return np.full(r0.shape, v0), t_exit, final


def single_spin_position(r0, t, spin_state, theta: float, coupling: float = 1.0, packet=PacketSpec()):
    """Exact pointer position r(t) of the single-spin model for initial r0."""
    v0, t_exit, v1 = _single_spin_plan(r0, spin_state, theta, coupling, packet)
    r0 = np.asarray(r0, dtype=float)
    t = np.asarray(t, dtype=float)
    before = np.minimum(t, t_exit)
    after = np.maximum(t - t_exit, 0.0)
    return r0 + v0 * before + v1 * after


def single_spin_outcome(r0, spin_state, theta: float, coupling: float = 1.0, packet=PacketSpec()):
    """Sign of the pointer position at large times (+1 or -1)."""
    if coupling <= 0:
        raise ValueError("coupling must be positive")
    _, _, v1 = _single_spin_plan(r0, spin_state, theta, coupling, packet)
    out = np.where(v1 > 0, 1, -1)
    return int(out) if out.ndim == 0 else out
