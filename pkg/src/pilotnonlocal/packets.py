"""Square pointer packets under ideal von Neumann spin coupling.

With step couplings g_X(t) = a_X for t >= 0 and negligible free
Hamiltonians, branch (i, j) is the initial packet product translated
rigidly to (i * h_A(t), j * h_B(t)) with h_X(t) = a_X * t. Natural units,
hbar = 1.

All point-wise functions accept scalars or numpy arrays for r_A, r_B.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spin_state import BRANCHES, SpinAmplitudes, basis_rotation


class UndefinedVelocityError(ValueError):
    """Raised when the guidance velocity is requested where rho_eq = 0."""


@dataclass(frozen=True)
class CouplingProfile:
    a_A: float = 1.0
    a_B: float = 1.0

    def __post_init__(self):
        for name in ("a_A", "a_B"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"coupling.{name} must be positive, got {value!r}")

    def h(self, t):
        """Branch displacements (h_A(t), h_B(t))."""
        t = np.asarray(t, dtype=float)
        return self.a_A * t, self.a_B * t

    def separation_time(self, width: float) -> float:
        """First time at which both displacements reach the packet width."""
        return width / min(self.a_A, self.a_B)

    @property
    def equal(self) -> bool:
        return self.a_A == self.a_B


@dataclass(frozen=True)
class PacketSpec:
    """Square packet |phi(r)|^2 = 1/width on the half-open [-width/2, width/2)."""

    width: float = 1.0
    shape: str = "square"

    def __post_init__(self):
        if not (math.isfinite(self.width) and self.width > 0):
            raise ValueError(f"packet.width must be positive, got {self.width!r}")
        if self.shape != "square":
            raise ValueError(f"only square packets are supported, got {self.shape!r}")

    @property
    def half(self) -> float:
        return 0.5 * self.width

    def inside(self, r):
        r = np.asarray(r, dtype=float)
        return (r >= -self.half) & (r < self.half)

    def density(self, r):
        """|phi(r)|^2."""
        return np.where(self.inside(r), 1.0 / self.width, 0.0)


@dataclass(frozen=True)
class PhasePoint:
    r_A: float
    r_B: float
    t: float = 0.0


@dataclass(frozen=True)
class BranchState:
    """Everything needed to evaluate the four branches at any time."""

    amplitudes: SpinAmplitudes
    couplings: CouplingProfile = CouplingProfile()
    packet: PacketSpec = PacketSpec()

    def centers(self, t):
        """Centers (c_A, c_B) of every branch, arrays of shape (4,) + shape(t)."""
        h_A, h_B = self.couplings.h(t)
        sA = np.array([i for i, _ in BRANCHES], dtype=float).reshape((4,) + (1,) * np.ndim(t))
        sB = np.array([j for _, j in BRANCHES], dtype=float).reshape((4,) + (1,) * np.ndim(t))
        return sA * h_A, sB * h_B


def _check_time(t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("time must be nonnegative")


def branch_densities(r_A, r_B, t, state: BranchState) -> np.ndarray:
    """|psi_ij|^2 for all four branches, stacked along a leading axis."""
    _check_time(t)
    r_A, r_B, t = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r_A, r_B, t)))
    h_A, h_B = state.couplings.h(t)
    pk = state.packet
    w = state.amplitudes.weights()
    out = np.empty((4,) + r_A.shape)
    for k, (i, j) in enumerate(BRANCHES):
        out[k] = w[k] * pk.density(r_A - i * h_A) * pk.density(r_B - j * h_B)
    return out


def branch_density(point: PhasePoint, branch: tuple[int, int], state: BranchState) -> float:
    k = BRANCHES.index(tuple(branch))
    return float(branch_densities(point.r_A, point.r_B, point.t, state)[k])


def equilibrium_density(r_A, r_B, t, state: BranchState):
    return branch_densities(r_A, r_B, t, state).sum(axis=0)


def _guidance(dens: np.ndarray, state: BranchState):
    rho = dens.sum(axis=0)
    sA = np.array([i for i, _ in BRANCHES], dtype=float).reshape((4,) + (1,) * (dens.ndim - 1))
    sB = np.array([j for _, j in BRANCHES], dtype=float).reshape((4,) + (1,) * (dens.ndim - 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        v_A = state.couplings.a_A * (sA * dens).sum(axis=0) / rho
        v_B = state.couplings.a_B * (sB * dens).sum(axis=0) / rho
    return v_A, v_B, rho


def velocity_field(r_A, r_B, t, state: BranchState):
    """Vectorised guidance velocity; NaN wherever rho_eq vanishes."""
    return _guidance(branch_densities(r_A, r_B, t, state), state)[:2]


def velocity(point: PhasePoint, state: BranchState) -> tuple[float, float]:
    v_A, v_B, rho = _guidance(branch_densities(point.r_A, point.r_B, point.t, state), state)
    if not rho > 0:
        raise UndefinedVelocityError(f"rho_eq = 0 at {point}")
    return float(v_A), float(v_B)


# -- single spin ----------------------------------------------------------

SINGLE_SPIN_STATES = {
    "z+": np.array([1.0, 0.0]),
    "z-": np.array([0.0, 1.0]),
    "x+": np.array([1.0, 1.0]) / math.sqrt(2.0),
    "x-": np.array([1.0, -1.0]) / math.sqrt(2.0),
}


def single_spin_amplitudes(spin_state, theta: float) -> np.ndarray:
    """(c_+, c_-) of a single spin in the theta basis."""
    if isinstance(spin_state, str):
        try:
            vec = SINGLE_SPIN_STATES[spin_state]
        except KeyError:
            raise ValueError(f"unknown spin state {spin_state!r}") from None
    else:
        vec = np.asarray(spin_state, dtype=complex)
        vec = vec / np.linalg.norm(vec)
    return basis_rotation(theta) @ vec


def single_spin_velocity(r, t, spin_state, theta: float, coupling: float = 1.0, packet: PacketSpec = PacketSpec()):
    """Guidance velocity for H = g sigma_theta (-i d/dr) with g = ``coupling``."""
    if coupling <= 0:
        raise ValueError("coupling must be positive")
    _check_time(t)
    c = single_spin_amplitudes(spin_state, theta)
    w_up, w_dn = abs(c[0]) ** 2, abs(c[1]) ** 2
    r, t = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(t, dtype=float))
    h = coupling * t
    d_up = w_up * packet.density(r - h)
    d_dn = w_dn * packet.density(r + h)
    rho = d_up + d_dn
    if np.any(rho <= 0):
        raise UndefinedVelocityError("single-spin density vanishes at requested point")
    v = coupling * (d_up - d_dn) / rho
    return float(v) if v.ndim == 0 else v
