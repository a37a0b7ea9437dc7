"""Two-qubit spin amplitudes in a rotated measurement basis.

Measurement axes lie in the x-z plane at angle ``theta`` from the z-axis.
Spin up/down along ``theta`` are

    |theta+> =  cos(theta/2)|z+> + sin(theta/2)|z->
    |theta-> = -sin(theta/2)|z+> + cos(theta/2)|z->

so that ``theta = pi`` swaps the roles of up and down (with a sign).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

VON_NEUMANN = "von-neumann"
STERN_GERLACH = "stern-gerlach"
MODES = (VON_NEUMANN, STERN_GERLACH)

NORM_TOL = 1e-12
MAX_PERTURBATION = 0.2

# (i, j) labels in storage order
BRANCHES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class SpinAmplitudes:
    """Amplitudes a_ij for spin i along theta_A at A and j along theta_B at B."""

    a_pp: complex
    a_pm: complex
    a_mp: complex
    a_mm: complex

    def __post_init__(self):
        norm = sum(abs(a) ** 2 for a in self)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes not normalized: sum |a_ij|^2 = {norm!r}")

    def __iter__(self) -> Iterator[complex]:
        return iter((self.a_pp, self.a_pm, self.a_mp, self.a_mm))

    @classmethod
    def from_array(cls, amps) -> "SpinAmplitudes":
        a = np.asarray(amps, dtype=complex).reshape(4)
        return cls(*(complex(x) for x in a))

    def as_matrix(self) -> np.ndarray:
        """2x2 array indexed [i, j] with index 0 = up, 1 = down."""
        return np.array([[self.a_pp, self.a_pm], [self.a_mp, self.a_mm]], dtype=complex)

    def weights(self) -> np.ndarray:
        """Branch probabilities |a_ij|^2 in storage order (++, +-, -+, --)."""
        return np.array([abs(a) ** 2 for a in self])

    def correlation(self) -> float:
        """Quantum expectation of sigma_A * sigma_B implied by the amplitudes."""
        w = self.weights()
        return float(w[0] - w[1] - w[2] + w[3])


@dataclass(frozen=True)
class MeasurementSettings:
    theta_A: float
    theta_B: float
    mode: str = VON_NEUMANN

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown interaction mode {self.mode!r}")
        if not (math.isfinite(self.theta_A) and math.isfinite(self.theta_B)):
            raise ValueError("measurement angles must be finite")

    def canonical(self) -> "MeasurementSettings":
        """Settings with both angles reduced according to the interaction mode."""
        return MeasurementSettings(
            canonicalize_angle(self.theta_A, self.mode),
            canonicalize_angle(self.theta_B, self.mode),
            self.mode,
        )


@dataclass(frozen=True)
class PerturbationParams:
    """Real perturbation of the singlet written in the (0, 0) basis.

    The pair ``eps_pm == eps_mp`` is enforced so that the two expressions
    sqrt(2)(eps_pm + eps_pm*) and sqrt(2)(eps_mp + eps_mp*) for the scalar
    ``epsilon`` agree.
    """

    eps_pp: float = 0.0
    eps_pm: float = 0.0
    eps_mp: float = 0.0
    eps_mm: float = 0.0

    def __post_init__(self):
        for name in ("eps_pp", "eps_pm", "eps_mp", "eps_mm"):
            value = getattr(self, name)
            if not math.isfinite(value) or abs(value) > MAX_PERTURBATION:
                raise ValueError(f"{name}={value!r} outside perturbative bound |eps| <= {MAX_PERTURBATION}")
        if self.eps_pm != self.eps_mp:
            raise ValueError("eps_pm and eps_mp must be equal")

    @property
    def epsilon(self) -> float:
        return math.sqrt(2.0) * 2.0 * self.eps_pm

    @classmethod
    def from_epsilon(cls, epsilon: float, eps_pp: float = 0.0, eps_mm: float = 0.0) -> "PerturbationParams":
        x = epsilon / (2.0 * math.sqrt(2.0))
        return cls(eps_pp=eps_pp, eps_pm=x, eps_mp=x, eps_mm=eps_mm)

    def is_zero(self) -> bool:
        return self.eps_pp == self.eps_pm == self.eps_mp == self.eps_mm == 0.0


def canonicalize_angle(theta: float, mode: str = VON_NEUMANN) -> float:
    """Map an angle to its canonical representative for the interaction mode.

    Settings that differ by pi are distinct experiments for the von Neumann
    coupling but the same experiment for a Stern-Gerlach magnet; in the
    latter case the angle is reduced modulo pi into (-pi/2, pi/2].
    """
    if not math.isfinite(theta):
        raise ValueError("angle must be finite")
    if mode == VON_NEUMANN:
        return theta
    if mode != STERN_GERLACH:
        raise ValueError(f"unknown interaction mode {mode!r}")
    r = math.fmod(theta, math.pi)
    if r > math.pi / 2:
        r -= math.pi
    elif r <= -math.pi / 2:
        r += math.pi
    if r == 0.0:
        r = 0.0  # drop negative zero
    return r


def basis_rotation(theta: float) -> np.ndarray:
    """Rows are <theta+| and <theta-| in the z basis."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, s], [-s, c]])


def amplitudes_in_basis(state_z: np.ndarray, theta_A: float, theta_B: float) -> SpinAmplitudes:
    """Re-express a z-basis two-qubit state (2x2 array) along (theta_A, theta_B)."""
    state_z = np.asarray(state_z, dtype=complex)
    m = basis_rotation(theta_A) @ state_z @ basis_rotation(theta_B).T
    return SpinAmplitudes.from_array(m)


def singlet_amplitudes(settings: MeasurementSettings) -> SpinAmplitudes:
    s = settings.canonical() if settings.mode == STERN_GERLACH else settings
    delta = s.theta_B - s.theta_A
    r = 1.0 / math.sqrt(2.0)
    sin_h, cos_h = math.sin(delta / 2), math.cos(delta / 2)
    return SpinAmplitudes(complex(r * sin_h), complex(r * cos_h), complex(-r * cos_h), complex(r * sin_h))


def perturbed_singlet_z(params: PerturbationParams) -> np.ndarray:
    """Normalized z-basis matrix of the perturbed singlet."""
    r = 1.0 / math.sqrt(2.0)
    m = np.array(
        [[params.eps_pp, r + params.eps_pm], [-r + params.eps_mp, params.eps_mm]],
        dtype=complex,
    )
    return m / np.linalg.norm(m)


def perturbed_singlet(params: PerturbationParams, settings: MeasurementSettings) -> SpinAmplitudes:
    if params.is_zero():
        return singlet_amplitudes(settings)
    s = settings.canonical() if settings.mode == STERN_GERLACH else settings
    return amplitudes_in_basis(perturbed_singlet_z(params), s.theta_A, s.theta_B)
