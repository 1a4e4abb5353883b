"""Two-outcome measurements, CHSH evaluation and the shifted operator family.

The shifted operator S(s) = mu_s * I - nu_s * (CHSH operator) satisfies
+-[A(0|0) - A(1|0)] <= S(s) for every device pair and every s in the open
interval (2, 2*sqrt(2)); the verifiers below check that numerically via
dense eigensolves. The coefficients diverge at the right endpoint, so all
evaluation happens on the clamped interval [2 + S_CLAMP, 2*sqrt(2) - S_CLAMP].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import (
    DIM_GUARD,
    dagger,
    hermiticity_defect,
    kron,
    kron_all,
    min_eigenvalue,
)

SQRT8 = 2.0 * np.sqrt(2.0)
S_CLAMP = 1e-6
EIG_TOL = -1e-9

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class BinaryMeasurement:
    """Two-outcome POVM on a ``dim``-dimensional system.

    ``element0 + element1`` must equal the identity and both elements must
    be PSD; ``projective`` additionally asserts idempotence of each element.
    """

    dim: int
    element0: np.ndarray
    element1: np.ndarray
    projective: bool = False

    def __post_init__(self):
        e0 = np.asarray(self.element0, dtype=complex)
        e1 = np.asarray(self.element1, dtype=complex)
        if e0.shape != (self.dim, self.dim) or e1.shape != (self.dim, self.dim):
            raise ValueError("POVM elements must be dim x dim")
        if np.abs(e0 + e1 - np.eye(self.dim)).max() > 1e-12:
            raise ValueError("POVM elements do not sum to identity")
        for e in (e0, e1):
            if hermiticity_defect(e) > 1e-12:
                raise ValueError("POVM element is not Hermitian")
            if min_eigenvalue(e) < -1e-12:
                raise ValueError("POVM element is not positive semidefinite")
        if self.projective:
            for e in (e0, e1):
                if np.abs(e @ e - e).max() > 1e-10:
                    raise ValueError("projective-flagged element is not idempotent")
        object.__setattr__(self, "element0", e0)
        object.__setattr__(self, "element1", e1)

    def element(self, outcome: int) -> np.ndarray:
        return self.element0 if outcome == 0 else self.element1

    def difference(self) -> np.ndarray:
        """element0 - element1 (the +-1-valued observable for projective pairs)."""
        return self.element0 - self.element1


@dataclass(frozen=True)
class RoundDevices:
    """Alice's and Bob's two binary measurements for one round."""

    dimA: int
    dimB: int
    alice: tuple[BinaryMeasurement, BinaryMeasurement]
    bob: tuple[BinaryMeasurement, BinaryMeasurement]

    def __post_init__(self):
        for m in self.alice:
            if m.dim != self.dimA:
                raise ValueError("Alice measurement dimension mismatch")
        for m in self.bob:
            if m.dim != self.dimB:
                raise ValueError("Bob measurement dimension mismatch")

    @property
    def dim(self) -> int:
        return self.dimA * self.dimB


@dataclass(frozen=True)
class ShiftedChshParams:
    """Shift coefficients mu_s, nu_s for a parameter s in the clamped interval."""

    s: float
    mu: float = field(init=False)
    nu: float = field(init=False)

    def __post_init__(self):
        if not (2.0 <= self.s <= SQRT8):
            raise ValueError(f"s must lie in [2, 2*sqrt(2)], got {self.s}")
        s_eff = float(np.clip(self.s, 2.0 + S_CLAMP, SQRT8 - S_CLAMP))
        object.__setattr__(self, "s", s_eff)
        root = np.sqrt(2.0 - s_eff * s_eff / 4.0)
        object.__setattr__(self, "mu", 2.0 / root)
        object.__setattr__(self, "nu", (s_eff / 4.0) / root)


def projective_qubit_measurement(theta: float) -> BinaryMeasurement:
    """Projective qubit measurement of cos(theta) Z + sin(theta) X.

    Outcome 0 projects onto the +1 eigenspace, so element0 - element1
    recovers the observable.
    """
    obs = np.cos(theta) * _PAULI_Z + np.sin(theta) * _PAULI_X
    e0 = (np.eye(2) + obs) / 2.0
    e1 = (np.eye(2) - obs) / 2.0
    return BinaryMeasurement(2, e0, e1, projective=True)


def devices_from_angles(alice_angles: Sequence[float], bob_angles: Sequence[float]) -> RoundDevices:
    """Qubit devices measuring in the X-Z plane at the given setting angles."""
    alice = tuple(projective_qubit_measurement(t) for t in alice_angles)
    bob = tuple(projective_qubit_measurement(t) for t in bob_angles)
    return RoundDevices(2, 2, alice, bob)


def random_projective_devices(rng: np.random.Generator) -> RoundDevices:
    """Random X-Z-plane qubit devices for both parties."""
    angles = rng.uniform(0.0, 2.0 * np.pi, size=4)
    return devices_from_angles(angles[:2], angles[2:])


OPTIMAL_ALICE_ANGLES = (0.0, np.pi / 2.0)
OPTIMAL_BOB_ANGLES = (np.pi / 4.0, -np.pi / 4.0)


def optimal_devices() -> RoundDevices:
    """Angles achieving the quantum maximum 2*sqrt(2) on :func:`bell_state`."""
    return devices_from_angles(OPTIMAL_ALICE_ANGLES, OPTIMAL_BOB_ANGLES)


def bell_state() -> np.ndarray:
    """Density matrix of the maximally entangled pair (|00> + |11>)/sqrt(2)."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = psi[3] = 1.0 / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def werner_state(visibility: float) -> np.ndarray:
    """Mix of :func:`bell_state` with white noise; CHSH = visibility * 2*sqrt(2)."""
    if not (0.0 <= visibility <= 1.0):
        raise ValueError("visibility must lie in [0, 1]")
    return visibility * bell_state() + (1.0 - visibility) * np.eye(4) / 4.0


def chsh_operator(devices: RoundDevices) -> np.ndarray:
    """Sum over a, b, x, y of (-1)^(a+b+xy) A(a|x) (x) B(b|y)."""
    op = np.zeros((devices.dim, devices.dim), dtype=complex)
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    sign = -1.0 if (a + b + x * y) % 2 else 1.0
                    op += sign * kron(devices.alice[x].element(a), devices.bob[y].element(b))
    return op


def chsh_value(state: np.ndarray, devices: RoundDevices) -> float:
    """CHSH expectation of ``state``; classically bounded by 2, quantumly by 2*sqrt(2)."""
    state = np.asarray(state)
    if state.shape != (devices.dim, devices.dim):
        raise ValueError("state dimension does not match devices")
    return float(np.trace(state @ chsh_operator(devices)).real)


def shifted_chsh_operator(params: ShiftedChshParams, devices: RoundDevices) -> np.ndarray:
    """mu_s * I - nu_s * CHSH operator on the joint space."""
    return params.mu * np.eye(devices.dim) - params.nu * chsh_operator(devices)


def predictability_observable(devices: RoundDevices) -> np.ndarray:
    """[A(0|0) - A(1|0)] (x) I_B, whose expectation is the outcome bias."""
    return kron(devices.alice[0].difference(), np.eye(devices.dimB))


def verify_operator_inequality(params: ShiftedChshParams, devices: RoundDevices) -> dict:
    """Check both semidefinite inequalities +-C <= S by direct eigensolve."""
    s_op = shifted_chsh_operator(params, devices)
    c_op = predictability_observable(devices)
    min_plus = min_eigenvalue(s_op + c_op)
    min_minus = min_eigenvalue(s_op - c_op)
    return {
        "minEig_plus": min_plus,
        "minEig_minus": min_minus,
        "pass": bool(min_plus >= EIG_TOL and min_minus >= EIG_TOL),
    }


class HypothesisError(ValueError):
    """Input pair fails the +-C_i <= S_i premise."""


def verify_tensor_product_inequality(pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> dict:
    """Check that the tensor products of hypothesis-satisfying pairs obey
    +-(C_1 (x) ... (x) C_k) <= S_1 (x) ... (x) S_k."""
    if not pairs:
        raise ValueError("need at least one (C, S) pair")
    total_dim = 1
    for c, s in pairs:
        c = np.asarray(c)
        s = np.asarray(s)
        if c.shape != s.shape or c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("C and S must be square matrices of equal shape")
        if hermiticity_defect(c) > 1e-10 or hermiticity_defect(s) > 1e-10:
            raise ValueError("C and S must be Hermitian")
        total_dim *= c.shape[0]
        for sign in (1.0, -1.0):
            if min_eigenvalue(s - sign * c) < -1e-10:
                raise HypothesisError("input pair violates +-C <= S")
    if total_dim > DIM_GUARD:
        raise ValueError(f"total dimension {total_dim} exceeds guard {DIM_GUARD}")
    prod_c = kron_all([p[0] for p in pairs])
    prod_s = kron_all([p[1] for p in pairs])
    min_plus = min_eigenvalue(prod_s + prod_c)
    min_minus = min_eigenvalue(prod_s - prod_c)
    return {
        "minEig_plus": min_plus,
        "minEig_minus": min_minus,
        "pass": bool(min_plus >= EIG_TOL and min_minus >= EIG_TOL),
    }


def clamped_s_interval() -> tuple[float, float]:
    return (2.0 + S_CLAMP, SQRT8 - S_CLAMP)


def s_grid(points: int, *, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Geometrically spaced s values on the clamped interval."""
    c_lo, c_hi = clamped_s_interval()
    lo = c_lo if lo is None else lo
    hi = c_hi if hi is None else hi
    return np.geomspace(lo, hi, points)
