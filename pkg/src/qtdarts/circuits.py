"""Candidate circuit definitions and statevector simulation.

Twelve hardware-efficient ansatz variants are indexed 1..12: a Hadamard
layer flag (configs 1-6 on, 7-12 off), an entangler pattern (open CNOT
chain for 1-3 and 7-9, closed ring for 4-6 and 10-12) and a rotation axis
cycling Rx, Ry, Rz. Each of the L layers applies one rotation per qubit
followed by the entangling CNOTs; the Hadamards, when enabled, run once
before the first layer. Circuits start from the all-zeros state (there is
no data-encoding block) and the output is the full probability vector over
all 2**n computational basis states.

Bit convention: qubit 0 is the most significant bit of the basis label.
"""

from dataclasses import dataclass
from math import cos, sin
from cmath import exp as cexp

import numpy as np

from . import backend

CHAIN = "chain"
RING = "ring"
RX = "rx"
RY = "ry"
RZ = "rz"

_AXES = (RX, RY, RZ)


@dataclass(frozen=True)
class CircuitConfig:
    """One ansatz recipe: Hadamard flag x entangler pattern x rotation axis."""

    hadamard: bool
    entangler: str
    rotation: str


def config_from_index(index):
    """Return the candidate circuit for a 1-based index in 1..12."""
    if not isinstance(index, (int, np.integer)) or isinstance(index, bool):
        raise ValueError(f"config index must be an integer, got {index!r}")
    if not 1 <= index <= 12:
        raise ValueError(f"config index must be in 1..12, got {index}")
    k = index - 1
    return CircuitConfig(
        hadamard=k < 6,
        entangler=CHAIN if (k % 6) < 3 else RING,
        rotation=_AXES[k % 3],
    )


ALL_CONFIGS = tuple(config_from_index(i) for i in range(1, 13))
NUM_CONFIGS = len(ALL_CONFIGS)


def entangler_pairs(entangler, n):
    """(control, target) CNOT pairs for a pattern; none on a single qubit."""
    if entangler not in (CHAIN, RING):
        raise ValueError(f"unknown entangler pattern {entangler!r}")
    if n < 2:
        return []
    pairs = [(q, q + 1) for q in range(n - 1)]
    if entangler == RING:
        pairs.append((n - 1, 0))
    return pairs


def validate_angles(theta, n):
    """Coerce to an (L, n) float64 matrix of finite rotation angles."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 2 or theta.shape[1] != n:
        raise ValueError(f"angles must have shape (L, {n}), got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("angles must be finite")
    return theta


def _stride(q, n):
    return 1 << (n - 1 - q)


def apply_rotation(state, axis, q, n, theta):
    """Apply R_axis(theta) to qubit q of the state, in place."""
    k = backend.kernels
    stride = _stride(q, n)
    half = 0.5 * theta
    if axis == RX:
        k.rot_x(state, stride, cos(half), sin(half))
    elif axis == RY:
        k.rot_y(state, stride, cos(half), sin(half))
    elif axis == RZ:
        k.rot_z(state, stride, cexp(-1j * half))
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")


def simulate_state(config, theta, n):
    """Final statevector of one candidate circuit; theta is (L, n) radians."""
    if n < 1:
        raise ValueError(f"qubit count must be >= 1, got {n}")
    theta = validate_angles(theta, n)
    k = backend.kernels
    state = np.zeros(1 << n, dtype=np.complex128)
    state[0] = 1.0
    if config.hadamard:
        for q in range(n):
            k.hadamard(state, _stride(q, n))
    pairs = entangler_pairs(config.entangler, n)
    for layer in range(theta.shape[0]):
        for q in range(n):
            apply_rotation(state, config.rotation, q, n, theta[layer, q])
        for c, t in pairs:
            k.cnot(state, _stride(c, n), _stride(t, n))
    return state


def run_circuit(config, theta, n):
    """Probability of every basis state after running one candidate circuit."""
    state = simulate_state(config, theta, n)
    return np.abs(state) ** 2
