"""Analytic gradients of circuit probabilities with respect to angles.

Both methods compute the vector-Jacobian product ``d(cot . p)/d theta``
for a real cotangent ``cot`` against the probability vector ``p``.
The scalar being differentiated equals the expectation value of the
diagonal observable ``diag(cot)``, so the adjoint reverse sweep applies
directly: one forward pass, then gates are peeled off the bra and ket in
reverse while each rotation contributes ``Im <bra|P|ket>`` for its Pauli
generator P. Cost is one extra pass over the state per gate, against
2*L*n full circuit evaluations for the parameter-shift rule, which is
kept as an independent cross-check.
"""

import numpy as np

from . import backend
from .circuits import RX, RZ, entangler_pairs, simulate_state, validate_angles, _stride

def _validate_cotangent(cot, n):
    cot = np.asarray(cot, dtype=np.float64)
    if cot.shape != (1 << n,):
        raise ValueError(f"cotangent must have shape ({1 << n},), got {cot.shape}")
    if not np.all(np.isfinite(cot)):
        raise ValueError("cotangent must be finite")
    return cot


def prob_vjp(config, theta, n, cot, ket=None):
    """Adjoint-method VJP: returns the (L, n) matrix d(cot . p)/d theta.

    ``ket`` may carry a precomputed final statevector to skip the forward
    pass (it is consumed: the sweep works on a copy either way).
    """
    theta = validate_angles(theta, n)
    cot = _validate_cotangent(cot, n)
    layers = theta.shape[0]
    grad = np.zeros_like(theta)
    if config.rotation == RZ:
        # Diagonal rotations never move probability mass; see ensemble notes.
        return grad
    if ket is None:
        ket = simulate_state(config, theta, n)
    else:
        ket = np.array(ket, dtype=np.complex128)
    bra = cot * ket
    k = backend.kernels
    adj = k.adj_rot_x if config.rotation == RX else k.adj_rot_y
    pairs = entangler_pairs(config.entangler, n)
    for layer in range(layers - 1, -1, -1):
        for c, t in reversed(pairs):
            k.cnot2(bra, ket, _stride(c, n), _stride(t, n))
        for q in range(n - 1, -1, -1):
            half = 0.5 * theta[layer, q]
            grad[layer, q] = adj(bra, ket, _stride(q, n), np.cos(half), np.sin(half))
    return grad


def parameter_shift_vjp(config, theta, n, cot):
    """Parameter-shift VJP oracle: +-pi/2 shifted evaluations per angle."""
    theta = validate_angles(theta, n)
    cot = _validate_cotangent(cot, n)
    grad = np.zeros_like(theta)
    shifted = theta.copy()
    for layer in range(theta.shape[0]):
        for q in range(n):
            shifted[layer, q] = theta[layer, q] + np.pi / 2
            plus = cot @ (np.abs(simulate_state(config, shifted, n)) ** 2)
            shifted[layer, q] = theta[layer, q] - np.pi / 2
            minus = cot @ (np.abs(simulate_state(config, shifted, n)) ** 2)
            shifted[layer, q] = theta[layer, q]
            grad[layer, q] = 0.5 * (plus - minus)
    return grad
