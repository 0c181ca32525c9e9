"""Independent reference implementations used only by the tests.

The dense simulator builds every gate as a full 2**n x 2**n matrix with
Kronecker products and multiplies them out, sharing no code with the
production kernels.
"""

import numpy as np

from qtdarts.circuits import CHAIN, RING, RX, RY, RZ


def _rot_matrix(axis, angle):
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if axis == RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == RY:
        return np.array([[c, -s], [s, c]])
    if axis == RZ:
        return np.diag([np.exp(-1j * angle / 2), np.exp(1j * angle / 2)])
    raise ValueError(axis)


_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _embed_single(u, qubit, n):
    mat = np.eye(1)
    for q in range(n):
        mat = np.kron(mat, u if q == qubit else np.eye(2))
    return mat


def _cnot_matrix(control, target, n):
    dim = 1 << n
    mat = np.zeros((dim, dim))
    for i in range(dim):
        if (i >> (n - 1 - control)) & 1:
            j = i ^ (1 << (n - 1 - target))
        else:
            j = i
        mat[j, i] = 1.0
    return mat


def dense_unitary(config, theta, n):
    theta = np.asarray(theta, dtype=np.float64)
    u = np.eye(1 << n, dtype=np.complex128)
    if config.hadamard:
        for q in range(n):
            u = _embed_single(_H, q, n) @ u
    if n >= 2:
        pairs = [(q, q + 1) for q in range(n - 1)]
        if config.entangler == RING:
            pairs.append((n - 1, 0))
        elif config.entangler != CHAIN:
            raise ValueError(config.entangler)
    else:
        pairs = []
    for layer in range(theta.shape[0]):
        for q in range(n):
            u = _embed_single(_rot_matrix(config.rotation, theta[layer, q]), q, n) @ u
        for c, t in pairs:
            u = _cnot_matrix(c, t, n) @ u
    return u


def dense_probs(config, theta, n):
    u = dense_unitary(config, theta, n)
    return np.abs(u[:, 0]) ** 2


def central_difference(f, x, h=1e-5):
    """Central finite differences of a scalar function over an array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f(x)
        flat[i] = old - h
        fm = f(x)
        flat[i] = old
        gflat[i] = (fp - fm) / (2 * h)
    return grad
