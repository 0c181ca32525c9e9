"""Pure-numpy statevector kernels (fallback backend).

Every kernel mutates a contiguous 1-D complex128 state of length 2**n in
place. A qubit is addressed by its pair stride: ``stride = 2**(n - 1 - q)``
with qubit 0 the most significant bit of the basis-state label. Amplitudes
come in pairs ``(i, i + stride)`` differing only in that qubit's bit, so a
single-qubit gate is a 2x2 update over exactly 2**n entries and never
materialises a full matrix.
"""

import numpy as np


def _pairs(state, stride):
    # view with axes (block, qubit bit, offset)
    return state.reshape(-1, 2, stride)


def rot_x(state, stride, c, s):
    v = _pairs(state, stride)
    a0 = v[:, 0, :].copy()
    v[:, 0, :] = c * a0 - 1j * s * v[:, 1, :]
    v[:, 1, :] = c * v[:, 1, :] - 1j * s * a0


def rot_y(state, stride, c, s):
    v = _pairs(state, stride)
    a0 = v[:, 0, :].copy()
    v[:, 0, :] = c * a0 - s * v[:, 1, :]
    v[:, 1, :] = c * v[:, 1, :] + s * a0


def rot_z(state, stride, phase):
    # diagonal: bit 0 picks up `phase`, bit 1 its conjugate
    v = _pairs(state, stride)
    v[:, 0, :] *= phase
    v[:, 1, :] *= np.conj(phase)


def hadamard(state, stride):
    v = _pairs(state, stride)
    a0 = v[:, 0, :].copy()
    inv = 1.0 / np.sqrt(2.0)
    v[:, 0, :] = (a0 + v[:, 1, :]) * inv
    v[:, 1, :] = (a0 - v[:, 1, :]) * inv


def cnot(state, control_stride, target_stride):
    n = state.size
    idx = np.arange(n)
    src = idx[((idx & control_stride) != 0) & ((idx & target_stride) == 0)]
    dst = src | target_stride
    tmp = state[src].copy()
    state[src] = state[dst]
    state[dst] = tmp


def cnot2(bra, ket, control_stride, target_stride):
    cnot(bra, control_stride, target_stride)
    cnot(ket, control_stride, target_stride)


def adj_rot_x(bra, ket, stride, c, s):
    # grad contribution at the current point, then undo Rx on both vectors
    acc = pauli_im_x(bra, ket, stride)
    rot_x(ket, stride, c, -s)
    rot_x(bra, stride, c, -s)
    return acc


def adj_rot_y(bra, ket, stride, c, s):
    acc = pauli_im_y(bra, ket, stride)
    rot_y(ket, stride, c, -s)
    rot_y(bra, stride, c, -s)
    return acc


def pauli_im_x(bra, ket, stride):
    b = _pairs(bra, stride)
    k = _pairs(ket, stride)
    acc = np.sum(np.conj(b[:, 0, :]) * k[:, 1, :] + np.conj(b[:, 1, :]) * k[:, 0, :])
    return float(acc.imag)


def pauli_im_y(bra, ket, stride):
    b = _pairs(bra, stride)
    k = _pairs(ket, stride)
    acc = np.sum(1j * (np.conj(b[:, 1, :]) * k[:, 0, :] - np.conj(b[:, 0, :]) * k[:, 1, :]))
    return float(acc.imag)


def pauli_im_z(bra, ket, stride):
    b = _pairs(bra, stride)
    k = _pairs(ket, stride)
    acc = np.sum(np.conj(b[:, 0, :]) * k[:, 0, :] - np.conj(b[:, 1, :]) * k[:, 1, :])
    return float(acc.imag)
