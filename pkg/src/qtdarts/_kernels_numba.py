"""Numba-compiled statevector kernels (default backend).

Same contract as ``_kernels_numpy``: in-place 2x2 pair updates on a 1-D
complex128 state, qubit addressed by its pair stride. Loops are written
block-wise so each kernel streams the state once; ``nogil`` lets the
asynchronous RL workers overlap circuit evaluation across threads.
"""

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True, fastmath=True)


@njit(**_OPTS)
def rot_x(state, stride, c, s):
    js = 1j * s
    for base in range(0, state.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            a0 = state[i0]
            a1 = state[i1]
            state[i0] = c * a0 - js * a1
            state[i1] = c * a1 - js * a0


@njit(**_OPTS)
def rot_y(state, stride, c, s):
    for base in range(0, state.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            a0 = state[i0]
            a1 = state[i1]
            state[i0] = c * a0 - s * a1
            state[i1] = c * a1 + s * a0


@njit(**_OPTS)
def rot_z(state, stride, phase):
    conj_phase = np.conj(phase)
    for base in range(0, state.size, 2 * stride):
        for i0 in range(base, base + stride):
            state[i0] = state[i0] * phase
            state[i0 + stride] = state[i0 + stride] * conj_phase


@njit(**_OPTS)
def hadamard(state, stride):
    inv = 1.0 / np.sqrt(2.0)
    for base in range(0, state.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            a0 = state[i0]
            a1 = state[i1]
            state[i0] = (a0 + a1) * inv
            state[i1] = (a0 - a1) * inv


@njit(**_OPTS)
def cnot(state, control_stride, target_stride):
    # enumerate exactly the control=1, target=0 indices by re-inserting
    # zero bits at the two gate positions (lower position first)
    lo = min(control_stride, target_stride)
    hi = max(control_stride, target_stride)
    lom = lo - 1
    him = hi - 1
    for k in range(state.size >> 2):
        t1 = ((k & ~lom) << 1) | (k & lom)
        i = (((t1 & ~him) << 1) | (t1 & him)) | control_stride
        j = i | target_stride
        tmp = state[i]
        state[i] = state[j]
        state[j] = tmp


@njit(**_OPTS)
def cnot2(bra, ket, control_stride, target_stride):
    # same CNOT on both sweep vectors in one pass
    lo = min(control_stride, target_stride)
    hi = max(control_stride, target_stride)
    lom = lo - 1
    him = hi - 1
    for k in range(bra.size >> 2):
        t1 = ((k & ~lom) << 1) | (k & lom)
        i = (((t1 & ~him) << 1) | (t1 & him)) | control_stride
        j = i | target_stride
        tmp = bra[i]
        bra[i] = bra[j]
        bra[j] = tmp
        tmp = ket[i]
        ket[i] = ket[j]
        ket[j] = tmp


@njit(**_OPTS)
def adj_rot_x(bra, ket, stride, c, s):
    """Fused adjoint step for an Rx gate: accumulate Im<bra|X|ket> at the
    current point, then undo the rotation on both vectors, one sweep."""
    acc = 0.0
    js = 1j * s
    for base in range(0, bra.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            b0 = bra[i0]
            b1 = bra[i1]
            k0 = ket[i0]
            k1 = ket[i1]
            z = np.conj(b0) * k1 + np.conj(b1) * k0
            acc += z.imag
            ket[i0] = c * k0 + js * k1
            ket[i1] = c * k1 + js * k0
            bra[i0] = c * b0 + js * b1
            bra[i1] = c * b1 + js * b0
    return acc


@njit(**_OPTS)
def adj_rot_y(bra, ket, stride, c, s):
    """Fused adjoint step for an Ry gate (Im<bra|Y|ket>, then undo)."""
    acc = 0.0
    for base in range(0, bra.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            b0 = bra[i0]
            b1 = bra[i1]
            k0 = ket[i0]
            k1 = ket[i1]
            z = 1j * (np.conj(b1) * k0 - np.conj(b0) * k1)
            acc += z.imag
            ket[i0] = c * k0 + s * k1
            ket[i1] = c * k1 - s * k0
            bra[i0] = c * b0 + s * b1
            bra[i1] = c * b1 - s * b0
    return acc


@njit(**_OPTS)
def pauli_im_x(bra, ket, stride):
    acc = 0.0
    for base in range(0, bra.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            z = np.conj(bra[i0]) * ket[i1] + np.conj(bra[i1]) * ket[i0]
            acc += z.imag
    return acc


@njit(**_OPTS)
def pauli_im_y(bra, ket, stride):
    acc = 0.0
    for base in range(0, bra.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            z = 1j * (np.conj(bra[i1]) * ket[i0] - np.conj(bra[i0]) * ket[i1])
            acc += z.imag
    return acc


@njit(**_OPTS)
def pauli_im_z(bra, ket, stride):
    acc = 0.0
    for base in range(0, bra.size, 2 * stride):
        for i0 in range(base, base + stride):
            i1 = i0 + stride
            z = np.conj(bra[i0]) * ket[i0] - np.conj(bra[i1]) * ket[i1]
            acc += z.imag
    return acc
