"""Differentiable mixture of the 12 candidate circuits.

All candidates share one angle matrix; each carries a real structural
weight. The mixture output is the plain weighted sum of the candidates'
probability vectors (weights are unconstrained by default; a softmax
reparameterisation can be enabled for DARTS-style comparisons). The four
Rz-only candidates produce angle-independent distributions - uniform with
the Hadamard layer, a point mass on basis 0 without - so their vectors are
written in closed form and they are skipped in the angle backward pass.
"""

from dataclasses import dataclass, field

import numpy as np

from .circuits import ALL_CONFIGS, NUM_CONFIGS, RZ, simulate_state, validate_angles
from .gradients import prob_vjp


def uniform_weights():
    """Initial structural weights: 1/12 each."""
    return np.full(NUM_CONFIGS, 1.0 / NUM_CONFIGS)


@dataclass
class EnsembleState:
    """Trainable ensemble: shared angles, structural weights, qubit count."""

    theta: np.ndarray
    weights: np.ndarray
    n_qubits: int
    softmax: bool = False

    def __post_init__(self):
        self.theta = validate_angles(self.theta, self.n_qubits)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (NUM_CONFIGS,):
            raise ValueError(f"need {NUM_CONFIGS} structural weights, got {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("structural weights must be finite")

    @property
    def depth(self):
        return self.theta.shape[0]


@dataclass
class EnsembleCache:
    theta: np.ndarray
    raw_weights: np.ndarray
    eff_weights: np.ndarray
    n_qubits: int
    softmax: bool
    probs: np.ndarray = field(repr=False)  # (12, 2**n)
    states: list = field(repr=False)  # final statevectors; None for Rz configs


def _fixed_rz_probs(config, n):
    dim = 1 << n
    if config.hadamard:
        return np.full(dim, 1.0 / dim)
    p = np.zeros(dim)
    p[0] = 1.0
    return p


def ensemble_forward(state):
    """Mixture probability vector plus the cache for the backward pass."""
    n = state.n_qubits
    dim = 1 << n
    eff = _softmax(state.weights) if state.softmax else state.weights
    probs = np.empty((NUM_CONFIGS, dim))
    states = [None] * NUM_CONFIGS
    for j, config in enumerate(ALL_CONFIGS):
        if config.rotation == RZ:
            probs[j] = _fixed_rz_probs(config, n)
        else:
            psi = simulate_state(config, state.theta, n)
            states[j] = psi
            probs[j] = np.abs(psi) ** 2
    p_ens = np.zeros(dim)
    for j in range(NUM_CONFIGS):  # fixed config-index reduction order
        p_ens += eff[j] * probs[j]
    cache = EnsembleCache(
        theta=state.theta.copy(),
        raw_weights=state.weights.copy(),
        eff_weights=np.asarray(eff, dtype=np.float64).copy(),
        n_qubits=n,
        softmax=state.softmax,
        probs=probs,
        states=states,
    )
    return p_ens, cache


def ensemble_backward(cache, cot):
    """Gradients (d theta, d weights) of ``cot . p_ens`` from a forward cache."""
    cot = np.asarray(cot, dtype=np.float64)
    if cot.shape != (1 << cache.n_qubits,):
        raise ValueError(
            f"cotangent shape {cot.shape} does not match cached qubit count {cache.n_qubits}"
        )
    d_eff = cache.probs @ cot
    dtheta = np.zeros_like(cache.theta)
    for j, config in enumerate(ALL_CONFIGS):
        if config.rotation == RZ or cache.eff_weights[j] == 0.0:
            continue
        dtheta += cache.eff_weights[j] * prob_vjp(
            config, cache.theta, cache.n_qubits, cot, ket=cache.states[j]
        )
    if cache.softmax:
        w = cache.eff_weights
        dw = w * (d_eff - float(d_eff @ w))
    else:
        dw = d_eff
    return dtheta, dw


def _softmax(v):
    e = np.exp(v - np.max(v))
    return e / e.sum()
