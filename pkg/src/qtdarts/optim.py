"""Adam and RMSProp over named parameter groups.

Parameters travel as a dict of float64 arrays (here: circuit angles,
structural weights, mapping coefficients) and one optimizer instance
updates the whole dict jointly. Steps are purely arithmetic - identical
state and gradients give bit-identical trajectories. ``*_step`` returns a
fresh params dict and mutates the passed state; callers that share
parameters across workers commit both under one lock.
"""

from dataclasses import dataclass, field

import numpy as np


def _check_trees(params, grads, accs):
    if set(params) != set(grads) or set(params) != set(accs):
        raise ValueError("parameter, gradient and state keys must match")
    for name, p in params.items():
        if np.shape(grads[name]) != np.shape(p):
            raise ValueError(f"gradient shape mismatch for {name!r}")


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_init(params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
    return AdamState(
        lr=lr,
        beta1=betas[0],
        beta2=betas[1],
        eps=eps,
        m={k: np.zeros_like(v) for k, v in params.items()},
        v={k: np.zeros_like(v) for k, v in params.items()},
    )


def adam_step(state, params, grads):
    """One bias-corrected Adam update; returns the new params dict."""
    _check_trees(params, grads, state.m)
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    new = {}
    for name, p in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        new[name] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new


@dataclass
class RmsPropState:
    lr: float = 0.01
    alpha: float = 0.99
    eps: float = 1e-8
    step: int = 0
    v: dict = field(default_factory=dict)


def rmsprop_init(params, lr=0.01, alpha=0.99, eps=1e-8):
    return RmsPropState(lr=lr, alpha=alpha, eps=eps, v={k: np.zeros_like(v) for k, v in params.items()})


def rmsprop_step(state, params, grads):
    """One RMSProp update, epsilon outside the root; returns new params."""
    _check_trees(params, grads, state.v)
    state.step += 1
    new = {}
    for name, p in params.items():
        g = np.asarray(grads[name], dtype=np.float64)
        state.v[name] = state.alpha * state.v[name] + (1.0 - state.alpha) * g * g
        new[name] = p - state.lr * g / (np.sqrt(state.v[name]) + state.eps)
    return new
