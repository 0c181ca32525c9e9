"""Map from basis-state labels and mixture probabilities to network weights.

Parameter i of the target network is produced from the binary label of
basis state i (most significant bit first) and that state's probability,
scaled by ``prob_scale`` so it sits on the same footing as the {0,1} bit
features (raw probabilities are O(2**-n) and would otherwise vanish next
to them). The default map is affine - one weight per bit, one for the
scaled probability, one bias - which is the only size consistent with the
published trainable-parameter totals. A one-hidden-layer variant exists
behind ``mapping_hidden`` for experimentation and is off by default.
"""

from dataclasses import dataclass

import numpy as np

from .circuits import NUM_CONFIGS


def required_qubits(p):
    """Qubits needed to index p parameters: ceil(log2 p), minimum 1."""
    if not isinstance(p, (int, np.integer)) or isinstance(p, bool):
        raise ValueError(f"parameter count must be an integer, got {p!r}")
    if p < 1:
        raise ValueError(f"parameter count must be >= 1, got {p}")
    return max(1, int(p - 1).bit_length())


@dataclass
class GeneratorSpec:
    """Shape of one generator: target size, circuit depth, probability scale."""

    param_count: int
    depth: int
    prob_scale: float = None
    mapping_hidden: int = 0  # 0 = affine map (default)

    def __post_init__(self):
        self.n_qt = required_qubits(self.param_count)
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.prob_scale is None:
            self.prob_scale = float(1 << self.n_qt)
        if self.prob_scale <= 0:
            raise ValueError("prob_scale must be positive")
        self._bits = None

    def bit_features(self):
        """(p, n_qt) matrix of basis-label bits, MSB first; built lazily."""
        if self._bits is None:
            idx = np.arange(self.param_count, dtype=np.uint64)
            shifts = np.arange(self.n_qt - 1, -1, -1, dtype=np.uint64)
            self._bits = ((idx[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        return self._bits


@dataclass
class MappingParams:
    """Affine map coefficients: one weight per bit, one for the scaled
    probability (last), plus a bias."""

    weights: np.ndarray
    bias: float

    def to_vector(self):
        return np.concatenate([self.weights, [self.bias]])

    @classmethod
    def from_vector(cls, vec):
        vec = np.asarray(vec, dtype=np.float64)
        return cls(weights=vec[:-1], bias=float(vec[-1]))


@dataclass
class MlpMappingParams:
    """One-hidden-layer tanh map (config-gated alternative to the affine map)."""

    w1: np.ndarray  # (hidden, n_qt + 1)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    def to_vector(self):
        return np.concatenate([self.w1.ravel(), self.b1, self.w2, [self.b2]])

    @classmethod
    def from_vector(cls, vec, n_qt, hidden):
        vec = np.asarray(vec, dtype=np.float64)
        k = hidden * (n_qt + 1)
        return cls(
            w1=vec[:k].reshape(hidden, n_qt + 1),
            b1=vec[k : k + hidden],
            w2=vec[k + hidden : k + 2 * hidden],
            b2=float(vec[-1]),
        )


def mapping_param_count(spec):
    if spec.mapping_hidden == 0:
        return spec.n_qt + 2
    return spec.mapping_hidden * (spec.n_qt + 3) + 1


def total_trainable(spec):
    """Angles + structural weights + mapping coefficients of one generator."""
    return spec.depth * spec.n_qt + NUM_CONFIGS + mapping_param_count(spec)


def init_mapping(spec, rng, scale=0.2):
    """Uniform(-scale, scale) start for the mapping coefficients."""
    if spec.mapping_hidden == 0:
        return MappingParams(
            weights=rng.uniform(-scale, scale, spec.n_qt + 1), bias=float(rng.uniform(-scale, scale))
        )
    h = spec.mapping_hidden
    return MlpMappingParams(
        w1=rng.uniform(-scale, scale, (h, spec.n_qt + 1)),
        b1=rng.uniform(-scale, scale, h),
        w2=rng.uniform(-scale, scale, h),
        b2=float(rng.uniform(-scale, scale)),
    )


@dataclass
class MappingCache:
    spec: GeneratorSpec
    beta: object
    prob_feature: np.ndarray  # prob_scale * p_ens[:p]
    hidden_act: np.ndarray = None  # tanh activations (MLP variant only)


def _check_input(p_ens, spec):
    p_ens = np.asarray(p_ens, dtype=np.float64)
    if p_ens.shape != (1 << spec.n_qt,):
        raise ValueError(
            f"probability vector must have length {1 << spec.n_qt}, got {p_ens.shape}"
        )
    return p_ens


def generate_params(p_ens, spec, beta):
    """Produce the target network's parameter vector; entries of p_ens at
    indices >= param_count are ignored. Returns (kappa, cache)."""
    p_ens = _check_input(p_ens, spec)
    bits = spec.bit_features()
    feat = spec.prob_scale * p_ens[: spec.param_count]
    if spec.mapping_hidden == 0:
        if not isinstance(beta, MappingParams) or beta.weights.shape != (spec.n_qt + 1,):
            raise ValueError("beta does not match the affine mapping layout")
        kappa = bits @ beta.weights[: spec.n_qt] + beta.weights[spec.n_qt] * feat + beta.bias
        return kappa, MappingCache(spec=spec, beta=beta, prob_feature=feat)
    if not isinstance(beta, MlpMappingParams) or beta.w1.shape != (
        spec.mapping_hidden,
        spec.n_qt + 1,
    ):
        raise ValueError("beta does not match the MLP mapping layout")
    x = np.concatenate([bits, feat[:, None]], axis=1)
    hidden = np.tanh(x @ beta.w1.T + beta.b1)
    kappa = hidden @ beta.w2 + beta.b2
    return kappa, MappingCache(spec=spec, beta=beta, prob_feature=feat, hidden_act=hidden)


def mapping_backward(d_kappa, cache):
    """Adjoints of generate_params: (d beta as a flat vector in to_vector
    order, d p_ens over the full 2**n_qt input)."""
    spec = cache.spec
    d_kappa = np.asarray(d_kappa, dtype=np.float64)
    if d_kappa.shape != (spec.param_count,):
        raise ValueError(
            f"output gradient must have length {spec.param_count}, got {d_kappa.shape}"
        )
    bits = spec.bit_features()
    dp_ens = np.zeros(1 << spec.n_qt)
    if spec.mapping_hidden == 0:
        beta = cache.beta
        d_weights = np.empty(spec.n_qt + 1)
        d_weights[: spec.n_qt] = bits.T @ d_kappa
        d_weights[spec.n_qt] = d_kappa @ cache.prob_feature
        d_bias = d_kappa.sum()
        dp_ens[: spec.param_count] = d_kappa * beta.weights[spec.n_qt] * spec.prob_scale
        return np.concatenate([d_weights, [d_bias]]), dp_ens
    beta = cache.beta
    h = cache.hidden_act
    d_w2 = h.T @ d_kappa
    d_b2 = d_kappa.sum()
    d_hidden = np.outer(d_kappa, beta.w2)
    d_pre = d_hidden * (1.0 - h * h)
    x = np.concatenate([bits, cache.prob_feature[:, None]], axis=1)
    d_w1 = d_pre.T @ x
    d_b1 = d_pre.sum(axis=0)
    d_x = d_pre @ beta.w1
    dp_ens[: spec.param_count] = d_x[:, spec.n_qt] * spec.prob_scale
    return np.concatenate([d_w1.ravel(), d_b1, d_w2, [d_b2]]), dp_ens
