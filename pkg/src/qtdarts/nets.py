"""Target networks whose weights arrive as one flat generated vector.

Supported variants: a ReLU MLP classifier, actor and critic heads (MLPs
over the 49-value gridworld observation), and a single-layer LSTM with a
scalar head for next-value prediction. Nothing here owns parameters - every
forward unpacks the flat vector ``kappa`` and every backward returns the
loss gradient with respect to each entry of it, in the same order.

Flat layout (frozen; kappa indices bind to basis states):
  MLP: layer by layer, weight matrix output-major (all incoming weights of
  output unit 0, then unit 1, ...), then that layer's biases.
  LSTM: gates in order (input, forget, cell, output); per gate the input
  weights, the recurrent weights (output-major), then the bias; finally the
  head weights and head bias.
"""

from dataclasses import dataclass

import numpy as np

MLP_CLASSIFIER = "mlp_classifier"
ACTOR = "actor"
CRITIC = "critic"
LSTM_REGRESSOR = "lstm_regressor"

_MLP_VARIANTS = (MLP_CLASSIFIER, ACTOR, CRITIC)

CROSS_ENTROPY = "cross_entropy"
MSE = "mse"


@dataclass(frozen=True)
class NetSpec:
    """Network variant plus its dimension list.

    MLP variants: dims = (inputs, hidden..., outputs).
    LSTM: dims = (input_dim, hidden); the scalar head is implicit.
    """

    variant: str
    dims: tuple

    def __post_init__(self):
        if self.variant not in _MLP_VARIANTS + (LSTM_REGRESSOR,):
            raise ValueError(f"unknown net variant {self.variant!r}")
        if self.variant in _MLP_VARIANTS and len(self.dims) < 2:
            raise ValueError("MLP needs at least input and output dims")
        if self.variant == LSTM_REGRESSOR and len(self.dims) != 2:
            raise ValueError("LSTM spec is (input_dim, hidden)")


def classifier_spec(dims=(784, 128, 64, 2)):
    return NetSpec(MLP_CLASSIFIER, tuple(dims))


def actor_spec(dims=(49, 113, 3)):
    return NetSpec(ACTOR, tuple(dims))


def critic_spec(dims=(49, 113, 1)):
    return NetSpec(CRITIC, tuple(dims))


def lstm_spec(input_dim=1, hidden=20):
    return NetSpec(LSTM_REGRESSOR, (input_dim, hidden))


def param_count(spec):
    """Exact number of scalars in the flat layout."""
    if spec.variant in _MLP_VARIANTS:
        return sum(o * i + o for i, o in zip(spec.dims[:-1], spec.dims[1:]))
    i, h = spec.dims
    return 4 * (h * i + h * h + h) + (h + 1)


def _check_kappa(spec, kappa):
    kappa = np.asarray(kappa, dtype=np.float64)
    expected = param_count(spec)
    if kappa.shape != (expected,):
        raise ValueError(f"parameter vector must have length {expected}, got {kappa.shape}")
    return kappa


def _unpack_mlp(spec, kappa):
    layers = []
    off = 0
    for i, o in zip(spec.dims[:-1], spec.dims[1:]):
        w = kappa[off : off + o * i].reshape(o, i)
        off += o * i
        b = kappa[off : off + o]
        off += o
        layers.append((w, b))
    return layers


def _unpack_lstm(spec, kappa):
    i, h = spec.dims
    gates = []
    off = 0
    for _ in range(4):
        wx = kappa[off : off + h * i].reshape(h, i)
        off += h * i
        u = kappa[off : off + h * h].reshape(h, h)
        off += h * h
        b = kappa[off : off + h]
        off += h
        gates.append((wx, u, b))
    head_w = kappa[off : off + h]
    head_b = kappa[off + h]
    return gates, head_w, head_b


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def net_forward(spec, kappa, x):
    """Evaluate the network; returns (output, cache for net_backward).

    MLPs take x of shape (inputs,) or (batch, inputs) and return logits
    (or a scalar value for a 1-output head). The LSTM takes a window
    (steps,) or (batch, steps) of scalars and returns the prediction made
    after consuming the whole window.
    """
    kappa = _check_kappa(spec, kappa)
    if spec.variant in _MLP_VARIANTS:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        xb = x[None, :] if single else x
        if xb.ndim != 2 or xb.shape[1] != spec.dims[0]:
            raise ValueError(f"input must have {spec.dims[0]} features, got shape {x.shape}")
        layers = _unpack_mlp(spec, kappa)
        acts = [xb]
        h = xb
        for li, (w, b) in enumerate(layers):
            z = h @ w.T + b
            h = np.maximum(z, 0.0) if li < len(layers) - 1 else z
            acts.append(h)
        out = h[0] if single else h
        return out, ("mlp", spec, kappa, acts, single)
    return _lstm_forward(spec, kappa, x)


def _lstm_forward(spec, kappa, window):
    in_dim, hid = spec.dims
    if in_dim != 1:
        raise ValueError("LSTM forward takes scalar-sequence windows (input_dim 1)")
    window = np.asarray(window, dtype=np.float64)
    single = window.ndim == 1
    xb = window[None, :] if single else window
    if xb.ndim != 2 or xb.shape[1] < 1:
        raise ValueError(f"window must be (steps,) or (batch, steps), got shape {window.shape}")
    gates, head_w, head_b = _unpack_lstm(spec, kappa)
    batch = xb.shape[0]
    h = np.zeros((batch, hid))
    c = np.zeros((batch, hid))
    steps = []
    for t in range(xb.shape[1]):
        x_t = xb[:, t : t + 1]
        pre = [x_t @ wx.T + h @ u.T + b for wx, u, b in gates]
        i_g = _sigmoid(pre[0])
        f_g = _sigmoid(pre[1])
        g_g = np.tanh(pre[2])
        o_g = _sigmoid(pre[3])
        c_new = f_g * c + i_g * g_g
        tanh_c = np.tanh(c_new)
        h_new = o_g * tanh_c
        steps.append((x_t, h, c, i_g, f_g, g_g, o_g, tanh_c))
        h, c = h_new, c_new
    pred = h @ head_w + head_b
    out = float(pred[0]) if single else pred
    return out, ("lstm", spec, kappa, xb, steps, h, single)


def net_backward(cache, d_out):
    """Gradient of the loss with respect to every kappa entry."""
    kind = cache[0]
    if kind == "mlp":
        return _mlp_backward(cache, d_out)
    if kind == "lstm":
        return _lstm_backward(cache, d_out)
    raise ValueError("cache does not come from net_forward")


def _mlp_backward(cache, d_out):
    _, spec, kappa, acts, single = cache
    layers = _unpack_mlp(spec, kappa)
    d_out = np.asarray(d_out, dtype=np.float64)
    d_h = d_out[None, :] if single else d_out
    if d_h.shape != acts[-1].shape:
        raise ValueError(f"output gradient shape {d_out.shape} does not match forward output")
    grad = np.zeros_like(kappa)
    g_layers = _unpack_mlp(spec, grad)
    for li in range(len(layers) - 1, -1, -1):
        w, _ = layers[li]
        gw, gb = g_layers[li]
        if li < len(layers) - 1:
            d_h = d_h * (acts[li + 1] > 0.0)
        gw += d_h.T @ acts[li]
        gb += d_h.sum(axis=0)
        if li > 0:
            d_h = d_h @ w
    return grad


def _lstm_backward(cache, d_out):
    _, spec, kappa, xb, steps, h_last, single = cache
    in_dim, hid = spec.dims
    gates, head_w, _ = _unpack_lstm(spec, kappa)
    batch = xb.shape[0]
    d_pred = np.asarray(d_out, dtype=np.float64).reshape(-1)
    if d_pred.shape != (batch,):
        raise ValueError("output gradient does not match forward batch")
    grad = np.zeros_like(kappa)
    g_gates, g_head_w, _ = _unpack_lstm(spec, grad)
    # head slots sit at the end of the flat layout
    grad[-hid - 1 : -1] = h_last.T @ d_pred
    grad[-1] = d_pred.sum()
    d_h = d_pred[:, None] * head_w
    d_c = np.zeros((batch, hid))
    for t in range(len(steps) - 1, -1, -1):
        x_t, h_prev, c_prev, i_g, f_g, g_g, o_g, tanh_c = steps[t]
        d_o = d_h * tanh_c
        d_c = d_c + d_h * o_g * (1.0 - tanh_c * tanh_c)
        d_i = d_c * g_g
        d_f = d_c * c_prev
        d_g = d_c * i_g
        d_pre = (
            d_i * i_g * (1.0 - i_g),
            d_f * f_g * (1.0 - f_g),
            d_g * (1.0 - g_g * g_g),
            d_o * o_g * (1.0 - o_g),
        )
        d_h = np.zeros((batch, hid))
        for gi in range(4):
            wx, u, _ = gates[gi]
            g_wx, g_u, g_b = g_gates[gi]
            g_wx += d_pre[gi].T @ x_t
            g_u += d_pre[gi].T @ h_prev
            g_b += d_pre[gi].sum(axis=0)
            d_h += d_pre[gi] @ u
        d_c = d_c * f_g
    return grad


def loss_and_grad(kind, prediction, target):
    """Scalar loss and its gradient with respect to the prediction.

    cross_entropy: prediction is logits (C,) or (batch, C), target the true
    class index (int or (batch,) ints); softmax is log-sum-exp stabilised
    and the loss is averaged over the batch.
    mse: mean squared error over all prediction entries.
    """
    if kind == CROSS_ENTROPY:
        logits = np.asarray(prediction, dtype=np.float64)
        single = logits.ndim == 1
        zb = logits[None, :] if single else logits
        if zb.size == 0:
            raise ValueError("empty logits")
        tb = np.atleast_1d(np.asarray(target, dtype=np.int64))
        if tb.shape != (zb.shape[0],):
            raise ValueError(f"targets shape {tb.shape} does not match batch {zb.shape[0]}")
        shifted = zb - zb.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        log_probs = shifted - log_z
        batch = zb.shape[0]
        loss = -log_probs[np.arange(batch), tb].mean()
        d = np.exp(log_probs)
        d[np.arange(batch), tb] -= 1.0
        d /= batch
        return float(loss), (d[0] if single else d)
    if kind == MSE:
        pred = np.asarray(prediction, dtype=np.float64)
        targ = np.asarray(target, dtype=np.float64)
        if pred.size == 0:
            raise ValueError("empty prediction")
        if pred.shape != targ.shape:
            raise ValueError(f"prediction shape {pred.shape} != target shape {targ.shape}")
        diff = pred - targ
        loss = float(np.mean(diff * diff))
        grad = 2.0 * diff / diff.size
        return loss, (grad if pred.ndim else float(grad))
    raise ValueError(f"unknown loss kind {kind!r}")
