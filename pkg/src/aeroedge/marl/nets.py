"""Minimal fp64 MLP substrate with hand-written backprop and Adam.

A network is a list of [W, b] pairs; the activation is applied after every
layer except the last unless ``activate_last`` is set. Forward passes return
a cache that the matching backward pass consumes, producing input gradients
plus per-parameter gradients laid out exactly like the parameter list. All
gradients are exact (finite-difference checkable), not approximations.
"""

from __future__ import annotations

import numpy as np


def _tanh(z):
    return np.tanh(z)


def _tanh_grad(z, a):
    return 1.0 - a * a


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_grad(z, a):
    return (z > 0.0).astype(z.dtype)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _sigmoid_grad(z, a):
    return a * (1.0 - a)


def _leaky_relu(z):
    return np.where(z > 0.0, z, 0.01 * z)


def _leaky_relu_grad(z, a):
    return np.where(z > 0.0, 1.0, 0.01)


ACTIVATIONS = {
    "tanh": (_tanh, _tanh_grad),
    "relu": (_relu, _relu_grad),
    "sigmoid": (_sigmoid, _sigmoid_grad),
    "leaky_relu": (_leaky_relu, _leaky_relu_grad),
}

Params = list  # list of [W, b]


def mlp_init(sizes: list[int], rng: np.random.Generator) -> Params:
    """Glorot-uniform weights, zero biases, float64."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
        params.append([w, np.zeros(fan_out)])
    return params


def mlp_forward(params: Params, x: np.ndarray, activation: str,
                activate_last: bool = False):
    """Returns (output, cache); x has shape (batch, in_dim)."""
    act, _ = ACTIVATIONS[activation]
    cache = []
    h = x
    last = len(params) - 1
    for i, (w, b) in enumerate(params):
        z = h @ w + b
        a = act(z) if (i < last or activate_last) else z
        cache.append((h, z, a))
        h = a
    return h, cache


def mlp_backward(params: Params, cache, dy: np.ndarray, activation: str,
                 activate_last: bool = False):
    """Backprop dy through the net; returns (dx, grads) with grads shaped
    like params."""
    _, dact = ACTIVATIONS[activation]
    grads = [None] * len(params)
    last = len(params) - 1
    dh = dy
    for i in range(last, -1, -1):
        w, _ = params[i]
        x_in, z, a = cache[i]
        dz = dh * dact(z, a) if (i < last or activate_last) else dh
        grads[i] = [x_in.T @ dz, dz.sum(axis=0)]
        dh = dz @ w.T
    return dh, grads


def zeros_like_params(params: Params) -> Params:
    return [[np.zeros_like(w), np.zeros_like(b)] for w, b in params]


def add_scaled(target: Params, source: Params, scale: float = 1.0) -> None:
    for (tw, tb), (sw, sb) in zip(target, source):
        tw += scale * sw
        tb += scale * sb


def flatten_params(params: Params) -> np.ndarray:
    return np.concatenate([arr.ravel() for pair in params for arr in pair])


class Adam:
    """Adam over a flat list of parameter arrays (updates in place)."""

    def __init__(self, arrays: list[np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.arrays = arrays
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = [np.zeros_like(a) for a in arrays]
        self.v = [np.zeros_like(a) for a in arrays]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for arr, g, m, v in zip(self.arrays, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            arr -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def param_arrays(*param_lists: Params) -> list[np.ndarray]:
    """Flatten one or more nets into the array list Adam expects."""
    out = []
    for params in param_lists:
        for w, b in params:
            out.append(w)
            out.append(b)
    return out


def grad_arrays(*grad_lists: Params) -> list[np.ndarray]:
    return param_arrays(*grad_lists)
