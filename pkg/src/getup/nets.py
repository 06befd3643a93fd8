"""Dense networks with hand-written backprop, and the Adam optimizer.

Everything is float64 numpy. Forward passes return a cache that the matching
backward pass consumes, so the functions stay pure and finite-difference
checkable.
"""

from __future__ import annotations

import numpy as np


class MLP:
    """Fully-connected network, rectified-linear hidden units, linear output.

    Parameters are a flat list [W1, b1, W2, b2, ...]; layer sizes are fixed at
    construction.
    """

    def __init__(self, sizes, rng: np.random.Generator, final_scale: float = 1.0):
        self.sizes = list(sizes)
        self.weights = []
        self.biases = []
        n_layers = len(sizes) - 1
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
            if i == n_layers - 1:
                w *= final_scale
            self.weights.append(w)
            self.biases.append(np.zeros(fan_out))

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def parameters(self) -> list:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def set_parameters(self, params: list):
        expect = self.parameters()
        if len(params) != len(expect):
            raise ValueError(f"expected {len(expect)} parameter arrays")
        for i in range(0, len(params), 2):
            self.weights[i // 2] = np.asarray(params[i], dtype=float)
            self.biases[i // 2] = np.asarray(params[i + 1], dtype=float)

    def copy(self) -> "MLP":
        clone = MLP.__new__(MLP)
        clone.sizes = list(self.sizes)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def forward(self, x: np.ndarray):
        """Returns (output, cache). x has shape (batch, in_dim)."""
        h = x
        pre = []
        acts = [x]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if i < last:
                pre.append(z)
                h = np.maximum(z, 0.0)
                acts.append(h)
            else:
                h = z
        return h, (acts, pre)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache, grad_out: np.ndarray):
        """Gradients for every parameter plus the input, given dL/d(output)."""
        acts, pre = cache
        grads = [None] * (2 * len(self.weights))
        g = grad_out
        for i in range(len(self.weights) - 1, -1, -1):
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.weights[i].T
            if i > 0:
                g = g * (pre[i - 1] > 0.0)
        return grads, g


class Adam:
    """Adaptive moment estimation over a list of parameter arrays."""

    def __init__(self, params: list, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list, grads: list):
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)

    def state_arrays(self) -> list:
        """Moment arrays in a stable order for checkpointing."""
        return list(self.m) + list(self.v)

    def load_state_arrays(self, arrays: list, t: int):
        k = len(self.m)
        if len(arrays) != 2 * k:
            raise ValueError("adam state array count mismatch")
        self.m = [np.asarray(a, dtype=float) for a in arrays[:k]]
        self.v = [np.asarray(a, dtype=float) for a in arrays[k:]]
        self.t = t


def softplus(x):
    return np.logaddexp(0.0, x)


def log1m_tanh2(u):
    """log(1 - tanh(u)^2), stable for large |u|."""
    return 2.0 * (np.log(2.0) - u - softplus(-2.0 * u))
