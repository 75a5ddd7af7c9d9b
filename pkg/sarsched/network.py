# coding=utf-8
"""
Small numpy multilayer perceptrons with hand-written backpropagation.

Hidden layers use tanh; the output layer is linear. Batches are row-major:
inputs have shape (batch, in_features).

"""

from typing import List, Optional, Sequence, Tuple

import numpy as np


class MLP:
    """Fully connected tanh network; weights[k] has shape (in, out)."""

    def __init__(self, sizes: Sequence[int], rng: Optional[np.random.Generator] = None,
                 output_scale: float = 1.0):
        if len(sizes) < 2:
            raise ValueError("an MLP needs at least an input and an output size")
        rng = np.random.default_rng() if rng is None else rng
        self.sizes = tuple(int(s) for s in sizes)
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        last = len(self.sizes) - 2
        for k, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            scale = output_scale if k == last else 1.0
            self.weights.append(rng.normal(0.0, scale / np.sqrt(fan_in), size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def params(self) -> List[np.ndarray]:
        """Weights and biases interleaved: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Output and the per-layer inputs needed by backward()."""
        activations = [x]
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if k == last else np.tanh(z)
            activations.append(h)
        return h, activations

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, activations: List[np.ndarray], d_out: np.ndarray) -> List[np.ndarray]:
        """Gradients in the same order as params, given dLoss/dOutput."""
        grads_w: List[np.ndarray] = [None] * len(self.weights)
        grads_b: List[np.ndarray] = [None] * len(self.weights)
        delta = d_out
        for k in range(len(self.weights) - 1, -1, -1):
            grads_w[k] = activations[k].T @ delta
            grads_b[k] = delta.sum(axis=0)
            if k > 0:
                # tanh' = 1 - tanh^2, evaluated on the stored activation
                delta = (delta @ self.weights[k].T) * (1.0 - activations[k] ** 2)
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.extend((gw, gb))
        return out

    def copy(self) -> "MLP":
        clone = MLP.__new__(MLP)
        clone.sizes = self.sizes
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone


class Adam:
    """Adam over a list of arrays, updated in place."""

    def __init__(self, params: List[np.ndarray], lr: float = 3e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: List[np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


class RunningNorm:
    """Running mean/variance of observations (Welford, batched)."""

    def __init__(self, dim: int, clip: float = 10.0):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 0.0
        self.clip = clip
        self.frozen = False

    def update(self, batch: np.ndarray) -> None:
        if self.frozen:
            return
        batch = np.atleast_2d(batch)
        b_mean, b_var, b_count = batch.mean(axis=0), batch.var(axis=0), batch.shape[0]
        total = self.count + b_count
        delta = b_mean - self.mean
        m2 = self.var * self.count + b_var * b_count + delta ** 2 * self.count * b_count / total
        self.mean = self.mean + delta * b_count / total
        self.var = m2 / total
        self.count = total

    def copy(self) -> "RunningNorm":
        clone = RunningNorm(len(self.mean), self.clip)
        clone.mean, clone.var = self.mean.copy(), self.var.copy()
        clone.count, clone.frozen = self.count, self.frozen
        return clone

    def __call__(self, obs: np.ndarray) -> np.ndarray:
        return np.clip((obs - self.mean) / np.sqrt(self.var + 1e-8), -self.clip, self.clip)
