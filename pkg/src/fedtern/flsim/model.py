"""A small dense classifier with hand-rolled gradients.

Tanh hidden layers, linear output, softmax cross-entropy loss.  Parameters
are a flat list of tensors [W1, b1, W2, b2, ...], so an architecture with
``len(hidden)`` hidden layers has L = 2 * (len(hidden) + 1) tensors.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def init_model(features: int, hidden: Sequence[int], classes: int,
               rng: np.random.Generator) -> list[np.ndarray]:
    sizes = [features, *hidden, classes]
    theta = []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        theta.append(rng.normal(scale=1.0 / np.sqrt(fan_in), size=(fan_in, fan_out)))
        theta.append(np.zeros(fan_out))
    return theta


def model_nbytes(theta: Sequence[np.ndarray]) -> int:
    return sum(t.size * 8 for t in theta)


def _forward(theta: Sequence[np.ndarray], X: np.ndarray):
    activations = [X]
    a = X
    n_layers = len(theta) // 2
    for layer in range(n_layers):
        z = a @ theta[2 * layer] + theta[2 * layer + 1]
        a = z if layer == n_layers - 1 else np.tanh(z)
        activations.append(a)
    return activations


def logits(theta: Sequence[np.ndarray], X: np.ndarray) -> np.ndarray:
    return _forward(theta, X)[-1]


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(theta: Sequence[np.ndarray], X: np.ndarray,
                   y: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy and its gradient for every tensor."""
    acts = _forward(theta, X)
    probs = _softmax(acts[-1])
    batch = len(y)
    loss = float(-np.log(probs[np.arange(batch), y] + 1e-12).mean())
    delta = probs.copy()
    delta[np.arange(batch), y] -= 1.0
    delta /= batch
    grads: list[np.ndarray] = [None] * len(theta)
    n_layers = len(theta) // 2
    for layer in reversed(range(n_layers)):
        a_prev = acts[layer]
        grads[2 * layer] = a_prev.T @ delta
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ theta[2 * layer].T) * (1.0 - acts[layer] ** 2)
    return loss, grads


def predict(theta: Sequence[np.ndarray], X: np.ndarray) -> np.ndarray:
    return logits(theta, X).argmax(axis=1)


def evaluate_counts(theta: Sequence[np.ndarray], X: np.ndarray,
                    y: np.ndarray) -> tuple[int, int]:
    """(correct, total) so a coordinator can pool accuracies without raw data."""
    if len(y) == 0:
        return 0, 0
    return int((predict(theta, X) == y).sum()), len(y)


def local_train(theta: Sequence[np.ndarray], X: np.ndarray, y: np.ndarray,
                epochs: int, batch_size: int, eta: float,
                rng: np.random.Generator) -> list[np.ndarray]:
    """E epochs of mini-batch SGD from theta; returns trained minus initial."""
    current = [t.copy() for t in theta]
    n = len(y)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            _, grads = loss_and_grads(current, X[batch], y[batch])
            for t, g in zip(current, grads):
                t -= eta * g
    return [t - t0 for t, t0 in zip(current, theta)]
