"""Small numpy multilayer perceptron with manual backprop, Adam, and a FIFO
replay memory.

Hidden layers use ReLU, the output layer a sigmoid. Training minimizes the
mean binary cross-entropy between the (clipped) sigmoid outputs and binary
labels.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mlp",
    "AdamState",
    "ReplayMemory",
    "TrainingError",
    "binary_cross_entropy",
    "train_batch",
    "save_checkpoint",
    "load_checkpoint",
    "PROB_CLIP",
]

PROB_CLIP = 1e-7
CHECKPOINT_FORMAT = "drto-mlp-v1"


class TrainingError(RuntimeError):
    pass


def _sigmoid(z):
    # capping the exponent avoids overflow; the result is clipped afterwards anyway
    return 1.0 / (1.0 + np.exp(np.minimum(-z, 700.0)))


class Mlp:
    """Fully connected network; ``weights[i]`` has shape ``(dims[i], dims[i+1])``."""

    def __init__(self, layer_dims, rng: np.random.Generator | None = None,
                 init_std: float = 0.1):
        self.layer_dims = [int(d) for d in layer_dims]
        if len(self.layer_dims) < 2 or min(self.layer_dims) < 1:
            raise ValueError(f"invalid layer dims {layer_dims}")
        rng = np.random.default_rng() if rng is None else rng
        self.weights = [rng.normal(0.0, init_std, size=(a, b))
                        for a, b in zip(self.layer_dims[:-1], self.layer_dims[1:])]
        self.biases = [np.zeros(b) for b in self.layer_dims[1:]]

    @classmethod
    def for_stations(cls, n_st: int, hidden=(120, 80), rng=None, init_std=0.1) -> "Mlp":
        return cls([n_st + 1, *hidden, n_st], rng=rng, init_std=init_std)

    @property
    def params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def _check_input(self, inputs: np.ndarray) -> np.ndarray:
        inputs = np.asarray(inputs, dtype=float)
        if inputs.shape[-1] != self.layer_dims[0]:
            raise ValueError(f"expected input width {self.layer_dims[0]}, "
                             f"got shape {inputs.shape}")
        if not np.isfinite(inputs.sum()):
            raise ValueError("network input contains non-finite values")
        return inputs

    def logits(self, inputs) -> np.ndarray:
        a = self._check_input(inputs)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < last:
                a = np.maximum(a, 0.0)
        return a

    def forward(self, inputs) -> np.ndarray:
        """Relaxed locations in ``[PROB_CLIP, 1 - PROB_CLIP]``; accepts 1-D or batched input."""
        z = np.atleast_1d(self.logits(inputs))
        return np.clip(_sigmoid(z), PROB_CLIP, 1.0 - PROB_CLIP)

    __call__ = forward

    def loss_and_grads(self, inputs, labels) -> tuple[float, list[np.ndarray]]:
        """Mean cross-entropy and its gradients, ordered like ``params``."""
        inputs = np.atleast_2d(self._check_input(inputs))
        labels = np.atleast_2d(np.asarray(labels, dtype=float))
        acts = [inputs]
        pre = []
        a = inputs
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            pre.append(z)
            a = np.maximum(z, 0.0) if i < last else z
            acts.append(a)
        prob = np.clip(_sigmoid(pre[-1]), PROB_CLIP, 1.0 - PROB_CLIP)
        loss = binary_cross_entropy(prob, labels)

        # d(mean BCE)/d(logit) for a sigmoid output
        delta = (prob - labels) / labels.size
        gw = [None] * len(self.weights)
        gb = [None] * len(self.biases)
        for i in range(last, -1, -1):
            gw[i] = acts[i].T @ delta
            gb[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (pre[i - 1] > 0)
        return loss, [*gw, *gb]

    def copy(self) -> "Mlp":
        other = Mlp.__new__(Mlp)
        other.layer_dims = list(self.layer_dims)
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other


def binary_cross_entropy(prob, labels) -> float:
    prob = np.clip(np.asarray(prob, dtype=float), PROB_CLIP, 1.0 - PROB_CLIP)
    labels = np.asarray(labels, dtype=float)
    return float(-np.mean(labels * np.log(prob) + (1.0 - labels) * np.log(1.0 - prob)))


@dataclass
class AdamState:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    m: list | None = None
    v: list | None = None

    def apply(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """One in-place Adam update of ``params``."""
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.step_count += 1
        t = self.step_count
        corr1 = 1.0 - self.beta1**t
        corr2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / corr1) / (np.sqrt(v / corr2) + self.epsilon)


def train_batch(net: Mlp, opt: AdamState, batch) -> float:
    """One Adam step on ``batch`` (``(inputs, labels)`` arrays or a list of pairs).

    Returns the loss measured before the update.
    """
    if isinstance(batch, tuple) and len(batch) == 2 and np.ndim(batch[0]) == 2:
        inputs, labels = batch
    else:
        if len(batch) == 0:
            raise ValueError("empty training batch")
        inputs = np.stack([b[0] for b in batch])
        labels = np.stack([b[1] for b in batch])
    if len(inputs) == 0:
        raise ValueError("empty training batch")
    labels = np.asarray(labels, dtype=float)
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be binary")
    loss, grads = net.loss_and_grads(inputs, labels)
    if not np.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss} on batch of {len(inputs)}; "
                            f"input range [{np.min(inputs)}, {np.max(inputs)}]")
    opt.apply(net.params, grads)
    if not all(np.all(np.isfinite(p)) for p in net.params):
        raise TrainingError(f"non-finite parameters after Adam step {opt.step_count}")
    return loss


class ReplayMemory:
    """Fixed-capacity ring buffer of (state, label) pairs; the oldest entry is overwritten first."""

    def __init__(self, capacity: int, state_dim: int, label_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.labels = np.zeros((capacity, label_dim), dtype=np.int8)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def push(self, state, label) -> "ReplayMemory":
        label = np.asarray(label)
        if label.shape != (self.labels.shape[1],):
            raise ValueError(f"label must have length {self.labels.shape[1]}")
        self.states[self.cursor] = state
        self.labels[self.cursor] = label
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        return self

    def entries(self) -> tuple[np.ndarray, np.ndarray]:
        """Stored pairs in insertion order, oldest first."""
        if self.size < self.capacity:
            idx = np.arange(self.size)
        else:
            idx = (self.cursor + np.arange(self.capacity)) % self.capacity
        return self.states[idx], self.labels[idx]

    def sample(self, batch_size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Uniform batch; without replacement when enough entries are stored."""
        if self.size == 0:
            raise RuntimeError("cannot sample from an empty replay memory")
        if self.size < batch_size:
            idx = rng.integers(0, self.size, size=batch_size)
        else:
            idx = rng.choice(self.size, size=batch_size, replace=False)
        return self.states[idx], self.labels[idx].astype(float)


def save_checkpoint(net: Mlp, path, opt: AdamState | None = None) -> None:
    """Write ``net`` (and optionally its Adam state) as JSON, atomically.

    Layout: ``{"format", "layer_dims", "weights": [row-major flat lists],
    "biases": [...], "adam": {...} | null}``.
    """
    payload = {
        "format": CHECKPOINT_FORMAT,
        "layer_dims": net.layer_dims,
        "weights": [w.ravel().tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "adam": None,
    }
    if opt is not None:
        payload["adam"] = {
            "learning_rate": opt.learning_rate, "beta1": opt.beta1, "beta2": opt.beta2,
            "epsilon": opt.epsilon, "step_count": opt.step_count,
            "m": None if opt.m is None else [a.ravel().tolist() for a in opt.m],
            "v": None if opt.v is None else [a.ravel().tolist() for a in opt.v],
        }
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def load_checkpoint(path) -> tuple[Mlp, AdamState | None]:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
    dims = payload["layer_dims"]
    net = Mlp.__new__(Mlp)
    net.layer_dims = list(dims)
    shapes = list(zip(dims[:-1], dims[1:]))
    net.weights = [np.asarray(w, dtype=float).reshape(s) for w, s in zip(payload["weights"], shapes)]
    net.biases = [np.asarray(b, dtype=float) for b in payload["biases"]]
    opt = None
    if payload.get("adam") is not None:
        a = payload["adam"]
        opt = AdamState(a["learning_rate"], a["beta1"], a["beta2"], a["epsilon"], a["step_count"])
        if a["m"] is not None:
            ref = net.params
            opt.m = [np.asarray(x, dtype=float).reshape(p.shape) for x, p in zip(a["m"], ref)]
            opt.v = [np.asarray(x, dtype=float).reshape(p.shape) for x, p in zip(a["v"], ref)]
    return net, opt
