"""Order-preserving quantization of a relaxed location vector, plus the
adaptive schedule for the number of candidates ``K_t``.

Candidate indices exposed to callers are 1-based, matching ``k_t*``.
"""

from __future__ import annotations

from collections import deque

import numpy as np

__all__ = ["quantize", "QuantizerState"]


def quantize(x_hat, k: int) -> list[np.ndarray]:
    """Return ``k`` binary candidates generated from ``x_hat``.

    Candidate 1 rounds at 0.5 (exactly 0.5 maps to 0). Candidate ``j >= 2``
    thresholds every entry against the pivot ``x_hat_(j-1)``, the entry with
    the (j-1)-th smallest distance to 0.5; entries equal to the pivot go to 1
    when the pivot is <= 0.5 and to 0 otherwise. Distance ties are broken by
    ascending ST index.
    """
    x_hat = np.asarray(x_hat, dtype=float).reshape(-1)
    n = x_hat.size
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    values = x_hat.tolist()
    if not (min(values) > 0 and max(values) < 1):
        raise ValueError("x_hat entries must lie in the open interval (0, 1)")

    candidates = [np.array([v > 0.5 for v in values], dtype=np.int8)]
    if k == 1:
        return candidates
    # sorted() is stable, so equal distances keep ascending ST index
    order = sorted(range(n), key=lambda i: abs(values[i] - 0.5))
    for j in range(k - 1):
        pivot = values[order[j]]
        if pivot <= 0.5:
            bits = [v >= pivot for v in values]
        else:
            bits = [v > pivot for v in values]
        candidates.append(np.array(bits, dtype=np.int8))
    return candidates


class QuantizerState:
    """Mutable ``K_t`` schedule.

    ``K_1 = N``; on frames with ``t % delta_big == 0`` the count becomes
    ``min(max(k*_{t-1}, ..., k*_{t-delta_big}) + 1, N)``; otherwise it is
    carried over. The window holds the ``delta_big`` most recent ``k*``.
    """

    def __init__(self, n_st: int, delta_big: int = 64):
        if n_st < 1:
            raise ValueError("n_st must be positive")
        if delta_big < 1:
            raise ValueError("delta_big must be a positive integer")
        self.n_st = n_st
        self.delta_big = delta_big
        self.k_current = n_st
        self.best_index_window: deque[int] = deque(maxlen=delta_big)

    def record_best(self, k_star: int) -> "QuantizerState":
        if not 1 <= k_star <= self.k_current:
            raise ValueError(f"k_star={k_star} outside [1, {self.k_current}]")
        self.best_index_window.append(int(k_star))
        return self

    def maybe_adjust_k(self, frame: int, n_st: int | None = None) -> "QuantizerState":
        """Set ``K_t`` for frame ``frame``; call before deciding that frame."""
        if frame < 1:
            raise ValueError("frame indices start at 1")
        n = self.n_st if n_st is None else n_st
        if frame == 1:
            self.k_current = n
        elif frame % self.delta_big == 0 and self.best_index_window:
            self.k_current = min(max(self.best_index_window) + 1, n)
        return self

    def __repr__(self):
        return (f"QuantizerState(n_st={self.n_st}, delta_big={self.delta_big}, "
                f"k_current={self.k_current}, window={list(self.best_index_window)})")
