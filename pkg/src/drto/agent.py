"""Online learning agent: DNN -> order-preserving candidates -> optimal
bandwidth per candidate -> best candidate -> replay -> periodic training.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .allocator import FrameAllocator
from .nn import AdamState, Mlp, ReplayMemory, train_batch
from .quantizer import QuantizerState, quantize
from .system import ChannelState, OffloadDecision, SystemParams

__all__ = ["AgentConfig", "FrameRecord", "DrtoAgent", "select_best"]


@dataclass
class AgentConfig:
    delta_train: int = 10
    batch_size: int = 128
    memory_size: int = 1024
    learning_rate: float = 0.01
    hidden: tuple[int, ...] = (120, 80)
    init_std: float = 0.1
    # candidate-count update interval; only read when adaptive_k is on
    delta_big: int = 64
    adaptive_k: bool = True

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        for name in ("delta_train", "batch_size", "memory_size", "delta_big"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")

    @classmethod
    def from_sections(cls, agent: Mapping[str, Any] | None = None,
                      quantizer: Mapping[str, Any] | None = None) -> "AgentConfig":
        kwargs = dict(agent or {})
        if quantizer:
            q = dict(quantizer)
            if "delta_big" in q:
                kwargs["delta_big"] = q.pop("delta_big")
            if "adaptive_k" in q:
                kwargs["adaptive_k"] = q.pop("adaptive_k")
            if q:
                raise ValueError(f"unknown quantizer key(s): {sorted(q)}")
        return cls(**kwargs)


@dataclass
class FrameRecord:
    frame: int
    decision: OffloadDecision
    # None for policies without a candidate list
    k_star: int | None
    k_used: int | None
    loss: float | None = None
    decide_seconds: float = 0.0
    train_seconds: float = 0.0
    candidate_costs: list[float] = field(default_factory=list)

    @property
    def cost(self) -> float:
        return self.decision.cost


def select_best(params: SystemParams, channel: ChannelState, candidates
                ) -> tuple[OffloadDecision, int, list[float]]:
    """Allocate each candidate; return the cheapest (first on ties) and its 1-based index."""
    frame_alloc = FrameAllocator(params, channel)
    best = None
    best_idx = 0
    costs = []
    for i, x in enumerate(candidates):
        dec = frame_alloc.solve(x)
        costs.append(dec.cost)
        if best is None or dec.cost < best.cost:
            best, best_idx = dec, i
    return best, best_idx + 1, costs


class DrtoAgent:
    """Single-owner online agent.

    ``gain_scale`` holds the reference gains ``[h_1, ..., h_N, h_TC]`` the raw
    channel is divided by before entering the network (typically the mean
    gains of the channel model).
    """

    def __init__(self, params: SystemParams, gain_scale, config: AgentConfig | None = None,
                 rng: np.random.Generator | int | None = None):
        self.params = params
        self.config = config or AgentConfig()
        self.gain_scale = np.asarray(gain_scale, dtype=float).reshape(-1)
        n = params.n_st
        if self.gain_scale.shape != (n + 1,) or np.any(self.gain_scale <= 0):
            raise ValueError(f"gain_scale must hold {n + 1} positive values")
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        cfg = self.config
        self.net = Mlp.for_stations(n, hidden=cfg.hidden, rng=self.rng, init_std=cfg.init_std)
        self.opt = AdamState(learning_rate=cfg.learning_rate)
        self.memory = ReplayMemory(cfg.memory_size, n + 1, n)
        self.quantizer = QuantizerState(n, cfg.delta_big)

    def normalize(self, channel: ChannelState) -> np.ndarray:
        return channel.vector / self.gain_scale

    def decide(self, channel: ChannelState, frame: int | None = None) -> FrameRecord:
        """Pick the best of the current ``K_t`` candidates; no learning side effects."""
        start = time.perf_counter()
        x_hat = self.net.forward(self.normalize(channel))
        k_used = self.quantizer.k_current
        candidates = quantize(x_hat, k_used)
        try:
            best, k_star, costs = select_best(self.params, channel, candidates)
        except ValueError as exc:
            raise type(exc)(f"frame {channel.frame if frame is None else frame}: {exc}") from exc
        elapsed = time.perf_counter() - start
        return FrameRecord(channel.frame if frame is None else frame, best, k_star, k_used,
                           decide_seconds=elapsed, candidate_costs=costs)

    def step(self, channel: ChannelState, frame: int) -> FrameRecord:
        """Run one full frame ``t = frame`` (1-based) of the online loop."""
        if frame < 1:
            raise ValueError("frames are numbered from 1")
        if self.config.adaptive_k:
            self.quantizer.maybe_adjust_k(frame)
        record = self.decide(channel, frame)
        self.memory.push(self.normalize(channel), record.decision.x)
        self.quantizer.record_best(record.k_star)
        if frame % self.config.delta_train == 0:
            start = time.perf_counter()
            batch = self.memory.sample(self.config.batch_size, self.rng)
            record.loss = train_batch(self.net, self.opt, batch)
            record.train_seconds = time.perf_counter() - start
        return record
