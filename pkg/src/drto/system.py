"""Physical model of the two-hop satellite-terrestrial offloading system.

Every source terminal (ST) uploads one task of ``task_bits`` bits to the
access satellite (1st hop). The satellite either computes it on board
(``x_n = 1``) or forwards it to the terrestrial cloud over the 2nd hop
(``x_n = 0``). Both hops share one bandwidth budget ``B`` split by the
fractions ``alpha[0:N]`` (1st hop) and ``alpha[N:2N]`` (2nd hop).

All quantities are linear units (W, Hz, bits, s, J).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "SystemParams",
    "ChannelState",
    "OffloadDecision",
    "rate_first_hop",
    "rate_second_hop",
    "cost_sat_path",
    "cost_tc_path",
    "eval_cost",
    "total_latency_energy",
]

ALLOC_SUM_TOL = 1e-9


class DomainError(ValueError):
    """Raised when a cost term is evaluated outside its domain (e.g. zero bandwidth)."""


@dataclass(frozen=True)
class SystemParams:
    n_st: int = 5
    bandwidth_total: float = 800e6
    p_st: tuple[float, ...] | None = None
    p_sat: float = 3.0
    noise: float = 1e-9
    # 100 MB read as decimal megabytes
    task_bits: float = 8e8
    intensity: float = 10.0
    f_sat: float = 0.4e9
    f_tc: float = 3e9
    p_compute_sat: float = 0.5
    lam: float = 0.5

    def __post_init__(self):
        if int(self.n_st) != self.n_st or self.n_st < 1:
            raise ValueError(f"n_st must be a positive integer, got {self.n_st!r}")
        object.__setattr__(self, "n_st", int(self.n_st))
        p_st = self.p_st
        if p_st is None:
            p_st = (1.0,) * self.n_st
        elif np.isscalar(p_st):
            p_st = (float(p_st),) * self.n_st
        p_st = tuple(float(p) for p in p_st)
        if len(p_st) != self.n_st:
            raise ValueError(f"p_st has length {len(p_st)}, expected n_st={self.n_st}")
        object.__setattr__(self, "p_st", p_st)

        for name in ("bandwidth_total", "p_sat", "noise", "task_bits", "intensity",
                     "f_sat", "f_tc", "p_compute_sat"):
            value = float(getattr(self, name))
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
            object.__setattr__(self, name, value)
        if any(not (p > 0 and math.isfinite(p)) for p in p_st):
            raise ValueError(f"p_st entries must be positive, got {p_st}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))
        p_arr = np.array(p_st)
        p_arr.setflags(write=False)
        object.__setattr__(self, "_p_st_array", p_arr)

    @property
    def p_st_array(self) -> np.ndarray:
        return self._p_st_array

    @property
    def sat_compute_time(self) -> float:
        return self.intensity * self.task_bits / self.f_sat

    @property
    def tc_compute_time(self) -> float:
        return self.intensity * self.task_bits / self.f_tc

    def replace(self, **changes) -> "SystemParams":
        kwargs = {f.name: getattr(self, f.name) for f in fields(self)}
        if "n_st" in changes and "p_st" not in changes:
            # keep a uniform power profile when resizing
            kwargs["p_st"] = kwargs["p_st"][0] if len(set(kwargs["p_st"])) == 1 else None
        kwargs.update(changes)
        return SystemParams(**kwargs)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemParams":
        """Build from the ``system`` section of a JSON config. Unknown keys raise."""
        names = {f.name for f in fields(cls)}
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown system parameter(s): {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["p_st"] = list(out["p_st"])
        out["lambda"] = out.pop("lam")
        return out


@dataclass(frozen=True)
class ChannelState:
    """Linear power gains for one time frame."""

    h_st: np.ndarray
    h_tc: float
    frame: int = 0

    def __post_init__(self):
        h_st = np.asarray(self.h_st, dtype=float).reshape(-1)
        if not np.all(np.isfinite(h_st)) or np.any(h_st <= 0):
            raise ValueError(f"ST gains must be positive and finite, got {h_st}")
        h_tc = float(self.h_tc)
        if not (h_tc > 0 and math.isfinite(h_tc)):
            raise ValueError(f"TC gain must be positive and finite, got {h_tc}")
        if self.frame < 0:
            raise ValueError("frame index must be nonnegative")
        h_st.setflags(write=False)
        object.__setattr__(self, "h_st", h_st)
        object.__setattr__(self, "h_tc", h_tc)

    @property
    def vector(self) -> np.ndarray:
        """``[h_1, ..., h_N, h_TC]``"""
        return np.append(self.h_st, self.h_tc)


@dataclass
class OffloadDecision:
    x: np.ndarray
    alpha: np.ndarray
    cost: float
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.int8)
        self.alpha = np.asarray(self.alpha, dtype=float)
        n = self.x.size
        if self.alpha.size != 2 * n:
            raise ValueError(f"alpha must have length 2N={2 * n}, got {self.alpha.size}")
        alpha = self.alpha
        if alpha.min() < 0 or alpha.sum() > 1 + ALLOC_SUM_TOL:
            raise ValueError("alpha violates the bandwidth budget")
        if alpha[n:] @ self.x != 0:
            raise ValueError("2nd-hop bandwidth assigned to a satellite-executed task")

    @classmethod
    def _trusted(cls, x: np.ndarray, alpha: np.ndarray, cost: float) -> "OffloadDecision":
        # skips validation; only for allocations that satisfy the invariants by construction
        obj = cls.__new__(cls)
        obj.x, obj.alpha, obj.cost, obj.info = x, alpha, cost, {}
        return obj


def _check_fraction(value: float, name: str) -> None:
    if not value > 0:
        raise DomainError(f"{name} must be strictly positive, got {value!r}")
    if value > 1 + ALLOC_SUM_TOL:
        raise DomainError(f"{name} must not exceed 1, got {value!r}")


def rate_first_hop(params: SystemParams, channel: ChannelState, st: int,
                   alpha_n: float) -> float:
    """ST ``st`` -> satellite Shannon rate in bit/s for bandwidth share ``alpha_n``."""
    if not 0 <= st < params.n_st:
        raise IndexError(f"st index {st} out of range for N={params.n_st}")
    _check_fraction(alpha_n, "alpha_n")
    snr = params.p_st[st] * channel.h_st[st] / params.noise
    return alpha_n * params.bandwidth_total * math.log2(1.0 + snr)


def rate_second_hop(params: SystemParams, channel: ChannelState, alpha_fwd: float) -> float:
    """Satellite -> TC forwarding rate in bit/s for bandwidth share ``alpha_fwd``."""
    _check_fraction(alpha_fwd, "alpha_fwd")
    snr = params.p_sat * channel.h_tc / params.noise
    return alpha_fwd * params.bandwidth_total * math.log2(1.0 + snr)


def cost_sat_path(params: SystemParams, channel: ChannelState, st: int,
                  alpha_n: float) -> tuple[float, float]:
    """(latency, energy) of executing ST ``st``'s task on the satellite."""
    t_up = params.task_bits / rate_first_hop(params, channel, st, alpha_n)
    t_cpu = params.sat_compute_time
    latency = t_up + t_cpu
    energy = params.p_st[st] * t_up + params.p_compute_sat * t_cpu
    return latency, energy


def cost_tc_path(params: SystemParams, channel: ChannelState, st: int,
                 alpha_n: float, alpha_fwd: float) -> tuple[float, float]:
    """(latency, energy) of forwarding ST ``st``'s task to the terrestrial cloud.

    Cloud computing energy is not charged.
    """
    t_up = params.task_bits / rate_first_hop(params, channel, st, alpha_n)
    t_fwd = params.task_bits / rate_second_hop(params, channel, alpha_fwd)
    latency = t_up + t_fwd + params.tc_compute_time
    energy = params.p_st[st] * t_up + params.p_sat * t_fwd
    return latency, energy


def _validate_allocation(params: SystemParams, x: np.ndarray, alpha: np.ndarray) -> None:
    n = params.n_st
    if x.shape != (n,) or not np.all((x == 0) | (x == 1)):
        raise ValueError(f"x must be a binary vector of length {n}, got {x}")
    if alpha.shape != (2 * n,):
        raise ValueError(f"alpha must have length {2 * n}, got shape {alpha.shape}")
    if np.any(alpha < 0):
        raise DomainError("alpha entries must be nonnegative")
    if alpha.sum() > 1 + ALLOC_SUM_TOL:
        raise DomainError(f"bandwidth budget exceeded: sum(alpha)={alpha.sum()!r}")


def total_latency_energy(params: SystemParams, channel: ChannelState,
                         x: Sequence[int], alpha: Sequence[float]) -> tuple[float, float]:
    """Sum of per-ST latency and energy under decision ``(x, alpha)``."""
    x = np.asarray(x)
    alpha = np.asarray(alpha, dtype=float)
    _validate_allocation(params, x, alpha)
    n = params.n_st
    latency = energy = 0.0
    for st in range(n):
        if x[st] == 1:
            t, e = cost_sat_path(params, channel, st, alpha[st])
        else:
            t, e = cost_tc_path(params, channel, st, alpha[st], alpha[n + st])
        latency += t
        energy += e
    return latency, energy


def eval_cost(params: SystemParams, channel: ChannelState,
              x: Sequence[int], alpha: Sequence[float]) -> float:
    """Weighted offloading cost ``F(x, alpha)`` summed over all STs."""
    x = np.asarray(x)
    alpha = np.asarray(alpha, dtype=float)
    _validate_allocation(params, x, alpha)
    n = params.n_st
    lam = params.lam
    total = 0.0
    for st in range(n):
        if x[st] == 1:
            t, e = cost_sat_path(params, channel, st, alpha[st])
        else:
            t, e = cost_tc_path(params, channel, st, alpha[st], alpha[n + st])
        total += lam * t + (1.0 - lam) * e
    return total
