"""Per-frame channel gains: path-loss or SNR-targeted means times i.i.d. fading."""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .system import ChannelState, SystemParams

__all__ = [
    "SPEED_OF_LIGHT",
    "PathLossParams",
    "ChannelConfig",
    "ChannelGenerator",
    "mean_gain",
    "write_trace",
    "read_trace",
]

SPEED_OF_LIGHT = 2.998e8


@dataclass(frozen=True)
class PathLossParams:
    distance_m: float
    antenna_gain: float = 4.11
    path_loss_exponent: float = 2.8
    carrier_hz: float = 30e9

    def __post_init__(self):
        for name in ("distance_m", "antenna_gain", "path_loss_exponent", "carrier_hz"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def mean_gain(p: PathLossParams) -> float:
    """Free-space average gain ``A_d * (c / (4 pi f_c d)) ** d_e``."""
    base = SPEED_OF_LIGHT / (4.0 * math.pi * p.carrier_hz * p.distance_m)
    return p.antenna_gain * base**p.path_loss_exponent


@dataclass
class ChannelConfig:
    """Channel generator settings.

    ``mode`` is ``"direct_snr"`` (mean received SNR per link, in dB) or
    ``"path_loss"`` (one :class:`PathLossParams` per link, N STs then the
    satellite-TC link). ``fading`` is ``"exponential"`` (unit-mean power
    fading per link and frame) or ``"none"``. ``deep_fade_prob`` multiplies a
    link's gain by ``deep_fade_factor`` for a single frame with that
    probability.
    """

    mode: str = "direct_snr"
    snr_st_db: float | Sequence[float] = 10.0
    snr_tc_db: float = 20.0
    path_loss: Sequence[PathLossParams] | None = None
    fading: str = "exponential"
    deep_fade_prob: float = 0.0
    deep_fade_factor: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("direct_snr", "path_loss"):
            raise ValueError(f"unknown channel mode {self.mode!r}")
        if self.fading not in ("exponential", "none"):
            raise ValueError(f"unknown fading model {self.fading!r}")
        if self.mode == "path_loss" and not self.path_loss:
            raise ValueError("path_loss mode needs per-link PathLossParams (distances have no default)")
        if self.mode == "direct_snr":
            snrs = np.atleast_1d(np.asarray(self.snr_st_db, dtype=float))
            if not np.all(np.isfinite(snrs)) or not math.isfinite(self.snr_tc_db):
                raise ValueError("SNR targets must be finite")
        if not 0.0 <= self.deep_fade_prob <= 1.0:
            raise ValueError("deep_fade_prob must lie in [0, 1]")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ChannelConfig":
        data = dict(data)
        links = data.pop("path_loss", None)
        if links is not None:
            data["path_loss"] = [PathLossParams(**link) for link in links]
        return cls(**data)

    def mean_gains(self, params: SystemParams) -> tuple[np.ndarray, float]:
        """Average gains ``(h_st_mean, h_tc_mean)`` in linear units."""
        n = params.n_st
        if self.mode == "path_loss":
            if len(self.path_loss) != n + 1:
                raise ValueError(f"path_loss needs {n + 1} links (N STs + TC), "
                                 f"got {len(self.path_loss)}")
            gains = np.array([mean_gain(p) for p in self.path_loss])
            return gains[:n], float(gains[n])
        snr_st = np.broadcast_to(np.asarray(self.snr_st_db, dtype=float), (n,))
        h_st = 10.0 ** (snr_st / 10.0) * params.noise / np.asarray(params.p_st)
        h_tc = 10.0 ** (self.snr_tc_db / 10.0) * params.noise / params.p_sat
        return h_st, float(h_tc)


class ChannelGenerator:
    """Seeded source of :class:`ChannelState` frames."""

    def __init__(self, cfg: ChannelConfig, params: SystemParams,
                 rng: np.random.Generator | None = None):
        self.cfg = cfg
        self.n_st = params.n_st
        h_st, h_tc = cfg.mean_gains(params)
        self.mean = np.append(h_st, h_tc)
        self.rng = np.random.default_rng(cfg.seed) if rng is None else rng

    def sample_frame(self, frame: int) -> ChannelState:
        gains = self.mean.copy()
        if self.cfg.fading == "exponential":
            gains *= self.rng.exponential(1.0, size=gains.size)
        if self.cfg.deep_fade_prob > 0:
            hit = self.rng.random(gains.size) < self.cfg.deep_fade_prob
            gains[hit] *= self.cfg.deep_fade_factor
        # exponential draws can underflow to 0 only with vanishing probability
        gains = np.maximum(gains, np.finfo(float).tiny)
        return ChannelState(gains[:self.n_st], gains[self.n_st], frame)

    def trace(self, n_frames: int, start: int = 1) -> list[ChannelState]:
        return [self.sample_frame(t) for t in range(start, start + n_frames)]


def write_trace(path, trace: Sequence[ChannelState]) -> None:
    """CSV with header ``frame,h_1..h_N,h_TC``; floats written round-trip exact."""
    if not trace:
        raise ValueError("empty trace")
    n = trace[0].h_st.size
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)), suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", *[f"h_{i + 1}" for i in range(n)], "h_TC"])
        for ch in trace:
            writer.writerow([ch.frame, *[repr(float(h)) for h in ch.h_st], repr(ch.h_tc)])
    os.replace(tmp, path)


def read_trace(path) -> list[ChannelState]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "frame" or header[-1] != "h_TC":
            raise ValueError(f"{path}: unexpected trace header {header}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
            vals = [float(v) for v in row[1:]]
            out.append(ChannelState(np.array(vals[:-1]), vals[-1], int(row[0])))
    return out
