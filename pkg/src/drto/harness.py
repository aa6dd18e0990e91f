"""Experiment runner: seeded channel traces, every requested policy on the
same trace, per-frame CSV series, JSON summaries, and runtime benchmarks.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .agent import DrtoAgent, FrameRecord
from .allocator import build_problem, solve_closed_form, solve_numeric_oracle
from .baselines import (BaselineKind, DdloEnsemble, coordinate_descent, enumerate_optimal,
                        pure_fixed)
from .channel import ChannelGenerator, read_trace
from .config import ExperimentConfig
from .system import ChannelState, SystemParams

__all__ = [
    "CSV_COLUMNS",
    "MetricsSummary",
    "make_policy",
    "channel_trace",
    "run_policy",
    "run_experiment",
    "bench_runtime",
    "verify_allocator",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "K_t", "k_star", "cost", "cost_ratio", "loss", "decide_micros",
               "step_micros")


class StaticPolicy:
    """Stateless baseline wrapped to the ``step(channel, frame)`` interface."""

    def __init__(self, params: SystemParams, decide: Callable):
        self.params = params
        self._decide = decide

    def step(self, channel: ChannelState, frame: int) -> FrameRecord:
        start = time.perf_counter()
        dec = self._decide(self.params, channel)
        elapsed = time.perf_counter() - start
        return FrameRecord(frame, dec, k_star=None, k_used=None, decide_seconds=elapsed)


def make_policy(name: str, cfg: ExperimentConfig, params: SystemParams, gain_scale,
                rng: np.random.Generator):
    if name == "drto":
        return DrtoAgent(params, gain_scale, cfg.agent, rng)
    if name == "ddlo":
        return DdloEnsemble(params, gain_scale, cfg.agent, rng)
    if name == "cd":
        return StaticPolicy(params, coordinate_descent)
    if name == "enum":
        return StaticPolicy(params, enumerate_optimal)
    if name == "pure-tc":
        return StaticPolicy(params, lambda p, ch: pure_fixed(p, ch, BaselineKind.PURE_TC))
    if name == "pure-sat":
        return StaticPolicy(params, lambda p, ch: pure_fixed(p, ch, BaselineKind.PURE_SAT))
    raise ValueError(f"unknown algorithm {name!r}")


def _streams(seed: int, channel_seed: int):
    """(channel rng, agent seed sequence) for one experiment seed."""
    channel_rng = np.random.default_rng(np.random.SeedSequence([channel_seed, seed]))
    return channel_rng, np.random.SeedSequence(seed)


def channel_trace(cfg: ExperimentConfig, seed: int, params: SystemParams | None = None,
                  n_frames: int | None = None) -> list[ChannelState]:
    params = cfg.system if params is None else params
    n_frames = cfg.total_frames if n_frames is None else n_frames
    if cfg.trace_path is not None:
        trace = read_trace(cfg.trace_path)
        if trace[0].h_st.size != params.n_st:
            raise ValueError(f"{cfg.trace_path}: trace has {trace[0].h_st.size} STs, "
                             f"config has n_st={params.n_st}")
        if len(trace) < n_frames:
            log.warning("trace %s holds %d frames; running %d instead of %d",
                        cfg.trace_path, len(trace), len(trace), n_frames)
        return trace[:n_frames]
    channel_rng, _ = _streams(seed, cfg.channel.seed)
    gen = ChannelGenerator(cfg.channel, params, rng=channel_rng)
    return gen.trace(n_frames)


def run_policy(policy, trace) -> list[FrameRecord]:
    return [policy.step(ch, t) for t, ch in enumerate(trace, start=1)]


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class MetricsSummary:
    """Per-(algorithm, seed) frame series plus aggregates derived from them.

    Each series maps column name (``CSV_COLUMNS`` minus ``t``) to a float
    array with NaN for absent values.
    """

    series: dict[tuple[str, int], dict[str, np.ndarray]]
    tail_frames: int = 3000
    metadata: dict = field(default_factory=dict)

    @property
    def algorithms(self) -> list[str]:
        return list(dict.fromkeys(a for a, _ in self.series))

    def _concat(self, algo: str, column: str, tail: bool = False) -> np.ndarray:
        parts = []
        for (a, _), s in self.series.items():
            if a != algo:
                continue
            col = s[column]
            parts.append(col[-self.tail_frames:] if tail else col)
        return np.concatenate(parts) if parts else np.array([])

    def tail_mean(self, algo: str, column: str) -> float:
        values = self._concat(algo, column, tail=True)
        values = values[~np.isnan(values)]
        return float(values.mean()) if values.size else float("nan")

    def aggregates(self) -> dict:
        out = {}
        for algo in self.algorithms:
            cost = self._concat(algo, "cost")
            decide = self._concat(algo, "decide_micros")
            step = self._concat(algo, "step_micros")
            ratio_tail = self._concat(algo, "cost_ratio", tail=True)
            k_tail = self._concat(algo, "k_star", tail=True)
            entry = {
                "mean_cost": float(cost.mean()),
                "mean_decide_seconds": (float(np.nanmean(decide)) * 1e-6
                                        if np.any(~np.isnan(decide)) else None),
                "mean_step_seconds": (float(np.nanmean(step)) * 1e-6
                                      if np.any(~np.isnan(step)) else None),
                "tail_mean_cost_ratio": (float(np.nanmean(ratio_tail))
                                         if np.any(~np.isnan(ratio_tail)) else None),
                "tail_mean_loss": None,
                "tail_k_star_one_share": None,
            }
            loss_tail = self.tail_mean(algo, "loss")
            if not np.isnan(loss_tail):
                entry["tail_mean_loss"] = loss_tail
            k_tail = k_tail[~np.isnan(k_tail)]
            if k_tail.size:
                entry["tail_k_star_one_share"] = float(np.mean(k_tail == 1))
            out[algo] = entry
        for algo, entry in out.items():
            for ref in ("pure-tc", "pure-sat"):
                if ref in out and ref != algo:
                    base = out[ref]["mean_cost"]
                    entry[f"reduction_vs_{ref}"] = (base - entry["mean_cost"]) / base
        return out

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata, "aggregates": self.aggregates()},
                          indent=2, sort_keys=True)


def _series(records: list[FrameRecord], opt_costs, record_timing: bool) -> dict[str, np.ndarray]:
    nan = float("nan")
    cost = np.array([r.cost for r in records])
    ratio = cost / opt_costs if opt_costs is not None else np.full(cost.size, nan)
    return {
        "K_t": np.array([nan if r.k_used is None else r.k_used for r in records], dtype=float),
        "k_star": np.array([nan if r.k_star is None else r.k_star for r in records], dtype=float),
        "cost": cost,
        "cost_ratio": ratio,
        "loss": np.array([nan if r.loss is None else r.loss for r in records]),
        "decide_micros": (np.array([r.decide_seconds * 1e6 for r in records]) if record_timing
                          else np.full(cost.size, nan)),
        # decision plus any training done in the frame
        "step_micros": (np.array([(r.decide_seconds + r.train_seconds) * 1e6 for r in records])
                        if record_timing else np.full(cost.size, nan)),
    }


def series_csv(series: dict[str, np.ndarray]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    n = series["cost"].size
    for i in range(n):
        row = [i + 1]
        for col in CSV_COLUMNS[1:]:
            v = float(series[col][i])
            if np.isnan(v):
                row.append("")
            elif col in ("K_t", "k_star"):
                row.append(str(int(v)))
            else:
                row.append(repr(v))
        writer.writerow(row)
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig, progress: Callable[[str], None] | None = None
                   ) -> MetricsSummary:
    """Run every configured algorithm on one shared trace per seed.

    When ``cfg.compute_ratio`` is set, each frame's cost is divided by the
    enumeration optimum of that frame (the enumeration run itself is reused
    when ``enum`` is among the algorithms). Files are written only when
    ``cfg.output_dir`` is set.
    """
    params = cfg.system
    gain_scale = np.append(*cfg.channel.mean_gains(params))
    series = {}
    for seed in cfg.seeds:
        trace = channel_trace(cfg, seed)
        _, agent_seq = _streams(seed, cfg.channel.seed)
        algo_seqs = dict(zip(cfg.algorithms, agent_seq.spawn(len(cfg.algorithms))))
        records = {}
        order = sorted(cfg.algorithms, key=lambda a: a != "enum")
        opt_costs = None
        for algo in order:
            if progress:
                progress(f"seed {seed}: {algo}")
            policy = make_policy(algo, cfg, params, gain_scale,
                                 np.random.default_rng(algo_seqs[algo]))
            records[algo] = run_policy(policy, trace)
            if algo == "enum" and cfg.compute_ratio:
                opt_costs = np.array([r.cost for r in records[algo]])
        if cfg.compute_ratio and opt_costs is None:
            if progress:
                progress(f"seed {seed}: enumeration reference")
            opt_costs = np.array([enumerate_optimal(params, ch).cost for ch in trace])
        for algo in cfg.algorithms:
            series[(algo, seed)] = _series(records[algo], opt_costs, cfg.record_timing)

    summary = MetricsSummary(series, tail_frames=min(cfg.tail_frames, len(trace)),
                             metadata={"config": cfg.to_dict(), "cd_start": "all-sat",
                                       "frames": len(trace)})
    if cfg.output_dir is not None:
        out = Path(cfg.output_dir)
        for (algo, seed), s in series.items():
            _atomic_write(out / f"{algo}_seed{seed}.csv", series_csv(s))
        _atomic_write(out / "summary.json", summary.to_json() + "\n")
    return summary


def bench_runtime(cfg: ExperimentConfig, n_values, algorithms=None, n_frames: int | None = None,
                  warmup: int | None = None, progress=None) -> dict[str, dict[int, float]]:
    """Mean per-frame decision time (seconds), ``{algorithm: {N: seconds}}``.

    Runs serially on the first configured seed. Learning policies run their
    full online loop (training included) but only the decision path is timed.
    The first ``warmup`` frames are discarded.
    """
    algorithms = tuple(algorithms or cfg.algorithms)
    n_frames = cfg.total_frames if n_frames is None else n_frames
    warmup = cfg.warmup_frames if warmup is None else warmup
    if n_frames <= warmup:
        raise ValueError(f"need more than {warmup} frames to benchmark, got {n_frames}")
    seed = cfg.seeds[0]
    table: dict[str, dict[int, float]] = {a: {} for a in algorithms}
    for n in n_values:
        params = cfg.system.replace(n_st=int(n))
        gain_scale = np.append(*cfg.channel.mean_gains(params))
        trace = channel_trace(cfg, seed, params=params, n_frames=n_frames)
        _, agent_seq = _streams(seed, cfg.channel.seed)
        for algo, seq in zip(algorithms, agent_seq.spawn(len(algorithms))):
            if progress:
                progress(f"N={n}: {algo}")
            policy = make_policy(algo, cfg, params, gain_scale, np.random.default_rng(seq))
            times = [r.decide_seconds for r in run_policy(policy, trace)]
            table[algo][int(n)] = float(np.mean(times[warmup:]))
    return table


def verify_allocator(trials: int = 1000, max_n: int = 7, seed: int = 0,
                     tol: float = 1e-12) -> dict:
    """Closed form vs numeric oracle on random instances with random active sets.

    Channel SNRs are drawn log-uniformly and each ST independently goes to
    the satellite or the cloud, so both hops are exercised.
    """
    rng = np.random.default_rng(seed)
    worst_gap = 0.0
    worst_spread = 0.0
    base = SystemParams()
    for _ in range(trials):
        n = int(rng.integers(1, max_n + 1))
        params = base.replace(n_st=n, lam=float(rng.uniform(0, 1)),
                              p_st=tuple(rng.uniform(0.2, 3.0, n)))
        snr_st = 10 ** rng.uniform(-1, 3, n)
        snr_tc = 10 ** rng.uniform(-1, 3)
        channel = ChannelState(snr_st * params.noise / params.p_st_array,
                               snr_tc * params.noise / params.p_sat)
        x = rng.integers(0, 2, n)
        prob = build_problem(params, channel, x)
        alpha, cost = solve_closed_form(prob)
        _, oracle_cost = solve_numeric_oracle(prob, tol=tol)
        worst_gap = max(worst_gap, abs(cost - oracle_cost) / cost)
        ratio = prob.coeffs / alpha[prob.active] ** 2
        worst_spread = max(worst_spread, float((ratio.max() - ratio.min()) / ratio.mean()))
    return {"trials": trials, "max_relative_cost_gap": worst_gap,
            "max_kkt_spread": worst_spread}
