"""JSON experiment configuration with environment-variable overrides.

A config file is a JSON object with the optional sections ``system``,
``channel``, ``agent``, ``quantizer`` and ``experiment``. Any key can be
overridden from the environment as ``DRTO_<SECTION>__<KEY>=<json value>``,
e.g. ``DRTO_EXPERIMENT__TOTAL_FRAMES=500`` or
``DRTO_CHANNEL__SNR_ST_DB='[10, 12, 8, 10, 10]'``. Values that do not parse
as JSON are taken as plain strings.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .agent import AgentConfig
from .channel import ChannelConfig
from .system import SystemParams

__all__ = ["ENV_PREFIX", "SECTIONS", "ALGORITHMS", "ExperimentConfig", "load_config",
           "apply_env_overrides"]

ENV_PREFIX = "DRTO_"
SECTIONS = ("system", "channel", "agent", "quantizer", "experiment")
ALGORITHMS = ("drto", "ddlo", "cd", "enum", "pure-tc", "pure-sat")


class ConfigError(ValueError):
    pass


def apply_env_overrides(raw: dict, env: Mapping[str, str] | None = None) -> dict:
    env = os.environ if env is None else env
    out = copy.deepcopy(raw)
    for name, value in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        section, sep, key = name[len(ENV_PREFIX):].lower().partition("__")
        if not sep or section not in SECTIONS or not key:
            raise ConfigError(f"{name}: expected {ENV_PREFIX}<SECTION>__<KEY> "
                              f"with SECTION in {[s.upper() for s in SECTIONS]}")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        out.setdefault(section, {})[key] = parsed
    return out


def load_config(path=None, env: Mapping[str, str] | None = None) -> dict:
    """Read the raw config dict (empty sections when ``path`` is None)."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    return apply_env_overrides(raw, env)


@dataclass
class ExperimentConfig:
    system: SystemParams = field(default_factory=SystemParams)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    total_frames: int = 30000
    algorithms: tuple[str, ...] = ("drto",)
    seeds: tuple[int, ...] = (0,)
    compute_ratio: bool = True
    output_dir: Path | None = None
    trace_path: Path | None = None
    tail_frames: int = 3000
    warmup_frames: int = 100
    record_timing: bool = True

    def __post_init__(self):
        if isinstance(self.algorithms, str):
            self.algorithms = tuple(a.strip() for a in self.algorithms.split(","))
        self.algorithms = tuple(self.algorithms)
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {list(ALGORITHMS)}")
        if isinstance(self.seeds, int):
            self.seeds = (self.seeds,)
        self.seeds = tuple(int(s) for s in self.seeds)
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if int(self.total_frames) != self.total_frames or self.total_frames < 1:
            raise ConfigError(f"total_frames must be a positive integer, got {self.total_frames!r}")
        self.total_frames = int(self.total_frames)
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)
        if self.trace_path is not None:
            self.trace_path = Path(self.trace_path)

    @property
    def n_st(self) -> int:
        return self.system.n_st

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ExperimentConfig":
        try:
            system = SystemParams.from_dict(raw.get("system", {}))
            channel = ChannelConfig.from_dict(raw.get("channel", {}))
            agent = AgentConfig.from_sections(raw.get("agent"), raw.get("quantizer"))
            exp = dict(raw.get("experiment", {}))
            if "n_st" in exp:
                system = system.replace(n_st=exp.pop("n_st"))
            if "output_dir" in exp and exp["output_dir"] is not None:
                exp["output_dir"] = Path(exp["output_dir"])
            return cls(system=system, channel=channel, agent=agent, **exp)
        except TypeError as exc:
            raise ConfigError(f"bad config key: {exc}") from exc

    @classmethod
    def load(cls, path=None, env: Mapping[str, str] | None = None) -> "ExperimentConfig":
        return cls.from_dict(load_config(path, env))

    def to_dict(self) -> dict:
        ch = self.channel
        return {
            "system": self.system.to_dict(),
            "channel": {
                "mode": ch.mode,
                "snr_st_db": ch.snr_st_db if isinstance(ch.snr_st_db, (int, float))
                else list(ch.snr_st_db),
                "snr_tc_db": ch.snr_tc_db,
                "path_loss": None if ch.path_loss is None else [vars(p) for p in ch.path_loss],
                "fading": ch.fading,
                "deep_fade_prob": ch.deep_fade_prob,
                "deep_fade_factor": ch.deep_fade_factor,
                "seed": ch.seed,
            },
            "agent": {
                "delta_train": self.agent.delta_train,
                "batch_size": self.agent.batch_size,
                "memory_size": self.agent.memory_size,
                "learning_rate": self.agent.learning_rate,
                "hidden": list(self.agent.hidden),
                "init_std": self.agent.init_std,
            },
            "quantizer": {"delta_big": self.agent.delta_big, "adaptive_k": self.agent.adaptive_k},
            "experiment": {
                "total_frames": self.total_frames,
                "algorithms": list(self.algorithms),
                "seeds": list(self.seeds),
                "compute_ratio": self.compute_ratio,
                "output_dir": None if self.output_dir is None else str(self.output_dir),
                "trace_path": None if self.trace_path is None else str(self.trace_path),
                "tail_frames": self.tail_frames,
                "warmup_frames": self.warmup_frames,
                "record_timing": self.record_timing,
            },
        }
