"""Experiment configuration: flat key = value text files.

Every key mirrors an ExperimentConfig field exactly; unknown keys are hard
errors so typos cannot silently fall back to defaults.  Values round-trip
losslessly through to_text/parse (floats are written with full precision).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

ALGORITHMS = ("dog-iu", "dog")
GRAPH_KINDS = ("grid4", "edges")
DELAY_KINDS = ("constant", "uniform", "trace")


@dataclass
class ExperimentConfig:
    # run shape
    horizon: int = 2000
    algorithm: str = "dog-iu"
    runs: int = 20
    base_seed: int = 0
    smoothing_window: int = 50
    # learner
    rate_scale: float = 14.0
    default_action: int = 0
    # communication
    graph: str = "grid4"
    grid_rows: int = 4
    grid_cols: int = 4
    agent_count: int = 0  # only read when graph == "edges"
    edges: str = ""  # "sender>recipient;..." when graph == "edges"
    delay_kind: str = "uniform"
    delay_bound: int = 10
    delay_trace: str = ""  # csv path when delay_kind == "trace"
    # clocks
    skew: float = 0.0
    skew_delivery: bool = False
    # environment
    headings: int = 8
    clusters: int = 8
    targets_per_cluster: int = 10
    target_speed: float = 1.0
    noise_sigma: float = 0.005
    resample_period: int = 30
    scatter_std: float = 3.0
    workspace_width: float = 100.0
    workspace_height: float = 100.0
    fov_half_angle_deg: float = 30.0
    sensing_range: float = 20.0
    # benchmark normalization: fixed so the effective step size c*eta/B is
    # large enough to track the drifting scene; 0 = calibrate from a pilot
    # rollout instead
    reward_cap: float = 14.0

    def agents(self) -> int:
        if self.graph == "grid4":
            return self.grid_rows * self.grid_cols
        return self.agent_count

    def validate(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}"
            )
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be >= 0")
        if self.smoothing_window < 1:
            raise ValueError("smoothing_window must be >= 1")
        if self.rate_scale <= 0:
            raise ValueError("rate_scale must be positive")
        if self.graph not in GRAPH_KINDS:
            raise ValueError(f"graph must be one of {GRAPH_KINDS}")
        if self.graph == "grid4":
            if self.grid_rows < 1 or self.grid_cols < 1:
                raise ValueError("grid_rows and grid_cols must be >= 1")
        else:
            if self.agent_count < 1:
                raise ValueError("agent_count must be >= 1 for edge graphs")
        if self.delay_kind not in DELAY_KINDS:
            raise ValueError(f"delay_kind must be one of {DELAY_KINDS}")
        if self.delay_bound < 0:
            raise ValueError("delay_bound must be >= 0")
        if self.delay_kind == "trace" and not self.delay_trace:
            raise ValueError("delay_trace path required for trace delays")
        if self.skew < 0:
            raise ValueError("skew must be >= 0")
        if self.headings < 2:
            raise ValueError("headings must be >= 2")
        if not 0 <= self.default_action < self.headings:
            raise ValueError("default_action out of heading range")
        if self.clusters < 1 or self.targets_per_cluster < 1:
            raise ValueError("clusters and targets_per_cluster must be >= 1")
        if self.target_speed < 0 or self.noise_sigma < 0:
            raise ValueError("target_speed and noise_sigma must be >= 0")
        if self.resample_period < 0:
            raise ValueError("resample_period must be >= 0")
        if self.scatter_std < 0:
            raise ValueError("scatter_std must be >= 0")
        if self.workspace_width <= 0 or self.workspace_height <= 0:
            raise ValueError("workspace dimensions must be positive")
        if not 0 < self.fov_half_angle_deg < 90:
            raise ValueError("fov_half_angle_deg must be in (0, 90)")
        if self.sensing_range <= 0:
            raise ValueError("sensing_range must be positive")
        if self.reward_cap < 0:
            raise ValueError("reward_cap must be >= 0 (0 = auto)")


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _parse_value(name: str, text: str):
    kind = _FIELDS[name].type
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        if kind == "bool":
            low = text.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"bad boolean {text!r}")
        return text
    except ValueError as exc:
        raise ValueError(f"config key {name!r}: {exc}") from exc


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse key = value lines; '#' starts a comment."""
    cfg = dataclasses.replace(base) if base else ExperimentConfig()
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELDS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        if key in seen:
            raise ValueError(f"line {lineno}: duplicate config key {key!r}")
        seen.add(key)
        setattr(cfg, key, _parse_value(key, value))
    cfg.validate()
    return cfg


def read_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def to_text(cfg: ExperimentConfig) -> str:
    """Serialize every field; parse(to_text(cfg)) reproduces cfg exactly."""
    lines = []
    for f in dataclasses.fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"


def write_config(path, cfg: ExperimentConfig) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_text(cfg))
