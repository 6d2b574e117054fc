"""Experiment configuration: defaults, parsing, serialization, validation."""

from __future__ import annotations

import dataclasses

import pytest

from dogiu.config import (
    ALGORITHMS,
    DELAY_KINDS,
    GRAPH_KINDS,
    ExperimentConfig,
    parse_config,
    read_config,
    to_text,
    write_config,
)


def test_defaults_describe_the_benchmark_and_validate():
    cfg = ExperimentConfig()
    cfg.validate()
    assert cfg.horizon == 2000
    assert cfg.runs == 20
    assert cfg.agents() == 16  # 4x4 grid
    assert cfg.headings == 8
    assert cfg.algorithm in ALGORITHMS
    assert cfg.graph in GRAPH_KINDS
    assert cfg.delay_kind in DELAY_KINDS


def test_text_round_trip_is_exact():
    cfg = dataclasses.replace(
        ExperimentConfig(),
        algorithm="dog",
        delay_bound=7,
        skew=1.0 / 3.0,
        rate_scale=0.7071067811865476,
        graph="edges",
        agent_count=3,
        edges="0>1;1>0;1>2",
        skew_delivery=True,
    )
    assert parse_config(to_text(cfg)) == cfg


def test_file_round_trip(tmp_path):
    cfg = dataclasses.replace(ExperimentConfig(), horizon=123, noise_sigma=0.25)
    path = tmp_path / "exp.cfg"
    write_config(path, cfg)
    assert read_config(path) == cfg


def test_comments_blanks_and_partial_overrides():
    cfg = parse_config(
        "# benchmark tweak\n\nhorizon = 50   # short\ndelay_bound = 2\n"
    )
    assert cfg.horizon == 50
    assert cfg.delay_bound == 2
    assert cfg.runs == ExperimentConfig().runs  # untouched default


def test_parse_errors_name_line_and_key():
    with pytest.raises(ValueError, match="line 2: unknown config key 'horizn'"):
        parse_config("horizon = 10\nhorizn = 20\n")
    with pytest.raises(ValueError, match="line 3: duplicate config key"):
        parse_config("horizon = 10\n\nhorizon = 20\n")
    with pytest.raises(ValueError, match="line 1: expected key = value"):
        parse_config("horizon: 10\n")
    with pytest.raises(ValueError, match="'horizon'"):
        parse_config("horizon = ten\n")
    with pytest.raises(ValueError, match="bad boolean"):
        parse_config("skew_delivery = maybe\n")


@pytest.mark.parametrize(
    "field, value",
    [
        ("horizon", 0),
        ("algorithm", "sgd"),
        ("runs", 0),
        ("base_seed", -1),
        ("smoothing_window", 0),
        ("rate_scale", 0.0),
        ("graph", "ring"),
        ("grid_rows", 0),
        ("delay_kind", "poisson"),
        ("delay_bound", -1),
        ("skew", -0.5),
        ("headings", 1),
        ("default_action", 8),
        ("clusters", 0),
        ("target_speed", -1.0),
        ("resample_period", -1),
        ("scatter_std", -1.0),
        ("workspace_width", 0.0),
        ("fov_half_angle_deg", 90.0),
        ("sensing_range", 0.0),
        ("reward_cap", -2.0),
    ],
)
def test_validate_rejects_bad_fields(field, value):
    cfg = dataclasses.replace(ExperimentConfig(), **{field: value})
    with pytest.raises(ValueError):
        cfg.validate()


def test_edge_graph_needs_agent_count_and_trace_needs_path():
    cfg = dataclasses.replace(ExperimentConfig(), graph="edges", agent_count=0)
    with pytest.raises(ValueError, match="agent_count"):
        cfg.validate()
    cfg = dataclasses.replace(ExperimentConfig(), delay_kind="trace", delay_trace="")
    with pytest.raises(ValueError, match="trace"):
        cfg.validate()
