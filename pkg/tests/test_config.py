"""Configuration loading, validation and dotted overrides."""

import json

import pytest

from wavelab.config import (
    RunConfig,
    apply_overrides,
    config_from_dict,
    config_to_dict,
    dump_config,
    load_config,
    parse_override,
)
from wavelab.errors import ConfigError, IoError, ParseError, RangeError, SchemaError


def test_empty_config_is_all_defaults():
    cfg = config_from_dict({})
    assert cfg == RunConfig()
    assert cfg.grid.n_points == 256
    assert cfg.stepper.scheme == "if_rk4"
    assert cfg.analysis.k_min == 4 and cfg.analysis.k_max == 8


def test_sections_are_merged_with_defaults():
    cfg = config_from_dict({"params": {"gamma": 2}, "stepper": {"dt": 1e-3}})
    assert cfg.params.gamma == 2.0 and isinstance(cfg.params.gamma, float)
    assert cfg.params.sigma == 1.0
    assert cfg.stepper.dt == 1e-3


@pytest.mark.parametrize(
    "raw,key",
    [
        ({"params": {"sigma": 0}}, "sigma"),
        ({"grid": {"n_points": 48}}, "n_points"),
        ({"stepper": {"dealias_rule": 1.5}}, "dealias_rule"),
        ({"analysis": {"k_min": 3, "k_max": 4}}, "k_max"),
        ({"experiment": {"param_sets": [[1.0, -1.0, 0.0]]}}, "sigma"),
        ({"initial": {"kind": "from_checkpoint"}}, "path"),
    ],
)
def test_out_of_range_values(raw, key):
    with pytest.raises(RangeError) as info:
        config_from_dict(raw)
    assert info.value.key == key


@pytest.mark.parametrize(
    "raw,key",
    [
        ({"grid": {"npoints": 64}}, "grid.npoints"),
        ({"solver": {}}, "solver"),
        ({"grid": {"n_points": "64"}}, "grid.n_points"),
        ({"grid": {"n_points": True}}, "grid.n_points"),
        ({"stepper": {"reproject_each_step": 1}}, "stepper.reproject_each_step"),
        ({"experiment": {"modes": 3}}, "experiment.modes"),
        ({"grid": []}, "grid"),
    ],
)
def test_schema_errors_name_the_key(raw, key):
    with pytest.raises(SchemaError) as info:
        config_from_dict(raw)
    assert info.value.key == key


def test_root_must_be_an_object():
    with pytest.raises(SchemaError):
        config_from_dict([1, 2])


def test_parse_override():
    assert parse_override("params.gamma=2") == (["params", "gamma"], 2)
    assert parse_override("experiment.modes=[1, 2]") == (["experiment", "modes"], [1, 2])
    assert parse_override("output.series_format=json") == (["output", "series_format"], "json")
    assert parse_override("stepper.dt=null") == (["stepper", "dt"], None)


@pytest.mark.parametrize("item", ["params.gamma", "gamma=2", "=2"])
def test_malformed_overrides(item):
    with pytest.raises(ParseError):
        parse_override(item)


def test_overrides_do_not_touch_the_input():
    raw = {"params": {"g": 1.0}}
    out = apply_overrides(raw, ["params.g=0", "grid.n_points=64"])
    assert out == {"params": {"g": 0}, "grid": {"n_points": 64}}
    assert raw == {"params": {"g": 1.0}}
    with pytest.raises(SchemaError):
        apply_overrides({"grid": {"n_points": 64}}, ["grid.n_points.x=1"])


def test_overrides_are_validated():
    cfg = config_from_dict({}, ["params.sigma=0.5", "experiment.modes=[2, 4]"])
    assert cfg.params.sigma == 0.5
    assert cfg.experiment.modes == (2, 4)
    with pytest.raises(RangeError):
        config_from_dict({}, ["params.sigma=-1"])


def test_round_trip_through_a_dict():
    cfg = config_from_dict({"params": {"gamma": 1.5}, "initial": {"truncation": 4}})
    again = config_from_dict(config_to_dict(cfg))
    assert again == cfg
    assert json.loads(dump_config(cfg))["initial"]["truncation"] == 4


def test_load_config(tmp_path):
    assert load_config(None) == RunConfig()
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"grid": {"n_points": 64}}), encoding="utf-8")
    assert load_config(path, ["params.g=0"]).grid.n_points == 64
    assert load_config(path, ["params.g=0"]).params.g == 0.0


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{grid: 64", encoding="utf-8")
    with pytest.raises(ParseError):
        load_config(bad)
    with pytest.raises(IoError):
        load_config(tmp_path / "missing.json")
    assert issubclass(ParseError, ConfigError) and not issubclass(IoError, ConfigError)
