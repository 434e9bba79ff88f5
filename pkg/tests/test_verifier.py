"""Verification harness: configs, reports, determinism, sampling."""

import dataclasses
import json

import numpy as np
import pytest

from oscmax.errors import DomainError, UsageError
from oscmax.geometry import Grid, GridConfig
from oscmax.verify import (
    CHECK_NAMES,
    CheckReport,
    VerifyConfig,
    _jsonable,
    report_json,
    report_text,
    run_checks,
    sample_far_pairs,
)

# small configuration so unit tests stay fast; the acceptance suite runs
# the defaults through the CLI
FAST = VerifyConfig(
    kernel_lattice_points=2,
    tmax_samples=25,
    ratio_samples=20,
    scan_points=2000,
    domination_functions=2,
    operator_max_layer=1,
    time_points_per_decade=10,
)


# -- config -------------------------------------------------------------------


def test_config_roundtrip():
    cfg = VerifyConfig(seed=7, tmax_samples=10)
    again = VerifyConfig.from_dict(cfg.as_dict())
    assert again == cfg


def test_config_rejects_unknown_keys():
    with pytest.raises(UsageError):
        VerifyConfig.from_dict({"seed": 1, "bogus": 2})


def test_config_validation():
    with pytest.raises(DomainError):
        VerifyConfig(dimension=2)
    with pytest.raises(DomainError):
        VerifyConfig(tmax_samples=0)


def test_config_frozen():
    cfg = VerifyConfig()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.seed = 1


# -- reports ---------------------------------------------------------------------


def test_report_passed_property():
    mk = lambda s: CheckReport(name="kernel", status=s, n_samples=1, seed=0,
                               observed=0.0)
    assert mk("pass").passed
    assert mk("inconclusive").passed
    assert not mk("fail").passed


def test_report_json_dict_excludes_runtime():
    r = CheckReport(name="tmax", status="pass", n_samples=3, seed=1,
                    observed=np.float64(0.5),
                    details={"k": np.int64(2), "v": [np.float64(1.5)]},
                    runtime_s=123.0)
    d = r.to_json_dict()
    assert "runtime_s" not in d
    assert d["observed"] == 0.5 and isinstance(d["observed"], float)
    assert d["details"]["k"] == 2 and isinstance(d["details"]["k"], int)
    json.dumps(d)      # fully serializable


def test_jsonable_conversions():
    out = _jsonable({"a": np.float32(1.5), "b": (np.int8(2), 3),
                     1: "x", "c": None})
    assert out == {"a": 1.5, "b": [2, 3], "1": "x", "c": None}


# -- runner ------------------------------------------------------------------------


def test_run_checks_unknown_name():
    with pytest.raises(UsageError):
        run_checks(["kernel", "nope"], FAST)


def test_run_checks_canonical_order():
    reps = run_checks(["weights", "tmax"], FAST)
    assert [r.name for r in reps] == ["tmax", "weights"]


def test_fast_checks_pass_and_record_seed():
    reps = run_checks(["tmax", "ratio"], FAST)
    for r in reps:
        assert r.passed, (r.name, r.details)
        assert r.seed == FAST.seed
        assert r.runtime_s > 0.0


def test_check_reports_deterministic():
    a = run_checks(["tmax", "weights"], FAST)
    b = run_checks(["tmax", "weights"], FAST)
    assert [r.to_json_dict() for r in a] == [r.to_json_dict() for r in b]


def test_report_json_shape_and_determinism():
    reps = run_checks(["tmax"], FAST)
    js1 = report_json(reps, FAST)
    js2 = report_json(run_checks(["tmax"], FAST), FAST)
    assert js1 == js2
    assert js1.endswith("\n")
    payload = json.loads(js1)
    assert payload["schema_version"] == 1
    assert payload["backend"] in ("compiled", "python")
    assert payload["config"]["seed"] == FAST.seed
    assert payload["all_passed"] is True
    assert [c["name"] for c in payload["checks"]] == ["tmax"]
    # keys are sorted for byte stability
    assert js1 == json.dumps(payload, sort_keys=True, indent=2) + "\n"


def test_report_json_seed_changes_bytes():
    cfg2 = dataclasses.replace(FAST, seed=43)
    js1 = report_json(run_checks(["tmax"], FAST), FAST)
    js2 = report_json(run_checks(["tmax"], cfg2), cfg2)
    assert js1 != js2


def test_report_text_table():
    reps = run_checks(["tmax", "weights"], FAST)
    text = report_text(reps)
    assert "tmax" in text and "weights" in text
    assert "overall: PASS" in text
    failing = [dataclasses.replace(reps[0], status="fail")]
    assert "overall: FAIL" in report_text(failing)


def test_all_check_names_runnable():
    assert set(CHECK_NAMES) == {"kernel", "tmax", "ratio", "domination",
                                "weights"}


# -- far-pair sampling -----------------------------------------------------------


def test_sample_far_pairs_properties():
    grid = Grid(GridConfig(1, 21))
    rng = np.random.default_rng([1, 2])
    pairs = sample_far_pairs(rng, grid, 40)
    assert len(pairs) == 40
    for cube_r, cube_rp, xs, ys in pairs:
        assert cube_r.layer in (0, 1, 2, 3)
        assert cube_r.box().contains_point(xs)
        assert cube_rp.box().contains_point(ys)
        # rejected the zero-time growth box, so the pair is far
        m0 = grid.growth_exponent(cube_r, 1e-12)
        assert not grid.cube_in_growth_box(cube_rp, m0)
        assert 2.0 ** 15 <= abs(ys[0]) <= 2.0 ** 21


def test_sample_far_pairs_deterministic():
    grid = Grid(GridConfig(1, 21))
    a = sample_far_pairs(np.random.default_rng([5, 1]), grid, 10)
    b = sample_far_pairs(np.random.default_rng([5, 1]), grid, 10)
    assert a == b
    c = sample_far_pairs(np.random.default_rng([5, 2]), grid, 10)
    assert a != c
