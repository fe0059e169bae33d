import json
import math
import pathlib
import sys

import pytest

import housing_sd as hsd

if sys.version_info >= (3, 11):
    import tomllib
else:
    tomllib = pytest.importorskip("tomli")

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="module")
def params():
    return hsd.load_params(str(ROOT / "params" / "default.toml"))


def test_parameter_file_is_plain_toml(params):
    with open(ROOT / "params" / "default.toml", "rb") as fh:
        doc = tomllib.load(fh)
    assert doc["eviction_proc_proportion"]["value"] == 0.38
    assert doc["era"]["total_funds"]["value"] == params["era.total_funds"]
    assert params.provenance("landlord_tolerance") == "calibrated"


def test_params_roundtrip(params):
    p = params.copy()
    p["covid.magnitude"] = 0.3
    assert p["covid.magnitude"] == 0.3
    assert params["covid.magnitude"] != 0.3
    assert "landlord_tolerance" in hsd.Params.names()
    with pytest.raises(IndexError):
        p["no_such_parameter"]


def test_moratorium_reduces_evictions(params):
    r2 = hsd.run_scenario("run2", params)
    r3 = hsd.run_scenario("run3", params)
    change = hsd.compare(r2, r3)["total_evictions"]["percent"]
    assert abs(change + 0.51) <= 0.05
    assert len(r3.times) == 201
    assert r3.check_invariants() == []
    assert len(r3.series("R")) == len(r3.times)
    assert r3.to_csv(["R"]).startswith("t,calendar,R\n")


def test_unknown_scenario_raises(params):
    with pytest.raises(ValueError):
        hsd.run_scenario("run9", params)


def test_theil():
    t = hsd.theils_u([1, 2, 3, 4], [1, 3, 2, 4])
    assert t.U == pytest.approx(math.sqrt(0.5) / (math.sqrt(7.5) * 2))
    assert t.U_C == pytest.approx(1.0)


def test_sweep_and_extremes(params):
    rows = hsd.sensitivity_sweep(params, "run2", 0.15)
    assert rows and not any(r["flagged"] for r in rows)
    assert all(ok for _, ok, _ in hsd.extreme_conditions(params))


def test_calibrate_recovers_planted_value(params):
    spec = {
        "seed": 5,
        "max_evaluations": 300,
        "planted": {"covid.recovery_delay": 12.0},
        "free": [{"name": "covid.recovery_delay", "lower": 4, "upper": 24}],
        "targets": [{"scenario": "run2", "metric": "arrears_end"}],
    }
    fitted, report = hsd.calibrate(json.dumps(spec), params)
    assert fitted["covid.recovery_delay"] == pytest.approx(12.0, rel=0.01)
    assert report["final_loss"] <= report["initial_loss"]


def test_acceptance(params):
    results = hsd.run_acceptance(params, str(ROOT / "calibration" / "self_consistency.json"))
    assert [r[0] for r in results] == [1, 2, 3, 4, 5, 6]
    assert all(r[2] for r in results), [r for r in results if not r[2]]
