import csv
import io
import json
import math

import pytest

from solvmax.cli import main
from solvmax.config import config_from_dict, load_config
from solvmax.errors import ConfigError
from solvmax.export import PORTRAIT_HEADER, TRAJECTORY_HEADER, dumps, fmt_float

SMALL_GRID = {"phi_min": -1.5, "phi_max": 1.5, "phi_n": 3, "r_min": -3.0, "r_max": 3.0, "r_n": 3}


@pytest.fixture
def config(tmp_path):
    def make(**extra):
        doc = {"theta": [[1, 0], [0, -2]], "eta": [1, 1], **extra}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return make


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def assert_no_nan(text):
    assert "NaN" not in text and "nan" not in text.lower().replace("non_periodic", "")


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.eta == (1.0, 1.0)
        assert cfg.group().det_theta == -2.0

    @pytest.mark.parametrize(
        "doc,field",
        [
            ({"theta": [[1, 0], [0]]}, "theta"),
            ({"eta": "x"}, "eta"),
            ({"colour": 1}, "colour"),
            ({"tolerances": {"abs": "tiny"}}, "tolerances.abs"),
            ({"grid": {"phi_n": 2.5}}, "grid.phi_n"),
        ],
    )
    def test_errors_name_field(self, doc, field):
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            config_from_dict(doc)

    def test_malformed_json_reports_position(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"theta": [[1, 0],\n [0, -2]],, }')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(str(p))


class TestExitCodes:
    def test_singular_theta(self, capsys, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"theta": [[1, 0], [0, 0]], "eta": [1, 1]}))
        code, _, err = run(capsys, "classify", "--config", str(p))
        assert code == 2 and "NotRegular" in err

    def test_not_bracket_generating(self, capsys, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"theta": [[1, 0], [0, -2]], "eta": [1, 0]}))
        assert run(capsys, "classify", "--config", str(p))[0] == 2

    def test_missing_lambda(self, capsys, config):
        assert run(capsys, "period", "--config", config())[0] == 2

    def test_bad_lambda(self, capsys, config):
        assert run(capsys, "period", "--config", config(), "--lambda", "1;2")[0] == 2

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "classify", "--config", str(tmp_path / "none.json"))[0] == 2

    def test_runtime_failure(self, capsys, config):
        # a tiny state bound makes the integrator give up
        code, _, err = run(capsys, "geodesic", "--config", config(tolerances={"max_norm": 1e-3}), "--lambda", "0,3", "--T", "5")
        assert code == 1 and "StateOverflow" in err


class TestCommands:
    def test_classify(self, capsys, config):
        code, out, _ = run(capsys, "classify", "--config", config())
        doc = json.loads(out)
        assert code == 0 and doc["regime"] == "DetNeg"
        assert {e["name"]: e["type"] for e in doc["equilibria"]}["p2"] == "Center"
        assert all(c["strip_ok"] for c in doc["separatrices"])

    def test_period_inf_string(self, capsys, config):
        code, out, _ = run(capsys, "period", "--config", config(), "--lambda", "0,0")
        doc = json.loads(out)
        assert code == 0 and doc["tau"] == "inf" and doc["classification"] == "equilibrium"
        assert_no_nan(out)

    def test_period_finite(self, capsys, config):
        doc = json.loads(run(capsys, "period", "--config", config(), "--lambda", "0,3")[1])
        assert doc["tau"] == pytest.approx(2.07599, abs=1e-5)

    def test_maxwell(self, capsys, config):
        doc = json.loads(run(capsys, "maxwell", "--config", config(), "--lambda", "0,3")[1])
        assert doc["t1_max"] == pytest.approx(doc["tau"]) and doc["on_half_pi_line"] is False
        doc = json.loads(run(capsys, "maxwell", "--config", config(), "--lambda", "1.5707963267948966,3")[1])
        assert doc["t1_max"] == "inf" and doc["on_half_pi_line"] is True

    def test_geodesic_json(self, capsys, config):
        code, out, _ = run(capsys, "geodesic", "--config", config(), "--lambda", "0,0", "--T", "2")
        doc = json.loads(out)
        assert code == 0
        assert doc["endpoint"]["z"] == pytest.approx(2.0, abs=1e-12)
        assert set(doc) >= {"endpoint", "z_zeros", "period", "events"}
        assert doc["period"]["tau"] == "inf"

    def test_geodesic_center_equilibrium(self, capsys, config):
        code, out, _ = run(capsys, "geodesic", "--config", config(), "--lambda", "-1.5707963267948966,0", "--T", "2")
        doc = json.loads(out)
        assert code == 0 and doc["endpoint"]["w"] == pytest.approx([-2.0, -2.0], abs=1e-12)
        assert_no_nan(out)

    def test_geodesic_csv(self, capsys, config, tmp_path):
        out_path = tmp_path / "traj.csv"
        code, _, _ = run(capsys, "geodesic", "--config", config(), "--lambda", "0,3", "--T", "4", "--format", "csv", "--samples", "11", "--out", str(out_path))
        assert code == 0
        rows = list(csv.reader(io.StringIO(out_path.read_text())))
        assert tuple(rows[0]) == TRAJECTORY_HEADER and len(rows) == 12
        assert float(rows[-1][0]) == 4.0
        summary = json.loads(out_path.with_suffix(".summary.json").read_text())
        assert len(summary["z_zeros"]) == len(summary["predicted_z_zeros"])

    def test_portrait_csv(self, capsys, config, tmp_path):
        out_path = tmp_path / "p.csv"
        code, _, _ = run(capsys, "portrait", "--config", config(grid=SMALL_GRID), "--out", str(out_path))
        assert code == 0
        text = out_path.read_text()
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == PORTRAIT_HEADER and len(rows) == 10
        assert_no_nan(text)
        seps = json.loads(out_path.with_suffix(".separatrices.json").read_text())["separatrices"]
        assert all(len(pt) == 2 for curve in seps.values() for pt in curve)

    def test_portrait_empty_grid(self, capsys, config):
        grid = dict(SMALL_GRID, phi_n=0)
        code, out, _ = run(capsys, "portrait", "--config", config(grid=grid))
        assert code == 0 and out.strip().splitlines() == [",".join(PORTRAIT_HEADER)]

    def test_portrait_json(self, capsys, config):
        code, out, _ = run(capsys, "portrait", "--config", config(grid=SMALL_GRID), "--format", "json")
        doc = json.loads(out)
        assert code == 0 and len(doc["grid"]) == 9


class TestVerify:
    def test_deterministic(self, capsys, config):
        a = run(capsys, "verify", "--config", config(), "--samples", "5")
        b = run(capsys, "verify", "--config", config(), "--samples", "5")
        assert a[0] == 0 and a[1] == b[1]
        doc = json.loads(a[1])
        assert doc["passed"] and doc["seed"] == 0

    def test_injected_tolerance_fails(self, capsys, config):
        code, out, _ = run(capsys, "verify", "--config", config(tolerances={"abs": 1e-2, "rel": 1e-2}), "--samples", "5")
        doc = json.loads(out)
        assert code == 1 and not doc["passed"]
        assert any(not p["passed"] for p in doc["properties"])


class TestExport:
    def test_fmt(self):
        assert fmt_float(math.inf) == "inf" and fmt_float(-math.inf) == "-inf"
        assert float(fmt_float(0.1)) == 0.1
        assert fmt_float(1 / 3) == "0.33333333333333331"
        with pytest.raises(ValueError):
            fmt_float(math.nan)

    def test_dumps(self):
        assert json.loads(dumps({"a": math.inf, "b": (1.0, 2)})) == {"a": "inf", "b": [1.0, 2]}
        with pytest.raises(ValueError):
            dumps({"a": math.nan})
