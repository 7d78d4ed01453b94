import csv
import io
import json
import math

import pytest

from fitness_tails.cli import main
from fitness_tails.reports import VERIFY_COLUMNS, fmt_value


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestBound:
    def test_generator_rows(self, capsys):
        code, out, _ = run(capsys, "bound", "--spec", "onemax:100:50", "--delta", "100,200")
        assert code == 0
        rows = rows_of(out)
        assert [float(r["delta"]) for r in rows] == [100, 200]
        s = sum((100 / i) ** 2 for i in range(1, 51))
        assert float(rows[0]["s"]) == pytest.approx(s, rel=1e-12)
        assert float(rows[0]["lower_bound"]) == pytest.approx(math.exp(-(100**2) / (2 * s)), rel=1e-14)

    def test_zero_delta(self, capsys):
        code, out, _ = run(capsys, "bound", "--probs", "0.5,0.5", "--delta", "0")
        row = rows_of(out)[0]
        assert code == 0
        assert row["upper_bound"] == "1" and row["upper_regime"] == "degenerate"
        assert row["lower_regime"] == "degenerate"

    def test_linear_regime(self, capsys):
        _, out, _ = run(capsys, "bound", "--probs", "0.5,0.5", "--delta", "8")
        row = rows_of(out)[0]
        assert float(row["upper_bound"]) == pytest.approx(math.exp(-1), rel=1e-15)
        assert row["upper_regime"] == "linear"
        assert float(row["upper_time"]) == 12

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(capsys, "bound", "--probs", "0.5,0.5", "--delta", "2")
        row = rows_of(out)[0]
        assert row["lower_bound"] == format(math.exp(-0.25), ".17g")
        assert float(row["lower_bound"]) == math.exp(-0.25)

    def test_skip_drops_lower_time(self, capsys):
        _, out, _ = run(capsys, "bound", "--probs", "0.5,0.5", "--delta", "2", "--skip")
        assert rows_of(out)[0]["lower_time"] == ""

    def test_json(self, capsys):
        _, out, _ = run(capsys, "bound", "--probs", "0.5,0.5", "--delta", "2", "--format", "json")
        data = json.loads(out)
        assert data["schema"] == 1 and out.endswith("\n")
        assert data["rows"][0]["upper_regime"] == "quadratic"

    @pytest.mark.parametrize("grid", ["2,1", "-1", "a,b", "1,1"])
    def test_bad_grid(self, capsys, grid):
        code, _, err = run(capsys, "bound", "--probs", "0.5", "--delta", grid)
        assert code == 2 and "error" in err

    def test_bad_override(self, capsys):
        code, _, err = run(capsys, "bound", "--probs", "0.5,0.5", "--delta", "1", "--s", "1")
        assert code == 2

    def test_spec_file(self, capsys, tmp_path):
        f = tmp_path / "spec.json"
        f.write_text(json.dumps({"schema": 1, "probs": [0.5, 0.5]}))
        code, out, _ = run(capsys, "bound", "--spec", str(f), "--delta", "8")
        assert code == 0 and rows_of(out)[0]["upper_regime"] == "linear"
        f.write_text(json.dumps({"schema": 1, "generator": "onemax", "n": 10, "k": 2}))
        code, out, _ = run(capsys, "bound", "--spec", str(f), "--delta", "8")
        assert code == 0

    def test_malformed_spec_file_reports_line(self, capsys, tmp_path):
        f = tmp_path / "spec.json"
        f.write_text('{\n  "schema": 1,\n  "probs": [0.5,, 0.5]\n}\n')
        code, _, err = run(capsys, "bound", "--spec", str(f), "--delta", "1")
        assert code == 2 and f"{f}:3:" in err

    def test_invalid_probability_reports_line(self, capsys, tmp_path):
        f = tmp_path / "spec.json"
        f.write_text('{\n  "schema": 1,\n\n  "probs": [0.5, 1.5]\n}\n')
        code, _, err = run(capsys, "bound", "--spec", str(f), "--delta", "1")
        assert code == 2 and f"{f}:4:" in err

    def test_plot(self, capsys, tmp_path):
        png = tmp_path / "b.png"
        code, _, _ = run(capsys, "bound", "--probs", "0.5,0.5", "--delta", "1,2,4,8", "--plot", str(png))
        assert code == 0 and png.stat().st_size > 0


class TestSimulate:
    def test_coupon_complete(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--process", "coupon-collector", "--n", "5", "--k", "5",
            "-R", "50", "--seed", "1", "--format", "json",
        )
        data = json.loads(out)
        assert code == 0 and data["counts"] == {"1": 50}

    def test_level_chain_deterministic(self, capsys):
        code, out, _ = run(capsys, "simulate", "--probs", "1,1", "-R", "100", "--seed", "4")
        rows = rows_of(out)
        counts = {r["key"]: r["value"] for r in rows if r["row_type"] == "count"}
        assert code == 0 and counts == {"3": "100"}

    def test_requires_seed(self, capsys):
        code, _, err = run(capsys, "simulate", "--process", "rls-onemax", "--n", "5", "-R", "5")
        assert code == 2 and "seed" in err

    def test_cap_exit_code(self, capsys):
        code, _, err = run(
            capsys, "simulate", "--process", "rls-onemax", "--n", "50", "--k", "0",
            "-R", "3", "--seed", "1", "--cap", "5",
        )
        assert code == 3 and "replication 0" in err

    def test_config_file_and_rerun_identical(self, capsys, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps(
            {"schema": 1, "process": "rls-onemax", "n": 20, "init": {"level": 3},
             "replications": 200, "seed": 8}
        ))
        outs = []
        for i in range(2):
            path = tmp_path / f"o{i}.json"
            assert main(["simulate", "--config", str(cfg), "--format", "json", "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]
        data = json.loads(outs[0])
        assert data["config"]["init"] == {"level": 3}
        assert sum(data["counts"].values()) == 200

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text('{\n "schema": 1,\n "process": "rls-onemax",\n "bogus": 1\n}')
        code, _, err = run(capsys, "simulate", "--config", str(cfg))
        assert code == 2 and ":4:" in err

    def test_plot(self, capsys, tmp_path):
        png = tmp_path / "h.png"
        code, _, _ = run(
            capsys, "simulate", "--process", "rls-onemax", "--n", "8", "--k", "0",
            "-R", "300", "--seed", "2", "--plot", str(png),
        )
        assert code == 0 and png.stat().st_size > 0


class TestVerify:
    def test_oracle_only(self, capsys):
        code, out, _ = run(capsys, "verify", "--probs", "0.2,0.2,0.2,0.2,0.2", "--delta", "1,2,4,8")
        rows = rows_of(out)
        assert code == 0
        assert tuple(rows[0].keys()) == VERIFY_COLUMNS
        for r in rows:
            assert float(r["exact_tail"]) <= float(r["chernoff_bound"]) <= float(r["closed_form_bound"])
            assert r["empirical_tail"] == "" and r["verdict"] == "pass"

    def test_self_test_fails_loudly(self, capsys):
        code, out, err = run(
            capsys, "verify", "--process", "rls-onemax", "--n", "6", "--k", "0",
            "-R", "2000", "--seed", "3", "--r", "0.5,1,2", "--corrupt", "0.5",
        )
        assert code == 1 and "failed" in err
        assert any(r["verdict"] == "fail" for r in rows_of(out))

    def test_uniform_init_marks_exact_absent(self, capsys):
        code, out, _ = run(
            capsys, "verify", "--process", "rls-onemax", "--n", "40", "-R", "500",
            "--seed", "3", "--r", "0.5,1",
        )
        rows = rows_of(out)
        assert code == 0
        assert all(r["exact_tail"] == "" and r["chernoff_bound"] == "" for r in rows)

    def test_r_grid_needs_onemax(self, capsys):
        code, _, _ = run(capsys, "verify", "--probs", "0.5,0.5", "--r", "1")
        assert code == 2

    def test_json_and_plot(self, capsys, tmp_path):
        png = tmp_path / "v.png"
        code, out, _ = run(
            capsys, "verify", "--spec", "onemax:8:0", "--process", "coupon-collector",
            "-R", "2000", "--seed", "5", "--r", "0.5,1,2", "--format", "json", "--plot", str(png),
        )
        data = json.loads(out)
        assert code == 0 and data["grid_kind"] == "r" and len(data["rows"]) == 6
        assert png.stat().st_size > 0


class TestExact:
    def test_pmf(self, capsys):
        code, out, _ = run(capsys, "exact", "--probs", "0.5,0.5", "--t-max", "4")
        rows = rows_of(out)
        assert code == 0
        assert [float(r["mass"]) for r in rows[:3]] == [0.25, 0.25, 0.1875]
        assert rows[-1]["t"] == "residual" and float(rows[-1]["mass"]) == pytest.approx(0.3125)

    def test_tail_query(self, capsys):
        _, out, _ = run(capsys, "exact", "--probs", "0.5,0.5", "--threshold", "3", "--format", "json")
        assert json.loads(out)["rows"][0]["probability"] == pytest.approx(0.5)

    def test_too_large(self, capsys):
        code, _, err = run(capsys, "exact", "--spec", "onemax:2000:0", "--t-max", "100000")
        assert code == 2


def test_fmt_value():
    assert fmt_value(None) == ""
    assert fmt_value(3) == "3"
    assert fmt_value(0.1) == "0.10000000000000001"
    assert fmt_value(True) == "true"
