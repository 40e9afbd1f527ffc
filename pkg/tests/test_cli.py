import json
import math

import pytest

from nlprobe.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_record(text):
    out = {}
    for line in text.strip().splitlines():
        key, val = line.split("=", 1)
        out[key] = val
    return out


class TestQfiCommand:
    def test_coherent_example(self, capsys):
        code, out, _ = run_cli(
            capsys, "qfi", "--n", "1", "--gamma", "0", "--zeta", "2", "--lambda", "1"
        )
        assert code == 0
        rec = parse_record(out)
        assert float(rec["f_ll"]) == pytest.approx(72.0, rel=1e-10)
        assert float(rec["f_zz"]) == pytest.approx(16.0, rel=1e-10)
        assert float(rec["f_lz"]) == pytest.approx(32.0, rel=1e-10)

    def test_vacuum_linear(self, capsys):
        code, out, _ = run_cli(
            capsys, "qfi", "--n", "0", "--gamma", "0", "--zeta", "1", "--lambda", "1"
        )
        rec = parse_record(out)
        assert float(rec["f_ll"]) == pytest.approx(4.0, rel=1e-10)
        assert float(rec["f_zz"]) == 0.0

    def test_oracle_delta_small_on_squeezed_vacuum(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "qfi", "--n", "3", "--gamma", "1", "--zeta", "2", "--lambda", "1", "--oracle",
        )
        rec = parse_record(out)
        for key in ("delta_f_ll", "delta_f_zz", "delta_f_lz"):
            assert abs(float(rec[key])) <= 1e-6 * max(1.0, abs(float(rec["f_ll"])))

    def test_json_mode(self, capsys):
        code, out, _ = run_cli(
            capsys, "qfi", "--n", "0", "--gamma", "0", "--zeta", "2", "--lambda", "0.5", "--json"
        )
        doc = json.loads(out)
        assert doc["f_ll"] == pytest.approx(8.0)

    def test_usage_error_exits_two(self):
        with pytest.raises(SystemExit) as info:
            main(["qfi", "--n", "1"])  # missing required flags
        assert info.value.code == 2


class TestScanPhase:
    def test_grid_shape_and_header(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "scan-phase", "--n", "3", "--gamma", "0.5", "--zeta", "3",
            "--target", "f_lambda", "--grid", "4",
        )
        lines = out.strip().split("\n")
        meta = [l for l in lines if l.startswith("#")]
        body = [l for l in lines if not l.startswith("#")]
        assert body[0] == "theta,phi,value"
        assert len(body) == 1 + 16
        assert any("target=f_lambda" in l for l in meta)

    def test_degenerate_grid_matches_qfi_command(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "scan-phase", "--n", "1", "--gamma", "0", "--zeta", "2",
            "--target", "f_lambda", "--grid", "1",
        )
        value = float(out.strip().split("\n")[-1].split(",")[2])
        assert value == pytest.approx(72.0, rel=1e-10)

    def test_zero_phase_is_grid_maximum(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "scan-phase", "--n", "3", "--gamma", "0.5", "--zeta", "3",
            "--target", "f_lambda", "--grid", "8",
        )
        rows = [l.split(",") for l in out.strip().split("\n") if not l.startswith("#")][1:]
        vals = {(r[0], r[1]): float(r[2]) for r in rows}
        assert max(vals.values()) == vals[("0.0", "0.0")]

    def test_jobs_do_not_change_bytes(self, tmp_path, capsys):
        args = [
            "scan-phase", "--n", "2", "--gamma", "0.3", "--zeta", "2",
            "--target", "f_zeta", "--grid", "6",
        ]
        f1, f8 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--jobs", "1", "--out", str(f1)]) == 0
        assert main(args + ["--jobs", "8", "--out", str(f8)]) == 0
        assert f1.read_bytes() == f8.read_bytes()


class TestScanGamma:
    def test_rows_and_endpoints(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "scan-gamma", "--n", "1", "--zeta", "2", "--target", "f_lambda", "--grid", "11",
        )
        rows = [l.split(",") for l in out.strip().split("\n") if not l.startswith("#")][1:]
        assert len(rows) == 11
        assert float(rows[0][0]) == 0.0 and float(rows[-1][0]) == 1.0


class TestOptGamma:
    def test_curve_descends_from_boundary(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "opt-gamma", "--target", "f_lambda", "--zeta", "2",
            "--n-range", "0.001:10000:6",
        )
        rows = [l.split(",") for l in out.strip().split("\n") if not l.startswith("#")][1:]
        gammas = [float(r[3]) for r in rows]
        assert gammas[0] == pytest.approx(1.0, abs=1e-6)
        assert gammas[-1] == pytest.approx(0.75, abs=0.01)
        asym = [float(r[5]) for r in rows]
        assert all(a == 0.75 for a in asym)

    def test_order_target_constant_boundary(self, capsys):
        code, out, _ = run_cli(
            capsys,
            "opt-gamma", "--target", "f_zeta", "--zeta", "2", "--n-range", "0.01:100:4",
        )
        rows = [l.split(",") for l in out.strip().split("\n") if not l.startswith("#")][1:]
        assert all(float(r[3]) == pytest.approx(1.0, abs=1e-6) for r in rows)


class TestThreshold:
    def test_coupling_order_two(self, capsys):
        code, out, _ = run_cli(capsys, "threshold", "--target", "f_lambda", "--zeta", "2")
        assert code == 0
        rec = dict(kv.split("=", 1) for kv in out.split())
        assert float(rec["n_th"]) == pytest.approx((3 * math.sqrt(2) - 4) / 8, abs=5e-4)
        assert "analytic_reference" in rec

    def test_no_threshold_sentinel(self, capsys):
        code, out, _ = run_cli(capsys, "threshold", "--target", "f_zeta", "--zeta", "2")
        assert code == 0
        assert "n_th=no-threshold" in out


class TestSelftest:
    def test_passes(self, capsys):
        code, out, _ = run_cli(capsys, "selftest")
        assert code == 0
        assert "FAIL" not in out
        assert "INFO moments.default-family-vs-state-delta" in out


class TestErrorPaths:
    def test_numerical_overflow_exits_three(self, capsys):
        code, out, err = run_cli(
            capsys,
            "opt-gamma", "--target", "f_lambda", "--zeta", "12", "--n-range", "1e39:1e40:2",
        )
        assert code == 3
        assert json.loads(err)["error"] == "NumericalRangeError"

    def test_jobs_env_default(self, capsys, monkeypatch):
        monkeypatch.setenv("NLPROBE_JOBS", "4")
        from nlprobe.cli import build_parser

        args = build_parser().parse_args(["selftest"])
        assert args.jobs == 4

    def test_extended_mode_matches_double_on_scan(self, capsys):
        base = ["scan-gamma", "--n", "1", "--zeta", "2", "--target", "f_lambda", "--grid", "5"]
        _, out_d, _ = run_cli(capsys, *base)
        _, out_e, _ = run_cli(capsys, *base, "--extended")
        rows_d = [l for l in out_d.splitlines() if not l.startswith("#")][1:]
        rows_e = [l for l in out_e.splitlines() if not l.startswith("#")][1:]
        for rd, re_ in zip(rows_d, rows_e):
            vd, ve = float(rd.split(",")[1]), float(re_.split(",")[1])
            assert ve == pytest.approx(vd, rel=1e-12)
