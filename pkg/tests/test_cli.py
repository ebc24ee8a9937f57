"""Command-line interface: manifests, output formats, exit codes, and
byte determinism."""

import csv
import io
import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "relu_entropy.cli"]


def run_cli(*args, check=False):
    proc = subprocess.run(
        CLI + list(args), capture_output=True, text=True, timeout=600
    )
    if check and proc.returncode != 0:
        raise AssertionError(
            f"exit {proc.returncode}\nstdout: {proc.stdout}\nstderr: {proc.stderr}"
        )
    return proc


def parse_json(proc):
    return json.loads(proc.stdout)


class TestDispatch:
    def test_no_subcommand_is_usage_error(self):
        proc = run_cli()
        assert proc.returncode == 2

    def test_unknown_subcommand(self):
        proc = run_cli("frobnicate")
        assert proc.returncode == 2

    def test_unknown_flag_suggests(self):
        proc = run_cli("kappa", "--model", "lip", "--c", "1", "--n", "1000",
                       "--seeed", "3")
        assert proc.returncode == 2
        assert "--seed" in proc.stderr

    def test_help_exits_zero(self):
        proc = run_cli("--help")
        assert proc.returncode == 0
        for name in ("bounds", "quantize-verify", "pack-pwl", "cover-oracle",
                     "transform-check", "bit-budget", "regress", "kappa",
                     "constants"):
            assert name in proc.stdout

    def test_threads_must_be_positive(self):
        proc = run_cli("kappa", "--model", "lip", "--c", "1", "--n", "1000",
                       "--threads", "0")
        assert proc.returncode == 2


class TestManifest:
    def test_every_json_payload_carries_manifest(self):
        proc = run_cli("kappa", "--model", "lip", "--c", "1", "--n", "1000",
                       check=True)
        doc = parse_json(proc)
        man = doc["manifest"]
        assert man["subcommand"] == "kappa"
        assert "flags" in man and "seed" in man and "version" in man
        assert "started_at" in man and "finished_at" in man

    def test_manifest_records_flags(self):
        proc = run_cli("kappa", "--model", "lip", "--c", "4", "--n", "100",
                       check=True)
        man = parse_json(proc)["manifest"]
        assert man["flags"]["c"] == 4.0
        assert man["flags"]["n"] == 100


class TestKappa:
    def test_golden_point(self):
        proc = run_cli("kappa", "--model", "lip", "--c", "1", "--n", "1000",
                       check=True)
        doc = parse_json(proc)
        assert doc["kappa"] == pytest.approx(0.1, abs=1e-12)

    def test_unknown_model(self):
        proc = run_cli("kappa", "--model", "nope", "--c", "1", "--n", "1000")
        assert proc.returncode == 2


class TestConstants:
    def test_table_lists_ledger(self):
        proc = run_cli("constants", check=True)
        body = [ln for ln in proc.stdout.splitlines() if not ln.startswith("#")]
        rows = list(csv.DictReader(io.StringIO("\n".join(body))))
        names = {r["name"] for r in rows}
        assert "C_fc_upper" in names and "C_regression" in names
        by_name = {r["name"]: r for r in rows}
        assert float(by_name["C_fc_upper"]["value"]) == 30.0
        assert by_name["C_fc_upper"]["kind"] == "proof-traced"


class TestBounds:
    def test_fc_upper(self):
        proc = run_cli("bounds", "--family", "fc", "--W", "60", "--L", "60",
                       "--B", "1.0", "--eps", "0.0625", check=True)
        rep = parse_json(proc)["report"]
        assert rep["value"] > 0
        assert rep["regime"] == "upper"

    def test_quantized_needs_bits(self):
        proc = run_cli("bounds", "--family", "quantized", "--W", "8",
                       "--L", "4", "--eps", "0.0625")
        assert proc.returncode == 2


class TestQuantizeVerify:
    def test_pass_exits_zero(self):
        proc = run_cli("quantize-verify", "--d", "1", "--W", "4", "--L", "3",
                       "--B", "1.0", "--eps", "0.25", "--trials", "20",
                       "--seed", "0", check=True)
        doc = parse_json(proc)
        assert doc["report"]["pass"] is True
        assert proc.returncode == 0


class TestPackPwl:
    def test_golden_grid(self):
        proc = run_cli("pack-pwl", "--N", "2", "--E", "1", "--eps", "0.0625",
                       check=True)
        doc = parse_json(proc)
        assert doc["levels"] == 2
        assert doc["cardinality"] == 9
        assert doc["certificate_count"] == 4
        assert doc["min_distance_bound"] == pytest.approx(0.125)

    def test_csv_out(self, tmp_path):
        out = tmp_path / "members.csv"
        run_cli("pack-pwl", "--N", "2", "--E", "1", "--eps", "0.0625",
                "--csv-out", str(out), check=True)
        lines = out.read_text().splitlines()
        data = [ln for ln in lines if not ln.startswith("#")]
        assert data[0].startswith("node_0,")
        assert len(data) == 1 + 9


class TestCoverOracle:
    def test_pm1_sandwich_row(self):
        proc = run_cli("cover-oracle", "--d", "1", "--W", "1", "--L", "2",
                       "--domain=-1,1", "--eps", "0.25", check=True)
        body = [ln for ln in proc.stdout.splitlines() if not ln.startswith("#")]
        assert body[0] == "eps,lowerN,upperN"
        eps, lower, upper = body[1].split(",")
        assert float(eps) == 0.25
        assert int(lower) <= int(upper)

    def test_cap_exceeded_reports_exact_count(self):
        proc = run_cli("cover-oracle", "--d", "1", "--W", "2", "--L", "2",
                       "--domain=-1,0,1", "--eps", "0.25", "--cap", "100")
        assert proc.returncode == 2
        assert "2277" in proc.stderr


class TestTransformCheck:
    def test_normalized_impossible(self):
        proc = run_cli("transform-check", "--src-W", "60", "--src-L", "60",
                       "--src-B", "1.0", "--dst-W", "30", "--dst-L", "30",
                       "--dst-B", "1.0", "--eps", "0.0625", "--normalized")
        doc = parse_json(proc)
        assert doc["verdict"] == "impossible"

    def test_identity_holds(self):
        proc = run_cli("transform-check", "--src-W", "60", "--src-L", "60",
                       "--src-B", "1.0", "--dst-W", "60", "--dst-L", "60",
                       "--dst-B", "1.0", "--eps", "0.0625", "--normalized",
                       check=True)
        doc = parse_json(proc)
        assert doc["verdict"] == "necessary-condition-holds"


class TestBitBudget:
    def test_golden(self):
        proc = run_cli("bit-budget", "--W", "60", "--L", "60", "--B", "1.0",
                       "--kappa", "0.0625", check=True)
        doc = parse_json(proc)
        assert doc["budget"]["achievable_b"] == 366


class TestDeterminism:
    def test_csv_bodies_identical_across_runs(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["pack-pwl", "--N", "2", "--E", "1", "--eps", "0.0625"]
        run_cli(*args, "--csv-out", str(a), check=True)
        run_cli(*args, "--csv-out", str(b), check=True)
        body = lambda p: [ln for ln in p.read_text().splitlines()
                          if not ln.startswith("#")]
        assert body(a) == body(b)

    def test_json_key_order_stable(self):
        p1 = run_cli("kappa", "--model", "lip", "--c", "1", "--n", "1000",
                     check=True)
        p2 = run_cli("kappa", "--model", "lip", "--c", "1", "--n", "1000",
                     check=True)
        strip = lambda doc: {k: v for k, v in doc.items() if k != "manifest"}
        assert strip(parse_json(p1)) == strip(parse_json(p2))
        keys1 = list(parse_json(p1))
        assert keys1 == sorted(keys1)


class TestRegressCommand:
    def test_tiny_run_writes_csv_and_summary(self, tmp_path):
        csv_out = tmp_path / "rows.csv"
        json_out = tmp_path / "summary.json"
        proc = run_cli(
            "regress", "--n-list", "32,64,128,256", "--reps", "1",
            "--restarts", "2", "--steps", "60", "--sigma", "0.1",
            "--seed", "0", "--out", str(csv_out), "--json-out", str(json_out),
            check=True)
        assert proc.returncode == 0
        rows = [ln for ln in csv_out.read_text().splitlines()
                if not ln.startswith("#")]
        assert rows[0] == "n,depth,median_err,slope_so_far"
        assert len(rows) == 1 + 4
        doc = json.loads(json_out.read_text())
        assert "slope" in doc and "three_factor" in doc
        tf = doc["three_factor"]
        assert {"fc_log_covering_upper", "lip_entropy_lower",
                "lip_entropy_upper", "kappa_n"} <= set(tf)
