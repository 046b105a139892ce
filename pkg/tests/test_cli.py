"""End-to-end tests for the command line interface and its reports."""

import json
import math
import os
import subprocess
import sys
from fractions import Fraction as F

import pytest

from simplexmoments.cli import main
from simplexmoments.chords import EdgePointSpec, TriangleSpec, edgepoint_moment

SLOW = os.environ.get("SIMPLEXMOMENTS_SLOW") != "1"


def run_cli(args, out_path=None):
    argv = [str(a) for a in args]
    if out_path is not None:
        argv += ["--out", str(out_path)]
    code = main(argv)
    report = None
    if out_path is not None and os.path.exists(str(out_path)):
        with open(str(out_path), "r", encoding="utf-8") as fh:
            text = fh.read()
        if text.lstrip().startswith("{"):
            report = json.loads(text)
    return code, report


def assert_float_policy(node, tagged=False):
    """Floats may appear only under an object that declares its inexactness
    (a std_error sibling or a float64 method marker)."""
    if isinstance(node, dict):
        has_tag = "std_error" in node or node.get("method") == "float64"
        for value in node.values():
            assert_float_policy(value, has_tag)
    elif isinstance(node, (list, tuple)):
        for value in node:
            assert_float_policy(value, tagged)
    elif isinstance(node, float):
        assert tagged, "untagged float %r in report" % node


def assert_report_shape(report, command):
    assert report["schema"] == "simplexmoments-report/1"
    assert report["command"] == command
    manifest = report["manifest"]
    for key in (
        "argv",
        "seeds",
        "versions",
        "input_digests",
        "output_digests",
        "threads",
        "wall_time_seconds",
    ):
        assert key in manifest
    assert manifest["versions"]["simplexmoments"]
    assert_float_policy(report["result"])


@pytest.fixture(scope="module")
def tables_dir(tmp_path_factory):
    """A directory with complete k<=7 and k<=15 moment tables, built once."""
    path = tmp_path_factory.mktemp("tables")
    code, report = run_cli(
        ["verify-counterexample", "--tables", path, "--compute-missing"],
        path / "counterexample.json",
    )
    assert code == 0
    assert report["result"]["confirmed"] is True
    return str(path)


class TestExitCodes:
    def test_no_arguments_is_usage(self):
        assert main([]) == 2

    def test_unknown_subcommand_is_usage(self):
        assert main(["frobnicate"]) == 2

    def test_help_is_success(self):
        assert main(["--help"]) == 0

    def test_missing_required_flag_is_usage(self):
        assert main(["chords", "--triangle", "T2"]) == 2

    def test_degenerate_triangle_is_usage(self, capsys):
        assert main(["chords", "--triangle", "1,2,5", "--k", "1"]) == 2
        assert "degenerate" in capsys.readouterr().err

    def test_bad_fixed_keyword_is_usage(self):
        code = main(
            ["chords", "--triangle", "T2", "--k", "1", "--fixed", "corner"]
        )
        assert code == 2

    def test_moment_capacity_refusal(self, capsys):
        code = main(["tetra-moments", "--case", "free", "--kmax", "10"])
        assert code == 3
        assert "capacity" in capsys.readouterr().err

    def test_insufficient_tables_refusal(self, tmp_path):
        code = main(["verify-counterexample", "--tables", str(tmp_path)])
        assert code == 3

    def test_failed_certificate_is_verification_failure(self, capsys):
        # the tangent at 1 overshoots sqrt near 0, so it cannot be a lower
        # bound; the CLI must report that as a verification failure
        code = main(
            ["certify", "--side", "lower", "--nodes", "1*2", "--interval-b", "1"]
        )
        assert code == 4
        assert "verification failed" in capsys.readouterr().err

    def test_exit_codes_through_a_real_process(self, tmp_path):
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "simplexmoments.cli",
                "verify-counterexample",
                "--tables",
                str(tmp_path),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 3
        assert "insufficient moment tables" in proc.stderr


class TestChords:
    def test_midpoint_hypotenuse_example(self, tmp_path):
        code, report = run_cli(
            ["chords", "--triangle", "T2", "--k", "2", "--fixed",
             "midpoint-hypotenuse"],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "chords")
        assert report["result"]["formula"] == "edge-pinned"
        assert abs(report["result"]["value"] - 1.0 / 6.0) < 1e-10

    def test_two_point_default(self, tmp_path):
        code, report = run_cli(
            ["chords", "--triangle", "T2", "--k", "2"], tmp_path / "r.json"
        )
        assert code == 0
        assert report["result"]["formula"] == "two-point"
        assert abs(report["result"]["value"] - 2.0 / 9.0) < 1e-10

    def test_right_angle_vertex(self, tmp_path):
        # second moment of the distance from the right-angle corner of T2:
        # (int x^2 + int y^2) / area = 1/3
        code, report = run_cli(
            ["chords", "--triangle", "T2", "--k", "2", "--fixed", "vertex:C"],
            tmp_path / "r.json",
        )
        assert code == 0
        assert report["result"]["formula"] == "vertex-pinned"
        assert abs(report["result"]["value"] - 1.0 / 3.0) < 1e-10

    def test_edge_point_matches_library(self, tmp_path):
        code, report = run_cli(
            ["chords", "--triangle", "3,4,5", "--k", "3", "--fixed", "edge:2"],
            tmp_path / "r.json",
        )
        assert code == 0
        spec = TriangleSpec.from_sides(3.0, 4.0, 5.0)
        want = edgepoint_moment(spec, EdgePointSpec(2.0), 3)
        assert report["result"]["value"] == pytest.approx(want, abs=1e-14)

    def test_scalene_free_runs(self, tmp_path):
        code, report = run_cli(
            ["chords", "--triangle", "3,4,5", "--k", "1"], tmp_path / "r.json"
        )
        assert code == 0
        assert report["result"]["value"] > 0.0


class TestTetraMoments:
    def test_free_k5_reference_list(self, tmp_path):
        code, report = run_cli(
            ["tetra-moments", "--case", "free", "--kmax", "5"],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "tetra-moments")
        values = [m["value"] for m in report["result"]["moments"]]
        assert values == [
            "9/1600",
            "27/196000",
            "3161/379330560",
            "93957/106247680000",
            "209022679/1551386124288000",
        ]

    def test_fixed_k2(self, tmp_path):
        code, report = run_cli(
            ["tetra-moments", "--case", "fixed", "--kmax", "2"],
            tmp_path / "r.json",
        )
        assert code == 0
        values = [m["value"] for m in report["result"]["moments"]]
        assert values == ["7/2400", "11/529200"]
        assert report["result"]["case"] == "fixed-centroid"

    def test_checkpoint_roundtrip(self, tmp_path):
        tables = tmp_path / "tables"
        code, first = run_cli(
            ["tetra-moments", "--case", "free", "--kmax", "3", "--tables",
             tables],
            tmp_path / "a.json",
        )
        assert code == 0
        table_file = str(tables / "free_moments.json")
        assert table_file in first["manifest"]["output_digests"]
        code, second = run_cli(
            ["tetra-moments", "--case", "free", "--kmax", "3", "--tables",
             tables],
            tmp_path / "b.json",
        )
        assert code == 0
        assert table_file in second["manifest"]["input_digests"]
        assert second["result"]["moments"] == first["result"]["moments"]
        with open(table_file, "r", encoding="utf-8") as fh:
            stored = json.load(fh)
        assert stored["case"] == "free"
        assert {e["k"] for e in stored["entries"]} == {0, 1, 2, 3}


class TestNodes:
    def test_degree_one_chord(self, tmp_path):
        code, report = run_cli(
            ["nodes", "--case", "free", "--degree", "1", "--grid", "8"],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "nodes")
        result = report["result"]
        assert result["status"] == "optimal"
        assert result["objective"] == "9/1400"
        assert result["candidate_nodes"] == ["7/8"]
        assert result["active_grid_indices"] == [8]
        assert result["sense"] == "lower"

    def test_pinned_case_runs(self, tmp_path):
        code, report = run_cli(
            ["nodes", "--case", "fixed", "--degree", "2", "--grid", "12"],
            tmp_path / "r.json",
        )
        assert code == 0
        result = report["result"]
        assert result["sense"] == "upper"
        assert result["interval_end"] == "3/10"
        assert F(result["objective"]) > 0
        assert len(result["suggested_nodes"]) == len(result["candidate_nodes"])

    def test_degree_beyond_capacity(self):
        code = main(["nodes", "--case", "free", "--degree", "10", "--grid", "5"])
        assert code == 3


class TestCertify:
    def test_canonical_lower(self, tmp_path, tables_dir):
        code, report = run_cli(
            ["certify", "--side", "lower", "--tables", tables_dir],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "certify")
        result = report["result"]
        assert result["verified"] is True
        assert result["bound_above_pivot"] is True
        assert result["nodes"]["double"] == ["2/19", "4/15", "8/17"]
        assert result["nodes"]["single"] == ["0", "47/54"]
        assert result["degree"] == 7
        assert F(result["bound"]) > F(result["pivot"])

    def test_canonical_upper(self, tmp_path, tables_dir):
        code, report = run_cli(
            ["certify", "--side", "upper", "--tables", tables_dir],
            tmp_path / "r.json",
        )
        assert code == 0
        result = report["result"]
        assert result["verified"] is True
        assert result["bound_below_pivot"] is True
        assert result["degree"] == 15
        assert len(result["nodes"]["double"]) == 8

    def test_custom_chord_nodes(self, tmp_path):
        code, report = run_cli(
            ["certify", "--side", "lower", "--nodes", "0,1", "--interval-b",
             "1"],
            tmp_path / "r.json",
        )
        assert code == 0
        result = report["result"]
        # the chord through 0 and 1 is the identity, so the bound is the
        # second moment itself, far below the pivot
        assert result["coefficients"] == ["0", "1"]
        assert result["bound"] == "9/1600"
        assert result["bound_above_pivot"] is False

    def test_explicit_table_file(self, tmp_path, tables_dir):
        table_file = os.path.join(tables_dir, "free_moments.json")
        code, report = run_cli(
            ["certify", "--side", "lower", "--table", table_file],
            tmp_path / "r.json",
        )
        assert code == 0
        assert table_file in report["manifest"]["input_digests"]

    def test_short_explicit_table_is_capacity(self, tmp_path):
        short = tmp_path / "short.json"
        code, _ = run_cli(
            ["tetra-moments", "--case", "free", "--kmax", "2", "--tables",
             tmp_path],
            tmp_path / "t.json",
        )
        assert code == 0
        os.rename(tmp_path / "free_moments.json", short)
        code = main(["certify", "--side", "lower", "--table", str(short)])
        assert code == 3


class TestVerifyCounterexample:
    def test_full_verdict_from_tables(self, tmp_path, tables_dir):
        code, report = run_cli(
            ["verify-counterexample", "--tables", tables_dir],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "verify-counterexample")
        result = report["result"]
        assert result["confirmed"] is True
        assert result["second_moment"]["free"] == "9/1600"
        assert result["second_moment"]["fixed"] == "7/2400"
        assert result["second_moment"]["gap"] == "13/4800"
        assert result["lower_bound_above_pivot"] is True
        assert result["upper_bound_below_pivot"] is True
        assert F(result["mean_separation"]) > 0
        assert result["lower_certificate"]["verified"] is True
        assert result["upper_certificate"]["verified"] is True
        digests = report["manifest"]["input_digests"]
        assert os.path.join(tables_dir, "free_moments.json") in digests
        assert os.path.join(tables_dir, "fixed_moments.json") in digests

    def test_tables_env_var_default(self, tmp_path, tables_dir, monkeypatch):
        monkeypatch.setenv("SIMPLEXMOMENTS_TABLES", tables_dir)
        code, report = run_cli(["verify-counterexample"], tmp_path / "r.json")
        assert code == 0
        assert report["result"]["confirmed"] is True

    def test_no_tables_anywhere_is_usage(self, monkeypatch):
        monkeypatch.delenv("SIMPLEXMOMENTS_TABLES", raising=False)
        assert main(["verify-counterexample"]) == 2


class TestMonteCarlo:
    def test_mean_area_estimate(self, tmp_path):
        code, report = run_cli(
            ["mc", "--body", "T3", "--n", "3", "--k", "1", "--samples",
             "200000", "--seed", "11"],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "mc")
        result = report["result"]
        assert result["rng"] == "numpy-philox4x64"
        assert abs(result["mean"] - 0.0592) < 3.0 * result["std_error"] + 5e-5
        assert report["manifest"]["seeds"] == [11]

    def test_pinned_vertex_flag(self, tmp_path):
        code, report = run_cli(
            ["mc", "--body", "T3", "--n", "3", "--k", "1", "--fixed",
             "1/3,1/3,1/3", "--samples", "200000", "--seed", "12"],
            tmp_path / "r.json",
        )
        assert code == 0
        result = report["result"]
        assert abs(result["mean"] - 0.0466) < 3.0 * result["std_error"] + 5e-5

    def test_thread_count_does_not_change_numbers(self, tmp_path):
        base = [
            "mc", "--body", "cube:2", "--n", "3", "--k", "2", "--samples",
            str((1 << 16) * 2 + 333), "--seed", "99",
        ]
        code, one = run_cli(base + ["--threads", "1"], tmp_path / "a.json")
        assert code == 0
        code, four = run_cli(base + ["--threads", "4"], tmp_path / "b.json")
        assert code == 0
        assert one["result"] == four["result"]
        assert one["manifest"]["threads"] == 1
        assert four["manifest"]["threads"] == 4

    def test_fixed_point_outside_body(self):
        code = main(
            ["mc", "--body", "T3", "--n", "3", "--k", "1", "--fixed", "2,2,2",
             "--samples", "100", "--seed", "1"]
        )
        assert code == 2

    def test_unknown_body(self):
        code = main(
            ["mc", "--body", "torus:3", "--n", "2", "--k", "1", "--samples",
             "100", "--seed", "1"]
        )
        assert code == 2


class TestLiftSweep:
    def test_interior_json(self, tmp_path):
        code, report = run_cli(
            ["lift-sweep", "--mode", "interior", "--body", "T2", "--n", "2",
             "--k", "2", "--eps", "1/2,1/8", "--samples", "50000", "--seed",
             "5", "--reference", "2/9"],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "lift-sweep")
        result = report["result"]
        assert result["mode"] == "interior"
        assert [row["epsilon"] for row in result["rows"]] == ["1/2", "1/8"]
        assert result["reference"]["source"] == "exact"
        assert result["verdict"] in (
            "converged", "converged within noise", "not converged"
        )
        assert result["rows"][1]["abs_error"] < result["rows"][0]["abs_error"]

    def test_boundary_rows_have_weight_diagnostics(self, tmp_path):
        code, report = run_cli(
            ["lift-sweep", "--mode", "boundary", "--body", "T2", "--n", "2",
             "--k", "2", "--eps", "1/4", "--samples", "50000", "--seed", "6",
             "--reference", "2/9"],
            tmp_path / "r.json",
        )
        assert code == 0
        row = report["result"]["rows"][0]
        expected = (1.0 / (1.0 + (2.0 + math.sqrt(2.0)) * 0.25)) ** 2
        assert abs(row["flat_weight_exact"] - expected) < 1e-12
        assert row["flat_weight_consistent"] is True

    def test_csv_output(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code, _ = run_cli(
            ["lift-sweep", "--mode", "interior", "--body", "T2", "--n", "2",
             "--k", "1", "--eps", "1/2,1/4", "--samples", "20000", "--seed",
             "7", "--format", "csv"],
            out,
        )
        assert code == 0
        text = out.read_text(encoding="utf-8")
        lines = text.splitlines()
        comments = [line for line in lines if line.startswith("#")]
        data = [line for line in lines if not line.startswith("#")]
        assert any("manifest" in line for line in comments)
        assert any("verdict" in line for line in comments)
        assert data[0] == "epsilon,mean,std_error,samples,abs_error,sigma"
        assert len(data) == 3
        assert data[1].startswith("1/2,")

    def test_increasing_eps_is_usage(self):
        code = main(
            ["lift-sweep", "--mode", "interior", "--body", "T2", "--n", "2",
             "--k", "1", "--eps", "1/8,1/2", "--samples", "100", "--seed", "1"]
        )
        assert code == 2


class TestReproduce:
    def test_fast_level_passes(self, tmp_path, tables_dir):
        code, report = run_cli(
            ["reproduce", "fast", "--samples", "50000", "--tables", tables_dir],
            tmp_path / "r.json",
        )
        assert code == 0
        assert_report_shape(report, "reproduce")
        result = report["result"]
        assert result["all_passed"] is True
        assert "7/2400 < 9/1600" in result["headlines"]
        names = [c["name"] for c in result["checks"]]
        assert names == [
            "chord-closed-forms",
            "pinning-ratio-law",
            "even-moment-tables",
            "second-moment-comparison",
            "mc-mean-area",
        ]

    def test_fast_level_deterministic_per_seed(self, tmp_path, tables_dir):
        args = ["reproduce", "fast", "--samples", "30000", "--seed", "321",
                "--tables", tables_dir]
        code, a = run_cli(args, tmp_path / "a.json")
        assert code == 0
        code, b = run_cli(args, tmp_path / "b.json")
        assert code == 0
        assert a["result"] == b["result"]

    def test_full_level_reports_coarse_grid_failure_honestly(
        self, tmp_path, tables_dir
    ):
        # the reference LP thresholds hold on the stated 200-point grids;
        # a coarse grid must fail the check and exit 4, while the exact
        # certificate verdict still passes
        code, report = run_cli(
            ["reproduce", "full", "--samples", "30000", "--grid", "40",
             "--tables", tables_dir],
            tmp_path / "r.json",
        )
        assert code == 4
        result = report["result"]
        assert result["all_passed"] is False
        by_name = {c["name"]: c for c in result["checks"]}
        assert by_name["lp-node-searches"]["passed"] is False
        assert by_name["counterexample-verdict"]["passed"] is True
        assert "lower > 0.046942 > upper" in result["headlines"]

    @pytest.mark.slow
    @pytest.mark.skipif(SLOW, reason="set SIMPLEXMOMENTS_SLOW=1 to enable")
    def test_full_level_passes_at_stated_grid(self, tmp_path, tables_dir):
        code, report = run_cli(
            ["reproduce", "full", "--samples", "50000", "--tables", tables_dir],
            tmp_path / "r.json",
        )
        assert code == 0
        result = report["result"]
        assert result["all_passed"] is True
        assert "lower > 0.046942 > upper" in result["headlines"]
