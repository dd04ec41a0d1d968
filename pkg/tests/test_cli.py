import json
from pathlib import Path

import numpy as np
import pytest

from xispectra import __version__
from xispectra.cli import main

FIXTURE = Path(__file__).parent / "data" / "null_200x100.csv"


def _write_csv(path, values, header=None):
    lines = [] if header is None else [",".join(header)]
    for row in np.atleast_2d(values):
        lines.append(",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _dependent_matrix(n=30, seed=2):
    x = np.random.default_rng(seed).standard_normal(n)
    z = np.random.default_rng(seed + 1).standard_normal(n)
    return np.column_stack([x, x**3, z])


class TestTestCommand:
    def test_null_fixture_accepts_everywhere(self, capsys):
        rc = main(
            [
                "test",
                "--input",
                str(FIXTURE),
                "--seed",
                "0",
                "--mc-reps",
                "200",
                "--centering-reps",
                "200",
            ]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["meta"]["version"] == __version__
        assert payload["meta"]["seed"] == 0
        assert payload["input"]["n"] == 200 and payload["input"]["p"] == 100
        assert payload["input"]["header_detected"] is False
        names = [r["name"] for r in payload["reports"]]
        assert len(names) == 9
        for report in payload["reports"]:
            assert report["reject"] is False, report["name"]
            # standardized decision convention
            assert report["reject"] == (report["value"] > report["threshold"])

    def test_dependent_columns_reject(self, tmp_path, capsys):
        path = tmp_path / "dep.csv"
        _write_csv(path, _dependent_matrix())
        rc = main(["test", "--input", str(path), "--stats", "q_xi2", "--seed", "1"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        (report,) = payload["reports"]
        assert report["name"] == "q_xi2"
        assert report["reject"] is True

    def test_header_detection_changes_nothing_else(self, tmp_path, capsys):
        values = _dependent_matrix()
        bare = tmp_path / "bare.csv"
        headed = tmp_path / "headed.csv"
        _write_csv(bare, values)
        _write_csv(headed, values, header=("alpha", "beta", "gamma"))
        assert main(["test", "--input", str(bare), "--stats", "q_xi2"]) == 0
        out_bare = json.loads(capsys.readouterr().out)
        assert main(["test", "--input", str(headed), "--stats", "q_xi2"]) == 0
        out_headed = json.loads(capsys.readouterr().out)
        assert out_bare["input"]["header_detected"] is False
        assert out_headed["input"]["header_detected"] is True
        assert out_bare["reports"] == out_headed["reports"]

    def test_missing_file_exit_2(self, tmp_path, capsys):
        rc = main(["test", "--input", str(tmp_path / "nope.csv")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_non_numeric_cell_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,oops\n5.0,6.0\n", encoding="utf-8")
        assert main(["test", "--input", str(path)]) == 2
        assert "non-numeric" in capsys.readouterr().err

    def test_ragged_rows_exit_2(self, tmp_path, capsys):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0,4.0,5.0\n6.0,7.0\n", encoding="utf-8")
        assert main(["test", "--input", str(path)]) == 2
        assert "ragged" in capsys.readouterr().err

    def test_too_small_matrix_exit_2(self, tmp_path, capsys):
        path = tmp_path / "tiny.csv"
        path.write_text("1.0,2.0\n3.0,4.0\n", encoding="utf-8")
        assert main(["test", "--input", str(path)]) == 2
        capsys.readouterr()

    def test_unknown_statistic_exit_2(self, tmp_path, capsys):
        path = tmp_path / "d.csv"
        _write_csv(path, _dependent_matrix())
        assert main(["test", "--input", str(path), "--stats", "q_bogus"]) == 2
        assert "unknown statistic" in capsys.readouterr().err

    def test_ties_exit_3_and_random_recovery(self, tmp_path, capsys):
        path = tmp_path / "tied.csv"
        values = np.column_stack(
            [
                np.array([1.0, 1.0, 2.0, 3.0, 4.0]),
                np.array([5.0, 4.0, 3.0, 2.0, 1.0]),
            ]
        )
        _write_csv(path, values)
        rc = main(["test", "--input", str(path), "--stats", "q_xi2"])
        assert rc == 3
        assert "--ties random" in capsys.readouterr().err
        rc = main(
            ["test", "--input", str(path), "--stats", "q_xi2", "--ties", "random"]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["input"]["tie_policy"] == "random"

    def test_constant_column_exit_2(self, tmp_path, capsys):
        path = tmp_path / "const.csv"
        values = np.column_stack([np.arange(10.0), np.ones(10)])
        _write_csv(path, values)
        rc = main(["test", "--input", str(path), "--stats", "q_r2"])
        assert rc == 2
        assert "zero variance" in capsys.readouterr().err

    def test_output_file(self, tmp_path, capsys):
        src = tmp_path / "d.csv"
        out = tmp_path / "report.json"
        _write_csv(src, _dependent_matrix())
        rc = main(
            ["test", "--input", str(src), "--stats", "q_xi2", "--output", str(out)]
        )
        assert rc == 0
        captured = capsys.readouterr()
        assert captured.out == ""
        assert f"wrote {out}" in captured.err
        payload = json.loads(out.read_text(encoding="utf-8"))
        assert payload["meta"]["tool"] == "xispectra"


class TestSimulateCommand:
    BASE = [
        "simulate",
        "size",
        "--model",
        "a",
        "--stats",
        "q_xi2",
        "--n",
        "20",
        "--p",
        "10",
        "--reps",
        "100",
        "--seed",
        "3",
    ]

    def test_csv_shape_and_comment(self, capsys):
        rc = main(self.BASE)
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0].startswith(f"# xispectra {__version__} | xispectra simulate size ")
        assert out[0].endswith("| seed=3")
        assert out[1] == "model,n,p,stat,reps,rejection_rate"
        model, n, p, stat, reps, rate = out[2].split(",")
        assert (model, n, p, stat, reps) == ("a", "20", "10", "q_xi2", "100")
        assert 0.0 <= float(rate) <= 1.0

    def test_identical_commands_are_byte_identical(self, tmp_path):
        out = tmp_path / "table.csv"
        argv = self.BASE + ["--output", str(out)]
        assert main(argv) == 0
        first = out.read_bytes()
        assert main(argv) == 0
        assert out.read_bytes() == first

    def test_size_rejects_power_model(self, capsys):
        rc = main(["simulate", "size", "--model", "c", "--reps", "100"])
        assert rc == 4
        capsys.readouterr()

    def test_power_rejects_odd_p_for_paired_model(self, capsys):
        rc = main(
            ["simulate", "power", "--model", "e", "--n", "20", "--p", "5", "--reps", "100"]
        )
        assert rc == 4
        assert "even p" in capsys.readouterr().err

    def test_full_conflicts_with_explicit_grid(self, capsys):
        rc = main(["simulate", "size", "--full", "--n", "50"])
        assert rc == 4
        assert "--full" in capsys.readouterr().err

    def test_small_reps_exit_4(self, capsys):
        rc = main(["simulate", "size", "--model", "a", "--n", "20", "--p", "10", "--reps", "50"])
        assert rc == 4
        capsys.readouterr()

    def test_mismatched_grid_lists_exit_4(self, capsys):
        rc = main(
            ["simulate", "size", "--model", "a", "--n", "20,30", "--p", "10", "--reps", "100"]
        )
        assert rc == 4
        capsys.readouterr()

    def test_power_runs(self, capsys):
        rc = main(
            [
                "simulate",
                "power",
                "--model",
                "e",
                "--stats",
                "q_xi2",
                "--n",
                "60",
                "--p",
                "4",
                "--reps",
                "100",
                "--seed",
                "0",
            ]
        )
        assert rc == 0
        rows = capsys.readouterr().out.splitlines()
        rate = float(rows[2].rsplit(",", 1)[1])
        assert rate > 0.5


class TestEsdCommand:
    def test_histogram_output(self, tmp_path, capsys):
        out = tmp_path / "esd.csv"
        rc = main(
            [
                "esd",
                "--kind",
                "psi",
                "--n",
                "30",
                "--p",
                "10",
                "--reps",
                "2",
                "--bins",
                "20",
                "--seed",
                "1",
                "--output",
                str(out),
            ]
        )
        assert rc == 0
        assert "ks=" in capsys.readouterr().out
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("# xispectra")
        assert "marchenko_pastur" in lines[1] and "ks=" in lines[1]
        assert lines[2] == "bin_lo,bin_hi,density"
        rows = [line.split(",") for line in lines[3:]]
        assert len(rows) == 20
        mass = sum((float(hi) - float(lo)) * float(d) for lo, hi, d in rows)
        assert mass == pytest.approx(1.0, rel=1e-9)

    def test_phi_law_description(self, capsys):
        rc = main(["esd", "--kind", "phi", "--n", "30", "--p", "10", "--reps", "1"])
        assert rc == 0
        assert "semicircle(u=1.0," in capsys.readouterr().out

    def test_bad_reps_exit_4(self, capsys):
        rc = main(["esd", "--kind", "phi", "--n", "30", "--p", "10", "--reps", "0"])
        assert rc == 4
        capsys.readouterr()

    def test_figure_rendering(self, tmp_path, capsys):
        fig = tmp_path / "esd.png"
        rc = main(
            [
                "esd",
                "--kind",
                "phi",
                "--n",
                "30",
                "--p",
                "10",
                "--reps",
                "1",
                "--figure",
                str(fig),
                "--output",
                str(tmp_path / "esd.csv"),
            ]
        )
        assert rc == 0
        assert fig.exists() and fig.stat().st_size > 0
        capsys.readouterr()


class TestCltCommand:
    def test_output_rows_and_summary(self, tmp_path, capsys):
        out = tmp_path / "clt.csv"
        rc = main(
            [
                "clt",
                "--k",
                "1",
                "--n",
                "25",
                "--p",
                "8",
                "--reps",
                "200",
                "--seed",
                "2",
                "--output",
                str(out),
            ]
        )
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "sample_variance=" in stdout and "reference_variance=" in stdout
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[1] == "k,replication,value"
        body = [line.split(",") for line in lines[2:]]
        assert len(body) == 200
        assert {row[0] for row in body} == {"1"}
        # values are centered draws: they sum to zero
        assert sum(float(row[2]) for row in body) == pytest.approx(0.0, abs=1e-8)

    def test_small_reps_exit_4(self, capsys):
        rc = main(["clt", "--k", "1", "--n", "25", "--p", "8", "--reps", "100"])
        assert rc == 4
        capsys.readouterr()

    def test_bad_k_exit_4(self, capsys):
        rc = main(["clt", "--k", "0", "--n", "25", "--p", "8", "--reps", "200"])
        assert rc == 4
        capsys.readouterr()

    def test_multi_k_figures(self, tmp_path, capsys):
        fig = tmp_path / "clt.png"
        rc = main(
            [
                "clt",
                "--k",
                "1,2",
                "--n",
                "20",
                "--p",
                "6",
                "--reps",
                "200",
                "--figure",
                str(fig),
                "--output",
                str(tmp_path / "clt.csv"),
            ]
        )
        assert rc == 0
        assert (tmp_path / "clt_k1.png").exists()
        assert (tmp_path / "clt_k2.png").exists()
        capsys.readouterr()


class TestVerifyCommand:
    def test_counterexample_suite_matches(self, capsys):
        rc = main(["verify", "--suite", "counterexample"])
        assert rc == 0
        out = capsys.readouterr().out.splitlines()
        assert out[-1] == "# 2/2 quantities match"
        assert all(line.endswith("MATCH") for line in out[:-1])

    def test_trees_suite_matches(self, capsys):
        rc = main(["verify", "--suite", "trees"])
        assert rc == 0
        assert capsys.readouterr().out.splitlines()[-1] == "# 3/3 quantities match"

    def test_full_suite_reports_the_two_documented_mismatches(self, capsys):
        rc = main(["verify", "--suite", "all"])
        assert rc == 5
        captured = capsys.readouterr()
        lines = captured.out.splitlines()
        assert lines[-1] == "# 35/37 quantities match"
        mismatched = [line for line in lines if line.endswith("MISMATCH")]
        assert len(mismatched) == 2
        assert any(line.startswith("var_xi_sq_n3,") for line in mismatched)
        assert any(line.startswith("normalized_third_moment_n3,") for line in mismatched)
        # enumerated diagnostics are surfaced on stderr
        assert "variance_enumerated=1/2048" in captured.err

    def test_output_file_gets_comment_line(self, tmp_path, capsys):
        out = tmp_path / "verify.txt"
        rc = main(["verify", "--suite", "trees", "--seed", "7", "--output", str(out)])
        assert rc == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("# xispectra") and lines[0].endswith("seed=7")
        capsys.readouterr()


class TestSeedHandling:
    def test_env_seed_is_used_and_echoed(self, capsys, monkeypatch):
        monkeypatch.setenv("XISPECTRA_SEED", "9")
        rc = main(["esd", "--kind", "phi", "--n", "20", "--p", "5", "--reps", "1"])
        assert rc == 0
        assert "seed=9" in capsys.readouterr().out.splitlines()[0]

    def test_explicit_seed_overrides_env(self, capsys, monkeypatch):
        monkeypatch.setenv("XISPECTRA_SEED", "9")
        rc = main(
            ["esd", "--kind", "phi", "--n", "20", "--p", "5", "--reps", "1", "--seed", "4"]
        )
        assert rc == 0
        assert "seed=4" in capsys.readouterr().out.splitlines()[0]

    def test_invalid_env_seed(self, monkeypatch, capsys):
        monkeypatch.setenv("XISPECTRA_SEED", "abc")
        with pytest.raises(SystemExit):
            main(["verify", "--suite", "trees"])
        capsys.readouterr()

    def test_negative_seed_exit_2(self, capsys):
        rc = main(["verify", "--suite", "trees", "--seed", "-1"])
        assert rc == 2
        capsys.readouterr()

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        out = tmp_path / "t.csv"
        base = [
            "simulate",
            "size",
            "--model",
            "a",
            "--stats",
            "q_xi2",
            "--n",
            "20",
            "--p",
            "10",
            "--reps",
            "100",
            "--seed",
            "0",
            "--output",
            str(out),
        ]
        assert main(base + ["--threads", "1"]) == 0
        one = out.read_text(encoding="utf-8")
        assert main(base + ["--threads", "4"]) == 0
        four = out.read_text(encoding="utf-8")
        # the comment line embeds the differing command line; the table
        # itself must be identical
        assert one.splitlines()[1:] == four.splitlines()[1:]


class TestParserBasics:
    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit):
            main(["frobnicate"])
        capsys.readouterr()
