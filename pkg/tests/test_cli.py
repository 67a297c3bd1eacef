import json
import subprocess
import sys

import numpy as np
import pytest

from glfs.cli import load_labels, load_matrix, main
from glfs.exceptions import InvalidInputError, ParseError


def write(path, text):
    path.write_text(text)
    return str(path)


class TestLoadMatrix:
    def test_plain(self, tmp_path):
        dm = load_matrix(write(tmp_path / "x.csv", "1,2\n3,4\n"))
        np.testing.assert_array_equal(dm.values, [[1, 2], [3, 4]])

    def test_header(self, tmp_path):
        dm = load_matrix(write(tmp_path / "x.csv", "s1,s2\n1,2\n"))
        np.testing.assert_array_equal(dm.values, [[1, 2]])

    def test_ragged(self, tmp_path):
        with pytest.raises(ParseError, match="line 2") as info:
            load_matrix(write(tmp_path / "x.csv", "1,2\n3\n"))
        assert info.value.line == 2

    @pytest.mark.parametrize("token", ["nan", "inf", "-Infinity"])
    def test_non_finite(self, tmp_path, token):
        with pytest.raises(ParseError, match="line 3"):
            load_matrix(write(tmp_path / "x.csv", f"a,b\n1,2\n3,{token}\n"))

    def test_garbage_token(self, tmp_path):
        with pytest.raises(ParseError, match="line 2"):
            load_matrix(write(tmp_path / "x.csv", "1,2\n3,x\n"))

    @pytest.mark.parametrize("text", ["", "\n\n", "s1,s2\n"])
    def test_empty(self, tmp_path, text):
        with pytest.raises(ParseError, match="line 1"):
            load_matrix(write(tmp_path / "x.csv", text))

    def test_trailing_blank_lines(self, tmp_path):
        assert load_matrix(write(tmp_path / "x.csv", "1,2\n3,4\n\n\n")).d == 2

    def test_single_sample_rejected(self, tmp_path):
        with pytest.raises(InvalidInputError):
            load_matrix(write(tmp_path / "x.csv", "1\n2\n"))


class TestLoadLabels:
    def test_integers(self, tmp_path):
        assert load_labels(write(tmp_path / "y", "3\n1\n3\n")).tolist() == [3, 1, 3]

    def test_strings(self, tmp_path):
        assert load_labels(write(tmp_path / "y", "ALL\nAML\nALL\nX\n")).tolist() == [0, 1, 0, 2]

    def test_blank_line(self, tmp_path):
        with pytest.raises(ParseError, match="line 2"):
            load_labels(write(tmp_path / "y", "a\n\nb\n"))


@pytest.fixture(scope="module")
def sim(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    rc = main([
        "simulate", "--noise-features", "60", "--samples", "80", "--sigma", "0.2", "--seed", "3",
        "--matrix", str(d / "X.csv"), "--labels", str(d / "y.txt"), "--true-ids", str(d / "true.txt"),
    ])
    assert rc == 0
    return d


def run(argv, capsys):
    rc = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


class TestSubcommands:
    def test_simulate_files(self, sim):
        X = load_matrix(str(sim / "X.csv"))
        assert (X.d, X.n) == (64, 80)
        assert len((sim / "y.txt").read_text().split()) == 80
        assert len((sim / "true.txt").read_text().split()) == 4

    def test_select_score(self, sim, tmp_path, capsys):
        w = tmp_path / "w.tsv"
        rc, out, _ = run(["select", "--input", sim / "X.csv", "--seed", 7, "--output", w], capsys)
        assert rc == 0 and out.startswith("lambda=")
        rows = [line.split("\t") for line in w.read_text().splitlines()]
        assert len(rows) == 64 and all(len(r) == 2 for r in rows)
        weights = [float(r[1]) for r in rows]
        assert weights == sorted(weights, reverse=True)
        summary = json.loads((tmp_path / "w.tsv.json").read_text())
        assert summary["support_size"] == sum(v > 0 for v in weights)
        assert {"lambda_chosen", "objective", "schedule"} <= set(summary)
        rc, out, _ = run(["score", "--weights", w, "--true-ids", sim / "true.txt"], capsys)
        assert rc == 0 and 0.0 < float(out) <= 1.0

    def test_score_perfect(self, tmp_path, capsys):
        w = write(tmp_path / "w.tsv", "5\t0.9\n2\t0.8\n7\t0.7\n0\t0.6\n1\t0\n")
        ids = write(tmp_path / "t.txt", "0\n2\n5\n7\n")
        rc, out, _ = run(["score", "--weights", w, "--true-ids", ids], capsys)
        assert out == "1.0\n"

    def test_score_partial_ranking(self, tmp_path, capsys):
        w = write(tmp_path / "w.tsv", "0\t1\n1\t1\n2\t1\n3\t1\n")
        ids = write(tmp_path / "t.txt", "4\n5\n6\n7\n")
        rc, out, _ = run(["score", "--weights", w, "--true-ids", ids, "--features", 10], capsys)
        assert float(out) == pytest.approx(0.25 * (1 / 2 + 1 / 3 + 1 / 4 + 1 / 5), abs=1e-12)

    @pytest.mark.parametrize("method", ["lapscore", "lapaofs", "lapdofs"])
    def test_baseline(self, sim, tmp_path, capsys, method):
        out_path = tmp_path / "b.tsv"
        rc, _, _ = run(["baseline", "--method", method, "--count", 5, "--input", sim / "X.csv", "--output", out_path], capsys)
        assert rc == 0
        n = len(out_path.read_text().splitlines())
        assert n == (64 if method == "lapscore" else 5)

    @pytest.mark.parametrize("method", ["kmeans", "spectral"])
    def test_eval_cluster(self, sim, tmp_path, capsys, method):
        rc, out, _ = run([
            "eval-cluster", "--input", sim / "X.csv", "--labels", sim / "y.txt", "--top", 4,
            "--method", method, "--summary", tmp_path / "s.json", "--assignments", tmp_path / "a.txt",
        ], capsys)
        assert rc == 0 and out.startswith("nmi=")
        assert json.loads((tmp_path / "s.json").read_text())["selection"] == "glfs"
        assert len((tmp_path / "a.txt").read_text().split()) == 80

    def test_eval_knn_with_weights(self, sim, tmp_path, capsys):
        ranking = "".join(f"{i}\t1\n" for i in (sim / "true.txt").read_text().split())
        w = write(tmp_path / "w.tsv", ranking)
        rc, out, _ = run(["eval-knn", "--input", sim / "X.csv", "--labels", sim / "y.txt", "--weights", w, "--top", 4], capsys)
        assert rc == 0 and float(out.split("=")[1]) == 1.0

    def test_classify(self, tmp_path, capsys):
        main(["simulate", "--noise-features", "30", "--samples", "60", "--clusters", "2", "--seed", "1",
              "--matrix", str(tmp_path / "X.csv"), "--labels", str(tmp_path / "y.txt"),
              "--true-ids", str(tmp_path / "t.txt")])
        capsys.readouterr()
        rc, out, _ = run([
            "classify", "--train", tmp_path / "X.csv", "--train-labels", tmp_path / "y.txt",
            "--folds", 5, "--lambdas", "1e-4,1e-3,1e-2", "--summary", tmp_path / "c.json",
        ], capsys)
        assert rc == 0 and out.startswith("cv_errors=")
        summary = json.loads((tmp_path / "c.json").read_text())
        assert summary["n_train"] + summary["n_test"] == 60
        assert summary["best_lambda"] in (1e-4, 1e-3, 1e-2)

    def test_classify_string_labels(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        y = np.repeat([0, 1], 10)
        X = np.vstack([np.where(y == 1, 2.0, 0.0) + 0.1 * rng.normal(size=20), 0.1 * rng.normal(size=(3, 20))])
        write(tmp_path / "X.csv", "".join(",".join(map(repr, r)) + "\n" for r in X.tolist()))
        write(tmp_path / "y.txt", "".join(("AML" if v else "ALL") + "\n" for v in y))
        rc, out, _ = run([
            "classify", "--train", tmp_path / "X.csv", "--train-labels", tmp_path / "y.txt",
            "--test", tmp_path / "X.csv", "--test-labels", tmp_path / "y.txt",
            "--folds", 4, "--lambdas", "1e-4", "--summary", tmp_path / "c.json",
        ], capsys)
        assert rc == 0
        assert json.loads((tmp_path / "c.json").read_text())["n_test"] == 20

    def test_sweep(self, sim, tmp_path, capsys):
        out_path = tmp_path / "sweep.csv"
        rc, _, _ = run(["sweep-lambda", "--input", sim / "X.csv", "--output", out_path, "--lambdas", "1e-4,1e-1"], capsys)
        lines = out_path.read_text().splitlines()
        assert lines[0] == "lambda,support_size,objective"
        assert lines[2].split(",")[1] == "0"

    def test_trace(self, sim, tmp_path, capsys):
        tr = tmp_path / "trace.tsv"
        run(["select", "--input", sim / "X.csv", "--output", tmp_path / "w.tsv", "--trace", tr], capsys)
        lines = tr.read_text().splitlines()
        assert lines[0].startswith("# lambda[0] = ")
        assert len(lines[1].split("\t")) == 4


class TestErrors:
    def test_missing_file(self, tmp_path, capsys):
        rc, _, err = run(["select", "--input", tmp_path / "nope.csv", "--output", tmp_path / "w.tsv"], capsys)
        assert rc != 0
        assert err.count("\n") == 1 and err.startswith("glfs: error[io-error]: ")

    def test_parse_error(self, tmp_path, capsys):
        bad = write(tmp_path / "x.csv", "1,2\n3\n")
        rc, _, err = run(["select", "--input", bad, "--output", tmp_path / "w.tsv"], capsys)
        assert rc != 0 and "error[parse-error]" in err and "line 2" in err

    def test_usage_error_is_one_line(self, capsys):
        rc, _, err = run(["select", "--bogus"], capsys)
        assert rc == 2 and err.count("\n") == 1 and "error[usage]" in err

    def test_partial_outputs_removed(self, sim, tmp_path, capsys):
        w = tmp_path / "w.tsv"
        rc, _, err = run(["select", "--input", sim / "X.csv", "--output", w, "--summary", tmp_path / "missing" / "s.json"], capsys)
        assert rc != 0
        assert sorted(p.name for p in tmp_path.iterdir()) == []

    def test_invalid_seed(self, sim, tmp_path, capsys):
        rc, _, err = run(["select", "--input", sim / "X.csv", "--output", tmp_path / "w.tsv", "--seed", -1], capsys)
        assert rc != 0 and "invalid-parameter" in err

    def test_empty_selection(self, sim, tmp_path, capsys):
        rc, _, err = run(["select", "--input", sim / "X.csv", "--output", tmp_path / "w.tsv",
                          "--lambda0", 100, "--C", 2], capsys)
        assert "error[empty-selection]" in err and rc != 0
        assert not (tmp_path / "w.tsv").exists()


class TestEnvironment:
    def test_override(self, sim, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("GLFS_LAMBDA1", "3")
        monkeypatch.setenv("GLFS_LAMBDA0", "0.0002")
        run(["select", "--input", sim / "X.csv", "--output", tmp_path / "w.tsv"], capsys)
        summary = json.loads((tmp_path / "w.tsv.json").read_text())
        assert summary["lambda1"] == 3.0
        assert summary["schedule"][0]["lambda"] == 0.0002

    def test_flag_wins(self, sim, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("GLFS_LAMBDA1", "3")
        run(["select", "--input", sim / "X.csv", "--output", tmp_path / "w.tsv", "--lambda1", "5"], capsys)
        assert json.loads((tmp_path / "w.tsv.json").read_text())["lambda1"] == 5.0

    def test_env_satisfies_required(self, sim, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("GLFS_INPUT", str(sim / "X.csv"))
        rc, _, _ = run(["select", "--output", tmp_path / "w.tsv"], capsys)
        assert rc == 0

    def test_bad_value(self, capsys, monkeypatch):
        monkeypatch.setenv("GLFS_LAMBDA1", "abc")
        rc, _, err = run(["select", "--input", "x"], capsys)
        assert rc != 0 and "GLFS_LAMBDA1" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "glfs", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("glfs ")
