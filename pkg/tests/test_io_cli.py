import csv
import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import mixed_sample
from welfare_diff import PairedDataset
from welfare_diff.cli import main
from welfare_diff.io import (
    ParseError,
    ResultDocument,
    atomic_write,
    emit,
    format_csv,
    ingest,
    ingest_samples,
    preprocess_equivalence,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def paired_file(tmp_path, rng):
    x1 = rng.lognormal(size=60)
    x2 = np.concatenate([x1[:40] * np.exp(rng.normal(scale=0.3, size=40)), rng.lognormal(size=15)])
    path = tmp_path / "data.csv"
    emit(PairedDataset.from_samples(x1, x2, 40), path)
    return path


class TestIngest:
    def test_counts(self, tmp_path):
        path = write(tmp_path / "a.csv", "x1,x2\n1,2\n3,4\n5,6\n7,\n8,\n")
        data = ingest(path)
        assert (data.m, data.n1, data.n2) == (3, 5, 3)
        assert_allclose(data.x1, [1, 3, 5, 7, 8])
        assert_allclose(data.x2, [2, 4, 6])

    def test_interleaved_rows_keep_file_order(self, tmp_path):
        x1, x2, m = ingest_samples(write(tmp_path / "a.csv", "x1,x2\n,9\n1,2\n4,\n3,5\n,-1.5\n"))
        assert m == 2
        assert_allclose(x1, [1, 3, 4])
        assert_allclose(x2, [2, 5, 9, -1.5])

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError, match="no observations"):
            ingest(write(tmp_path / "a.csv", ""))

    def test_header_only(self, tmp_path):
        with pytest.raises(ParseError, match="no observations"):
            ingest(write(tmp_path / "a.csv", "x1,x2\n"))

    def test_both_empty_reports_line(self, tmp_path):
        with pytest.raises(ParseError, match=r":3: both x1 and x2 are empty"):
            ingest(write(tmp_path / "a.csv", "x1,x2\n1,2\n,\n"))

    def test_non_numeric_reports_line(self, tmp_path):
        with pytest.raises(ParseError, match=r":4: non-numeric value 'abc' in column x2"):
            ingest(write(tmp_path / "a.csv", "x1,x2\n1,2\n3,4\n5,abc\n"))

    def test_bad_header(self, tmp_path):
        with pytest.raises(ParseError, match="header"):
            ingest(write(tmp_path / "a.csv", "a,b\n1,2\n"))

    def test_round_trip_is_exact(self, tmp_path, rng):
        data = PairedDataset.from_samples(mixed_sample(rng, 30), mixed_sample(rng, 25), 12)
        path = tmp_path / "rt.csv"
        emit(data, path)
        assert ingest(path) == data

    def test_table_shape(self, tmp_path, rng):
        m, n1, n2 = 4459, 8151, 8156
        data = PairedDataset(
            rng.lognormal(size=(m, 2)), rng.lognormal(size=n1 - m), rng.lognormal(size=n2 - m)
        )
        path = tmp_path / "big.csv"
        emit(data, path)
        back = ingest(path)
        assert (back.m, back.n1, back.n2) == (4459, 8151, 8156)


class TestEquivalence:
    def test_examples(self, tmp_path):
        text = "income,adults,ch05,ch614,ch1517,workers\n100,1,0,0,0,0\n0,3,1,2,0,1\n194.11,2,0,0,0,2\n"
        out = preprocess_equivalence(write(tmp_path / "h.csv", text))
        assert out[0] == 100.0
        assert out[1] == 0.0
        assert out[2] == pytest.approx(100.0, abs=0.01)

    def test_column_order_and_extra_columns(self, tmp_path):
        text = "id,workers,income,ch1517,ch614,ch05,adults\n7,0,50,0,0,0,1\n"
        assert_allclose(preprocess_equivalence(write(tmp_path / "h.csv", text)), [50.0])

    def test_empty_household_reports_line(self, tmp_path):
        text = "income,adults,ch05,ch614,ch1517,workers\n10,1,0,0,0,0\n10,0,0,0,0,1\n"
        with pytest.raises(ParseError, match=":3: empty household"):
            preprocess_equivalence(write(tmp_path / "h.csv", text))

    def test_missing_columns(self, tmp_path):
        with pytest.raises(ParseError, match="missing columns workers"):
            preprocess_equivalence(write(tmp_path / "h.csv", "income,adults,ch05,ch614,ch1517\n1,1,0,0,0\n"))


class TestResultDocument:
    def test_json_round_trip(self):
        doc = ResultDocument.new("ci", seed=5)
        doc.records.append({"lower": -0.1, "upper": float("inf"), "p": float("nan"), "n": 3, "m": "os-asym"})
        back = ResultDocument.from_json(doc.to_json())
        assert back.metadata == json.loads(doc.to_json())["metadata"]
        r = back.records[0]
        assert r["lower"] == -0.1 and r["upper"] == float("inf") and np.isnan(r["p"])
        assert (r["n"], r["m"]) == (3, "os-asym")
        assert back.schema_version == 1

    def test_schema_version_checked(self):
        with pytest.raises(ValueError, match="schema_version"):
            ResultDocument.from_json('{"schema_version": 99, "metadata": {}, "records": []}')

    def test_csv_float_precision(self):
        text = format_csv([{"a": 0.1 + 0.2, "b": np.float64(1 / 3)}])
        row = rows(text)[0]
        assert float(row["a"]) == 0.1 + 0.2
        assert float(row["b"]) == 1 / 3

    def test_atomic_write_leaves_nothing_on_failure(self, tmp_path):
        target = tmp_path / "out.txt"
        with pytest.raises(TypeError):
            atomic_write(target, None)
        assert list(tmp_path.iterdir()) == []


class TestCli:
    def test_estimate_mean(self, tmp_path, capsys):
        path = write(tmp_path / "a.csv", "x1,x2\n1,\n2,\n3,\n")
        assert main(["estimate", "--input", str(path), "--index", "mean"]) == 0
        out = rows(capsys.readouterr().out)
        assert out[0]["sample"] == "x1"
        assert float(out[0]["estimate"]) == 2.0

    def test_estimate_with_difference(self, paired_file, capsys):
        assert main(["estimate", "--input", str(paired_file), "--index", "gini", "--format", "json"]) == 0
        doc = ResultDocument.from_json(capsys.readouterr().out)
        assert [r["sample"] for r in doc.records] == ["x1", "x2", "x1-x2"]
        assert doc.records[2]["n"] == 40

    def test_estimate_lorenz_vector(self, paired_file, capsys):
        assert main(["estimate", "--input", str(paired_file), "--index", "lorenz", "--p", "0.2", "0.6"]) == 0
        out = rows(capsys.readouterr().out)
        assert [r["index"] for r in out] == ["lorenz(p=0.2)", "lorenz(p=0.6)"] * 2

    def test_ci_rejects_bad_b_without_output(self, paired_file, tmp_path, capsys):
        target = tmp_path / "ci.csv"
        code = main(
            ["ci", "--input", str(paired_file), "--index", "gini", "--method", "os-boot",
             "--B", "400", "--seed", "1", "--output", str(target)]
        )
        assert code != 0
        assert not target.exists()
        assert "399" in capsys.readouterr().err

    def test_ci_prints_generated_seed(self, paired_file, capsys):
        assert main(["ci", "--input", str(paired_file), "--index", "gini", "--method", "os-boot", "--B", "199",
                     "--alpha", "0.1"]) == 0
        captured = capsys.readouterr()
        seed = int(captured.err.strip().split("seed: ")[1])
        assert main(["ci", "--input", str(paired_file), "--index", "gini", "--method", "os-boot", "--B", "199",
                     "--alpha", "0.1", "--seed", str(seed)]) == 0
        again = capsys.readouterr()
        a, b = rows(captured.out)[0], rows(again.out)[0]
        assert (a["lower"], a["upper"]) == (b["lower"], b["upper"])

    def test_ci_asym_writes_file(self, paired_file, tmp_path):
        target = tmp_path / "ci.json"
        assert main(["ci", "--input", str(paired_file), "--index", "mean", "--method", "os-asym",
                     "--format", "json", "--output", str(target)]) == 0
        rec = ResultDocument.from_json(target.read_text()).records[0]
        assert rec["method"] == "OS-Asym"
        assert rec["lower"] < rec["estimate"] < rec["upper"]

    def test_test_command(self, paired_file, capsys):
        assert main(["test", "--input", str(paired_file), "--index", "gini", "--null", "0", "--method", "boot",
                     "--seed", "3"]) == 0
        rec = rows(capsys.readouterr().out)[0]
        assert 0.0 < float(rec["p_value"]) <= 1.0

    def test_parse_error_exit_code(self, tmp_path, capsys):
        path = write(tmp_path / "a.csv", "x1,x2\n1,2\n,\n")
        assert main(["estimate", "--input", str(path), "--index", "mean"]) == 1
        assert ":3:" in capsys.readouterr().err

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            main(["ci", "--input", "x.csv", "--index", "gini", "--method", "nope"])
        assert exc.value.code != 0

    def test_unknown_simulate_method(self, capsys):
        assert main(["simulate", "--dgp", "ia", "--n", "50", "--reps", "1", "--index", "mean",
                     "--methods", "os-asym,bogus", "--seed", "1"]) == 1
        assert "bogus" in capsys.readouterr().err

    def test_simulate_smoke(self, capsys):
        assert main(["simulate", "--dgp", "ia", "--rho", "0", "--lambda", "0.5", "--n", "100", "--reps", "20",
                     "--index", "gini", "--methods", "os-asym,im-asym", "--seed", "7"]) == 0
        out = rows(capsys.readouterr().out)
        assert [r["method"] for r in out] == ["os-asym", "im-asym"]
        assert all(int(r["covered"]) + int(r["missed"]) + int(r["failed"]) == 20 for r in out)

    @pytest.mark.slow
    def test_simulate_reference_cell(self, capsys):
        assert main(["simulate", "--dgp", "ia", "--rho", "0", "--lambda", "0.5", "--n", "500", "--reps", "1000",
                     "--index", "gini", "--methods", "os-asym", "--seed", "7"]) == 0
        cov = float(rows(capsys.readouterr().out)[0]["coverage"])
        assert 0.92 <= cov <= 0.97

    def test_table_commands(self, capsys):
        assert main(["table", "--which", "std-increase", "--index", "mean", "--rhos", "0.99", "--lambdas", "0.9",
                     "--reps", "5", "--n", "500", "--seed", "1"]) == 0
        out = rows(capsys.readouterr().out)
        assert len(out) == 1 and float(out[0]["increase_pct"]) > 100
        assert main(["table", "--which", "rho-theta", "--index", "mean,gini", "--rhos", "0,0.5",
                     "--reps", "3", "--n", "300", "--seed", "1"]) == 0
        assert len(rows(capsys.readouterr().out)) == 4

    def test_equivalize(self, tmp_path, capsys):
        path = write(tmp_path / "h.csv", "income,adults,ch05,ch614,ch1517,workers\n100,1,0,0,0,0\n")
        assert main(["equivalize", "--input", str(path)]) == 0
        assert float(rows(capsys.readouterr().out)[0]["equivalized_income"]) == 100.0
