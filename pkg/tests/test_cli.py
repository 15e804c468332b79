import json

import pytest

from dfalab import CSV_HEADER, fixtures
from dfalab.cli import EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def fig3_file(tmp_path):
    path = tmp_path / "fig3.prog"
    path.write_text(fixtures.fixture_text("fig3.prog"), encoding="utf-8")
    return path


@pytest.fixture
def swap_file(tmp_path):
    path = tmp_path / "fig3_swap.prog"
    path.write_text(fixtures.fixture_text("fig3_swap.prog"), encoding="utf-8")
    return path


def rows(csv_text):
    lines = csv_text.strip().splitlines()
    assert lines[0] == CSV_HEADER
    return [dict(zip(CSV_HEADER.split(","), line.split(","))) for line in lines[1:]]


class TestReport:
    def test_two_kinds_two_rows(self, fig3_file, capsys):
        code = main(["report", str(fig3_file), "--analysis", "cp",
                     "--analysis", "faint"])
        assert code == EXIT_OK
        table = rows(capsys.readouterr().out)
        assert [r["analysis"] for r in table] == ["cp", "faint"]
        assert table[0]["I"] == "9"
        assert table[1]["I"] == "7"

    def test_malformed_file_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.prog"
        bad.write_text("program x\nvars a\nnode 1  q = 2\n", encoding="utf-8")
        code = main(["report", str(bad)])
        captured = capsys.readouterr()
        assert code == EXIT_USAGE
        assert "undeclared variable" in captured.err

    def test_swap_reduces_iterations_only(self, fig3_file, swap_file, capsys):
        code = main(["report", str(fig3_file), str(swap_file), "--analysis", "cp"])
        assert code == EXIT_OK
        base, swap = rows(capsys.readouterr().out)
        assert int(swap["I"]) < int(base["I"])
        for column in ("d", "H", "B1"):
            assert base[column] == swap[column]

    def test_json_output(self, fig3_file, capsys):
        code = main(["report", str(fig3_file), "--analysis", "cp",
                     "--format", "json"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["program"] == "fig3"

    def test_out_file(self, fig3_file, tmp_path):
        out = tmp_path / "report.csv"
        code = main(["report", str(fig3_file), "--analysis", "cp",
                     "--out", str(out)])
        assert code == EXIT_OK
        assert out.read_text().startswith(CSV_HEADER)

    def test_default_kinds(self, fig3_file, capsys):
        assert main(["report", str(fig3_file)]) == EXIT_OK
        assert [r["analysis"] for r in rows(capsys.readouterr().out)] == ["cp", "faint"]


class TestGenerate:
    def test_writes_deterministic_files(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        for out in (out1, out2):
            code = main(["generate", "--seed", "1", "--count", "4",
                         "--nodes", "20", "--out", str(out)])
            assert code == EXIT_OK
        names = sorted(p.name for p in out1.glob("*.prog"))
        assert len(names) == 4
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_generated_files_reparse(self, tmp_path, capsys):
        out = tmp_path / "corpus"
        main(["generate", "--seed", "2", "--count", "3", "--nodes", "15",
              "--out", str(out)])
        code = main(["report", *[str(p) for p in sorted(out.glob("*.prog"))],
                     "--analysis", "cp"])
        assert code == EXIT_OK
        assert len(rows(capsys.readouterr().out)) == 3


class TestCorpus:
    @pytest.fixture
    def corpus_dir(self, tmp_path):
        out = tmp_path / "corpus"
        main(["generate", "--seed", "11", "--count", "12", "--nodes", "25",
              "--out", str(out)])
        return out

    def test_corpus_run(self, corpus_dir, tmp_path):
        out = tmp_path / "results"
        code = main(["corpus", str(corpus_dir), "--analysis", "cp",
                     "--analysis", "faint", "--out", str(out)])
        assert code == EXIT_OK
        table = rows((out / "report.csv").read_text())
        assert len(table) == 24
        summary = json.loads((out / "summary.json").read_text())
        assert summary["records"] == 24
        assert summary["violations"] == 0

    def test_histogram_conservation(self, corpus_dir, tmp_path):
        out = tmp_path / "results"
        main(["corpus", str(corpus_dir), "--out", str(out)])
        records = len(rows((out / "report.csv").read_text()))
        for name in ("dev1_histogram.txt", "dev2_histogram.txt"):
            counts = [int(line.split()[1])
                      for line in (out / name).read_text().splitlines()]
            assert sum(counts) == records

    def test_empty_directory_is_usage_error(self, tmp_path, capsys):
        empty = tmp_path / "void"
        empty.mkdir()
        assert main(["corpus", str(empty)]) == EXIT_USAGE
        assert "no .prog files" in capsys.readouterr().err

    def test_stdout_mode(self, corpus_dir, capsys):
        code = main(["corpus", str(corpus_dir), "--analysis", "cp"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert CSV_HEADER in out
        assert "dev1 histogram" in out

    def test_reports_are_deterministic(self, corpus_dir, tmp_path):
        outs = []
        for sub in ("r1", "r2"):
            out = tmp_path / sub
            assert main(["corpus", str(corpus_dir), "--out", str(out)]) == EXIT_OK
            outs.append((out / "report.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_acyclic_corpus_records_single_pass(self, tmp_path):
        source = tmp_path / "flat"
        main(["generate", "--seed", "13", "--count", "8", "--nodes", "18",
              "--loops", "0", "--out", str(source)])
        out = tmp_path / "flat_results"
        assert main(["corpus", str(source), "--out", str(out)]) == EXIT_OK
        for record in rows((out / "report.csv").read_text()):
            assert record["d"] == "0"  # the acyclic marker
            assert record["I"] == "1"
            assert record["B2"] == "1"


def test_usage_error_exit_code(capsys):
    assert main(["report"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
