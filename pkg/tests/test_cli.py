import json

import pytest

from slprove import cli
from slprove.cli import EXIT_OK, EXIT_UNPROVED, EXIT_UNSOUND, EXIT_USAGE, RunConfig, main, run
from slprove.report import REFUTED, REPORT_KEYS, VALID, emit_report, parse_report, summary

from conftest import CORPUS, MOTIVATING

REV = MOTIVATING + "name rev: checkentail ls(x,y) |- ls(y,x);\n"
GOOD = MOTIVATING + "name E: checkentail tmp(x) |- exists y. ls(x,y);\n"


@pytest.fixture
def write(tmp_path):
    def w(text, name="p.sl"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return w


def test_valid_file_exit_0(write, capsys):
    assert main([write(GOOD)]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["name", "verdict", "ms", "rules", "hypo", "oracle"]
    assert out[1].split()[:2] == ["E", "Valid"] and len(out) == 2


def test_unproved_exit_1(write):
    assert main([write(REV)]) == EXIT_UNPROVED


def test_parse_error_exit_2(write, capsys):
    assert main([write("checkentail x |- emp;")]) == EXIT_USAGE
    assert "1:15" in capsys.readouterr().err


def test_usage_errors():
    assert main([]) == EXIT_USAGE
    assert main(["--timeout-ms", "0", "x.sl"]) == EXIT_USAGE
    assert main(["/nonexistent/file.sl"]) == EXIT_USAGE
    assert main(["--pure-solver", "bogus", "x.sl"]) == EXIT_USAGE


def test_empty_program(write, capsys):
    assert main([write("")]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_refuted_within_bounds(write, capsys):
    assert main([write(REV), "--check-oracle", "2"]) == EXIT_UNPROVED
    out = capsys.readouterr().out
    assert REFUTED in out
    line = next(l for l in out.splitlines() if l.startswith("rev:"))
    assert line.count("->") == 1  # a one-cell counter-model


def test_motivating_with_oracle(capsys):
    assert main([str(CORPUS / "motivating.sl"), "--check-oracle", "3", "--no-refute"]) == EXIT_UNPROVED
    out = capsys.readouterr().out
    e_row = next(l for l in out.splitlines() if l.startswith("E "))
    assert "Valid" in e_row and "no counter-model" in e_row


def test_soundness_violation_exit_3(write, monkeypatch, capsys):
    real = cli.prove

    def liar(*a, **kw):
        r = real(*a, **kw)
        r.verdict = type(r.verdict).VALID
        return r

    monkeypatch.setattr(cli, "prove", liar)
    assert main([write(REV), "--check-oracle", "2"]) == EXIT_UNSOUND
    assert "SOUNDNESS VIOLATION" in capsys.readouterr().out


def test_json_keys_and_round_trip(write):
    reports = run([(write(GOOD), GOOD)], RunConfig(check_oracle=2))
    text = emit_report(reports, "json", trace=True)
    data = json.loads(text)
    assert tuple(data[0]) == REPORT_KEYS
    assert parse_report(text) == reports


def test_json_cli(write, capsys):
    main([write(REV), "--format", "json"])
    (row,) = json.loads(capsys.readouterr().out)
    assert row["verdict"] == "Unknown" and row["tree"] is None


def test_trace_appends_tree(write, capsys):
    main([write(GOOD), "--trace"])
    out = capsys.readouterr().out
    assert "== E ==" in out and "[Induction" in out


def test_summary(write, capsys):
    a, b = write(GOOD, "a.sl"), write(REV, "b.sl")
    main([a, b, "--summary"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].endswith("proved 1 / total 1")
    assert lines[1].endswith("proved 0 / total 1")
    assert lines[2].startswith("all") and lines[2].endswith("proved 1 / total 2")


def test_single_path_flag(write):
    (r,) = run([(write(GOOD), GOOD)], RunConfig(single_path=True))
    assert r.mode == "single-path" and r.verdict == VALID


def test_reports_are_deterministic():
    path = CORPUS / "motivating.sl"
    files = [(str(path), path.read_text())]

    def strip(rs):
        return [{k: v for k, v in r.to_json().items() if k != "wall_ms"} for r in rs]

    first = strip(run(files, RunConfig(check_oracle=2)))
    assert first == strip(run(files, RunConfig(check_oracle=2)))
    assert first == strip(run(files, RunConfig(check_oracle=2), jobs=2))


def test_summary_function_single_file(write):
    reports = run([(write(GOOD), GOOD)], RunConfig())
    assert summary(reports).endswith("proved 1 / total 1")
