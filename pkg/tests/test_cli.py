import csv
import io
import json
import os
import time
from pathlib import Path

import pytest

from homhardy.cli import main
from homhardy.config import ConfigError, load_config, parse_config
from homhardy.runner import CSV_COLUMNS, csv_text, emit, json_text, run_suite

ROOT = Path(__file__).resolve().parent.parent
EXAMPLE = ROOT / "configs" / "example.json"

BASE = {"group": {"weights": [1, 1, 2]}, "norm": {"kind": "anisotropic"},
        "function": {"kind": "bump", "support": [0.5, 1.5]}}


def config(jobs, **extra):
    return dict(BASE, jobs=jobs, **extra)


def test_rellich_low_q_rejected():
    with pytest.raises(ConfigError) as info:
        parse_config(config([{"identity": "Rellich"}]))
    assert any("Q >= 5" in e for e in info.value.errors)


def test_all_errors_listed():
    raw = config([{"identity": "Foo"}, {"identity": "HardyLp", "params": {"p": 9}},
                  {"identity": "HardyL2", "colour": "red"}])
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    errs = info.value.errors
    assert len(errs) >= 3
    assert any("Foo" in e for e in errs) and any("p=9" in e for e in errs)
    assert any("colour" in e for e in errs)


def test_unknown_top_level_key():
    with pytest.raises(ConfigError):
        parse_config(config([], extras=1))


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)


def test_empty_run_passes(tmp_path):
    res = run_suite(parse_config(config([])))
    assert res.passed and res.jobs == []
    paths = emit(res, tmp_path, "both", "empty")
    text = (tmp_path / "empty.csv").read_text()
    assert text == ",".join(CSV_COLUMNS) + "\n"
    assert json.loads((tmp_path / "empty_reports.json").read_text()) == []
    assert len(paths) == 3


def test_single_job_fast():
    t0 = time.perf_counter()
    res = run_suite(parse_config(config([{"identity": "HardyL2"}])))
    assert time.perf_counter() - t0 < 5.0
    assert res.passed and res.jobs[0]["status"] == "ok"


def test_emit_round_trip(tmp_path):
    res = run_suite(parse_config(config([{"identity": "HardyL2"},
                                         {"identity": "HardyLp", "params": {"p": 3}}])))
    emit(res, tmp_path, "both", "rt")
    data = json.loads((tmp_path / "rt.json").read_text())
    assert data["pass"] is True and len(data["jobs"]) == 2
    assert json.loads(json_text(res.to_dict())) == data
    rows = list(csv.DictReader(io.StringIO((tmp_path / "rt.csv").read_text())))
    assert [r["id"] for r in rows] == ["HardyL2", "HardyLp"]
    assert float(rows[0]["lhs"]) == res.reports[0]["lhs"]


def test_degenerate_job_counts_as_pass():
    res = run_suite(parse_config(config([{"identity": "WeightedL2", "params": {"alpha": 1.0}}])))
    assert res.jobs[0]["status"] == "degenerate_constant" and res.passed


def test_csv_deterministic_across_workers():
    cfg = load_config(EXAMPLE)
    a = csv_text(run_suite(cfg, "verify", workers=1))
    b = csv_text(run_suite(cfg, "verify", workers=2))
    assert a == b


def test_cli_example(tmp_path, capsys):
    code = main(["all", str(EXAMPLE), "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0 and "overall: PASS" in out
    first = (tmp_path / "example.csv").read_bytes()
    assert main(["all", str(EXAMPLE), "--out", str(tmp_path), "--format", "csv"]) == 0
    assert (tmp_path / "example.csv").read_bytes() == first


def test_cli_failure_exit(tmp_path):
    run = tmp_path / "run.json"
    run.write_text(json.dumps({
        "group": {"weights": [1, 1, 2]},
        "sharpness": {"sweeps": [{"inequality": "Hardy", "params": {"p": 2},
                                  "deltas": [0.1], "min_ratio": 0.999}]}}))
    assert main(["sharpness", str(run), "--out", str(tmp_path)]) == 1


def test_cli_config_errors(tmp_path, capsys):
    assert main(["verify", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(config([{"identity": "Rellich"}])))
    assert main(["verify", str(bad)]) == 2
    assert "Q >= 5" in capsys.readouterr().err
    assert main(["verify", str(EXAMPLE), "--workers", "0"]) == 2


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0,
                    reason="root ignores directory permissions")
def test_cli_unwritable_directory_prints(tmp_path, capsys):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    run = tmp_path / "run.json"
    run.write_text(json.dumps(config([{"identity": "HardyL2"}])))
    assert main(["verify", str(run), "--out", str(ro / "sub")]) == 2
    assert '"jobs"' in capsys.readouterr().out


def test_cli_output_path_is_file(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    run = tmp_path / "run.json"
    run.write_text(json.dumps(config([{"identity": "HardyL2"}])))
    assert main(["verify", str(run), "--out", str(blocker), "--format", "csv"]) == 2
    captured = capsys.readouterr()
    assert captured.out.startswith(",".join(CSV_COLUMNS))
    assert "could not write" in captured.err
