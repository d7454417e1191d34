"""Command line entry points: config validation, output formats, determinism."""

import json

import pytest

from latticedress import cli
from latticedress.errors import ConfigError


FAST = ["--sites", "4", "--dim", "2", "--grid-n", "4", "--grid-j", "4",
        "--grid-r", "4", "--chain-links", "2", "--nahm-span", "0.02",
        "--nahm-step", "1e-3"]


def run_main(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_config_defaults_are_valid():
    config = cli.RunConfig()
    assert config.sites == 6
    assert config.format == "json"
    # string-ish inputs are coerced once validated
    coerced = cli.RunConfig(sites=8.0, tol=1e-8)
    assert coerced.sites == 8 and isinstance(coerced.sites, int)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"sites": 1},
        {"dim": 0},
        {"seed": -3},
        {"tol": -1.0},
        {"format": "xml"},
        {"chain_links": 0},
        {"grid_j": 1},
        {"nahm_step": 0.0},
        {"nahm_span": 5e-4, "nahm_step": 1e-3},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        cli.RunConfig(**kwargs)


def test_main_reports_config_errors(capsys):
    code, out, err = run_main(["verify", "--sites", "1"], capsys)
    assert code == 2
    assert out == ""
    assert "configuration error" in err


def test_verify_emits_json_records(capsys):
    code, out, _ = run_main(["verify"] + FAST, capsys)
    assert code == 0
    records = json.loads(out)
    assert isinstance(records, list) and records
    for rec in records:
        assert set(rec) == {"name", "residual", "tol", "pass"}
        assert rec["pass"] is True


def test_zero_tolerance_fails_the_battery(capsys):
    code, out, _ = run_main(["verify", "--tol", "0"] + FAST[:-4], capsys)
    assert code == 1
    records = json.loads(out)
    assert any(not rec["pass"] for rec in records)


def test_csv_format(capsys):
    code, out, _ = run_main(["chain-demo", "--format", "csv"] + FAST, capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "name,residual,tol,pass"
    assert all(line.count(",") == 3 for line in lines[1:])


def test_stdout_is_deterministic(capsys):
    args = ["hirota-demo"] + FAST
    _, first, _ = run_main(args, capsys)
    _, second, _ = run_main(args, capsys)
    assert first == second


def test_out_file_matches_stdout(tmp_path, capsys):
    target = tmp_path / "report.json"
    args = ["nahm-demo"] + FAST
    code, out, _ = run_main(args + ["--out", str(target)], capsys)
    assert code == 0
    # writing to a file suppresses the stdout copy
    assert out == ""
    code2, out2, _ = run_main(args, capsys)
    assert code2 == 0
    assert target.read_text() == out2


def test_logging_goes_to_stderr(capsys, monkeypatch):
    monkeypatch.setenv("LD_LOG", "1")
    code, out, err = run_main(["chain-demo"] + FAST, capsys)
    assert code == 0
    assert err.strip()
    json.loads(out)
