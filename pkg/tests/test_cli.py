import json

import pytest

from pilotwave import cli, fileio


def run(argv, capsys=None):
    return cli.main([str(a) for a in argv])


def test_help_documents_every_flag(capsys):
    for cmd in ("gaussian", "box-release", "propagate", "validate"):
        with pytest.raises(SystemExit) as exc:
            cli.main([cmd, "--help"])
        assert exc.value.code == 0
        text = capsys.readouterr().out
        assert "--out" in text and "--seed" in text and "--config" in text
    with pytest.raises(SystemExit):
        cli.main(["box-release", "--help"])
    text = capsys.readouterr().out
    assert "3 pi^2 hbar^2 / 2 m L^2" in text


def test_gaussian_writes_outputs_and_manifest(tmp_path):
    out = tmp_path / "g"
    code = run(["gaussian", "--sigma0", 1, "--u", "0,0,0", "--t-end", 2, "--n", 64,
                "--out", out, "--quiet"])
    assert code == 0
    names = {p.name for p in out.iterdir()}
    assert {"gaussian_ledger.csv", "gaussian_ledger.json", "gaussian_report.json",
            "gaussian_summary.txt", "manifest.json"} <= names
    man = fileio.read_json(out / "manifest.json")
    assert man["command"] == "gaussian" and man["config"]["sigma0"] == 1.0
    for name, digest in man["outputs"].items():
        assert fileio.digest(out / name) == digest
    rep = fileio.read_json(out / "gaussian_report.json")
    assert rep["summary"]["H_analytic_track"] == pytest.approx(0.375)
    assert len(fileio.read_ledger_csv(out / "gaussian_ledger.csv")) == 201


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert run(["gaussian", "--t-end", 0.1, "--n", 64, "--quiet", "--formats", "csv"]) == 0
    assert (tmp_path / "env" / "gaussian_ledger.csv").exists()
    assert not (tmp_path / "env" / "gaussian_ledger.json").exists()


def test_config_file_with_command_line_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("t-end = 0.2\nn = 48\nu = 1,0,0\n")
    out = tmp_path / "c"
    assert run(["gaussian", "--config", cfg, "--n", 64, "--out", out, "--quiet"]) == 0
    man = fileio.read_json(out / "manifest.json")
    assert man["config"]["n"] == 64 and man["config"]["t_end"] == 0.2
    assert man["config"]["u"] == [1.0, 0.0, 0.0]


@pytest.mark.parametrize("argv", [
    ["gaussian", "--sigma0", "-1"],
    ["gaussian", "--bogus", "1"],
    ["gaussian", "--u", "a,b"],
    ["gaussian", "--t-end", "1", "--dt", "0.3"],
    ["box-release", "--enlargement", "1.5"],
    ["box-release", "--dim", "5"],
    ["propagate", "--input", "missing.npz"],
])
def test_configuration_errors_exit_2(argv, tmp_path, capsys):
    code = None
    try:
        code = run(argv + ["--out", tmp_path])
    except SystemExit as exc:
        code = exc.code
    assert code == cli.EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_bad_config_file_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("unknown_key = 3\n")
    assert run(["gaussian", "--config", cfg, "--out", tmp_path]) == cli.EXIT_CONFIG
    cfg.write_text("mode = sideways\n")
    assert run(["box-release", "--config", cfg, "--out", tmp_path]) == cli.EXIT_CONFIG


def test_divergence_exits_3(tmp_path, capsys):
    code = run(["box-release", "--dim", 1, "--n", 32, "--enlargement", 4, "--t-end", 1,
                "--ensemble", 4, "--out", tmp_path])
    assert code == cli.EXIT_DIVERGED
    assert "outer 10%" in capsys.readouterr().err


def test_box_release_command(tmp_path):
    out = tmp_path / "b"
    code = run(["box-release", "--dim", 1, "--n", 32, "--t-end", 0.2, "--ensemble", 16,
                "--out", out, "--quiet"])
    assert code == 0
    assert (out / "box_release_ledger.csv").exists()
    assert (out / "box_release_particle_ledger.json").exists()
    rep = fileio.read_json(out / "box_release_report.json")
    assert rep["summary"]["H_relative_drift"] < 1e-10


@pytest.mark.parametrize("fmt", ["npz", "json"])
def test_propagate_and_resume_from_saved_field(tmp_path, fmt):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["propagate", "--state", "box", "--dim", 1, "--n", 32, "--t-end", 0.01,
                "--field-format", fmt, "--out", a, "--quiet"]) == 0
    rep = json.loads((a / "propagate_report.json").read_text())
    assert rep["energy_final"] == pytest.approx(rep["energy_initial"], rel=1e-12)
    assert run(["propagate", "--input", a / f"field_final.{fmt}", "--t-end", 0.01,
                "--out", b, "--quiet"]) == 0
    rep2 = json.loads((b / "propagate_report.json").read_text())
    assert rep2["norm"] == pytest.approx(1.0, abs=1e-12)


def test_runs_are_byte_identical(tmp_path):
    for d in ("x", "y"):
        run(["gaussian", "--t-end", 0.2, "--n", 64, "--ensemble", 50, "--seed", 5,
             "--out", tmp_path / d, "--quiet"])
    for f in (tmp_path / "x").iterdir():
        assert f.read_bytes() == (tmp_path / "y" / f.name).read_bytes()
