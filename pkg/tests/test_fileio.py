import csv
import json

import numpy as np
import pytest

from pilotwave import fileio, gaussian
from pilotwave.gaussian import GaussianParams
from pilotwave.grid import Grid
from pilotwave.ledger import COLUMNS
from pilotwave.scenarios import run_free_gaussian


@pytest.fixture(scope="module")
def report():
    return run_free_gaussian(GaussianParams(u=(0.5, 0, 0)), t_end=0.2, dt=0.02, n=64)


def test_ledger_csv_has_header_and_one_row_per_record(report, tmp_path):
    path = fileio.write_ledger_csv(report.ledger, tmp_path / "l.csv")
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == COLUMNS
    assert len(rows) - 1 == len(report.ledger)
    assert rows[1][COLUMNS.index("residual_eq16")] == "nan"


def test_ledger_roundtrips_exactly(report, tmp_path):
    for path in fileio.write_ledger(report.ledger, tmp_path / "l"):
        back = (fileio.read_ledger_csv if path.suffix == ".csv" else fileio.read_ledger_json)(path)
        for c in COLUMNS:
            np.testing.assert_array_equal(back.column(c), report.ledger.column(c))


def test_json_is_schema_versioned_and_nan_free(report, tmp_path):
    path = fileio.write_ledger_json(report.ledger, tmp_path / "l.json")
    text = path.read_text()
    assert "NaN" not in text
    doc = json.loads(text)
    assert doc["schema_version"] == fileio.SCHEMA_VERSION and doc["kind"] == "ledger"
    assert doc["rows"][0][COLUMNS.index("residual_eq16")] is None


def test_report_json_roundtrip(report, tmp_path):
    path = fileio.write_report_json(report, tmp_path / "r.json")
    doc = fileio.read_json(path)
    assert doc["summary"]["H_analytic_track"] == report.summary["H_analytic_track"]
    assert doc["passed"] == report.passed
    assert fileio.dumps(doc) == path.read_text()


def test_summary_text_lists_comparisons(report):
    text = fileio.summary_text(report)
    assert "[PASS] H_closed_form" in text


@pytest.mark.parametrize("suffix", [".npz", ".json"])
def test_field_roundtrip(tmp_path, suffix):
    g = Grid((-6.0, 0.0), (6.0, 2.0), (32, 16), "periodic")
    f = gaussian.sample(g, 0.3, GaussianParams(u=(0.5, 0.1)))
    back = fileio.load_field(fileio.save_field(f, tmp_path / f"f{suffix}"))
    assert back.grid == g
    np.testing.assert_array_equal(back.values, f.values)


def test_field_format_errors(tmp_path):
    g = Grid.cube(0.0, 1.0, 8, 1)
    f = gaussian.sample(g, 0.0, GaussianParams(u=(0.0,)))
    with pytest.raises(ValueError):
        fileio.save_field(f, tmp_path / "f.txt")
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"grid": g.to_dict(), "real": [0.0] * 4, "imag": [0.0] * 4}))
    with pytest.raises(ValueError):
        fileio.load_field(path)


def test_config_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nt-end = 1.5\nn = 64  # inline\nu = 1,0,0\nmode = full\n"
                    "quiet = yes\n")
    cfg = fileio.read_config(path)
    assert cfg == {"t_end": 1.5, "n": 64, "u": [1, 0, 0], "mode": "full", "quiet": True}
    again = fileio.read_config(fileio.write_config(cfg, tmp_path / "b.cfg"))
    assert again == cfg
    path.write_text("no equals sign\n")
    with pytest.raises(ValueError):
        fileio.read_config(path)


def test_manifest_records_digests(report, tmp_path):
    files = fileio.write_ledger(report.ledger, tmp_path / "l")
    man = fileio.read_json(fileio.write_manifest(tmp_path, "gaussian", {"n": 64}, 3, files))
    assert man["seed"] == 3 and man["config"] == {"n": 64}
    assert set(man["versions"]) == {"pilotwave", "numpy", "scipy", "python"}
    assert man["outputs"]["l.csv"] == fileio.digest(tmp_path / "l.csv")
    assert "units" in man


def test_dumps_is_deterministic():
    a = fileio.dumps({"b": np.float64(1.5), "a": [np.int64(2), float("inf")], "c": np.bool_(True)})
    assert a == '{\n  "a": [\n    2,\n    null\n  ],\n  "b": 1.5,\n  "c": true\n}\n'
