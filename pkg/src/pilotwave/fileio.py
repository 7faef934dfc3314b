"""
Reading and writing fields, ledgers, reports, manifests and config files.

Output is deterministic: floats are written with ``repr`` precision, JSON
keys are sorted, nothing time- or host-dependent is recorded, so a rerun
with the same configuration and seed gives byte-identical files.

Formats (``SCHEMA_VERSION`` is written into every JSON document)

* ledger CSV   header ``t,T,Q,U,H,residual_eq16,residual_eq17,residual_eq18``,
  one row per ledger record, ``nan`` where a value is undefined.
* ledger JSON  ``{"kind": "ledger", "columns": [...], "rows": [[...]], "metadata": {...}}``
  with ``null`` for undefined values.
* report JSON  ``{"kind": "report", "name", "config", "summary", "comparisons"}``.
* field        ``.npz`` (arrays ``values`` and ``grid`` as JSON text) or
  ``.json`` (``real``/``imag`` nested lists plus ``grid``).
* config       ``key = value`` lines; ``#`` starts a comment; list values are
  comma separated.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from pathlib import Path

import numpy as np

from .grid import ComplexField, Grid
from .ledger import COLUMNS, LedgerSeries, series_from_columns

SCHEMA_VERSION = "1.0"
UNITS = "natural units: lengths in units of L or sigma0, hbar and m as given (default 1)"


def _clean(obj):
    """Plain-JSON version of ``obj``; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else "nan"


# ---------------------------------------------------------------------------
# ledgers
# ---------------------------------------------------------------------------

def write_ledger_csv(series: LedgerSeries, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for rec in series.records:
            w.writerow([_fmt(v) for v in rec.row()])
    return path


def read_ledger_csv(path) -> LedgerSeries:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected ledger columns {header}")
    data = np.array([[float(v) for v in r] for r in body], dtype=float).reshape(-1, len(COLUMNS))
    return series_from_columns({c: data[:, i] for i, c in enumerate(COLUMNS)})


def ledger_to_dict(series: LedgerSeries) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "ledger", "columns": list(COLUMNS),
            "rows": [rec.row() for rec in series.records], "metadata": series.metadata}


def write_ledger_json(series: LedgerSeries, path) -> Path:
    return write_json(ledger_to_dict(series), path)


def read_ledger_json(path) -> LedgerSeries:
    doc = read_json(path)
    if doc.get("kind") != "ledger":
        raise ValueError("not a ledger document")
    data = np.array([[np.nan if v is None else v for v in r] for r in doc["rows"]],
                    dtype=float).reshape(-1, len(doc["columns"]))
    return series_from_columns({c: data[:, i] for i, c in enumerate(doc["columns"])},
                               doc.get("metadata", {}))


def write_ledger(series: LedgerSeries, stem, formats=("csv", "json")) -> list[Path]:
    """Write ``stem.csv`` and/or ``stem.json``."""
    stem = Path(stem)
    out = []
    if "csv" in formats:
        out.append(write_ledger_csv(series, stem.with_suffix(".csv")))
    if "json" in formats:
        out.append(write_ledger_json(series, stem.with_suffix(".json")))
    return out


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def report_to_dict(report) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "report", "name": report.name,
            "config": report.config, "summary": report.summary,
            "comparisons": report.comparisons, "passed": report.passed}


def write_report_json(report, path) -> Path:
    return write_json(report_to_dict(report), path)


def summary_text(report) -> str:
    """Human-readable summary: one ``key: value`` line per entry."""
    lines = [f"{report.name}", ""]
    for k in sorted(report.summary):
        v = report.summary[k]
        lines.append(f"  {k}: {_fmt(v) if isinstance(v, float) else v}")
    if report.comparisons:
        lines += ["", "comparisons:"]
        for k in sorted(report.comparisons):
            c = report.comparisons[k]
            mark = "PASS" if c["passed"] else "FAIL"
            lines.append(f"  [{mark}] {k}: value {_fmt(c['value'])}, target {_fmt(c['target'])}, "
                         f"tolerance {_fmt(c['tolerance'])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

def save_field(f: ComplexField, path) -> Path:
    path = Path(path)
    grid_text = json.dumps(f.grid.to_dict(), sort_keys=True)
    if path.suffix == ".npz":
        with path.open("wb") as fh:
            np.savez(fh, values=np.asarray(f.values), grid=np.array(grid_text))
    elif path.suffix == ".json":
        write_json({"schema_version": SCHEMA_VERSION, "kind": "field", "grid": f.grid.to_dict(),
                    "real": np.real(f.values), "imag": np.imag(f.values)}, path)
    else:
        raise ValueError("field files must end in .npz or .json")
    return path


def load_field(path) -> ComplexField:
    path = Path(path)
    if path.suffix == ".npz":
        with np.load(path) as data:
            grid = Grid.from_dict(json.loads(str(data["grid"])))
            values = np.array(data["values"])
    elif path.suffix == ".json":
        doc = read_json(path)
        grid = Grid.from_dict(doc["grid"])
        values = np.asarray(doc["real"], dtype=float) + 1j * np.asarray(doc["imag"], dtype=float)
    else:
        raise ValueError("field files must end in .npz or .json")
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    return ComplexField(grid, values.astype(complex))


# ---------------------------------------------------------------------------
# config files and manifests
# ---------------------------------------------------------------------------

def _parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", ""):
        return None
    if "," in text:
        return [_parse_value(t) for t in text.split(",")]
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def read_config(path) -> dict:
    """``key = value`` file to a dict; keys normalised to ``snake_case``."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = _parse_value(value)
    return out


def write_config(config: dict, path) -> Path:
    lines = []
    for k in sorted(config):
        v = config[k]
        if isinstance(v, (list, tuple)):
            v = ",".join(str(x) for x in v)
        lines.append(f"{k} = {v}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> dict:
    import scipy

    from . import __version__
    return {"pilotwave": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def write_manifest(directory, command: str, config: dict, seed, files) -> Path:
    """``manifest.json``: config echo, seed, versions, units and output digests."""
    directory = Path(directory)
    entries = {Path(f).name: digest(f) for f in sorted(files, key=lambda p: Path(p).name)}
    return write_json({"schema_version": SCHEMA_VERSION, "kind": "manifest", "command": command,
                       "config": config, "seed": seed, "versions": versions(), "units": UNITS,
                       "outputs": entries}, directory / "manifest.json")
