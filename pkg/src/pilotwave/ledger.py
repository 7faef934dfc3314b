"""
Energy bookkeeping along a particle path.

Each record splits the conserved total energy ``H`` of a classically free
system into the particle's kinetic energy ``T = m v^2 / 2``, the quantum
potential ``Q`` at the particle and the remainder ``U = H - T - Q`` held by
the rest of the wave field.  The exchange relations checked on a series are

* ``dT/dt = -grad Q . v``                    (``residual_eq16``)
* ``dU/dt = -dQ/dt`` at a frozen point       (``residual_eq17``)
* ``-dQ/dt = (hbar^2/2mR) lap(dR/dt) + (Q/R) dR/dt``  (``residual_eq18``)

Time derivatives of ledger columns are central differences over adjacent
records (second order).  The partial ``dQ/dt`` is a central difference of
``Q`` at the particle's current position between the neighbouring field
snapshots; it is stored when the record is made, as is the right-hand side
of the last relation, for which ``lap(dR/dt)`` is computed as the time
difference of ``lap R`` (the two commute on a fixed grid).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import PhysicalParams

COLUMNS = ("t", "T", "Q", "U", "H", "residual_eq16", "residual_eq17", "residual_eq18")


@dataclass(frozen=True)
class LedgerRecord:
    t: float
    T: float
    Q: float
    H: float
    U: float
    power: float = np.nan           # -grad Q . v at the particle
    dQdt_partial: float = np.nan
    eq18_rhs: float = np.nan
    residual_eq16: float = np.nan
    residual_eq17: float = np.nan
    residual_eq18: float = np.nan

    def row(self) -> list[float]:
        return [getattr(self, c) for c in COLUMNS]


@dataclass(frozen=True)
class LedgerSeries:
    records: tuple[LedgerRecord, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        t = self.column("t")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("ledger times must increase strictly")

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def with_columns(self, **cols) -> "LedgerSeries":
        recs = [replace(r, **{k: float(v[i]) for k, v in cols.items()})
                for i, r in enumerate(self.records)]
        return LedgerSeries(tuple(recs), dict(self.metadata))


def _require_free(p: PhysicalParams):
    if not p.is_free:
        raise ValueError("the energy ledger is defined for classically free systems only (V = 0)")


def evaluate(snapshot, x: np.ndarray, p: PhysicalParams, prev=None, nxt=None) -> dict:
    """Ledger quantities for positions ``x`` of shape ``(N, dim)`` (vectorized)."""
    _require_free(p)
    x = np.atleast_2d(x)
    v = snapshot.velocity(x)
    T = 0.5 * p.mass * np.sum(v**2, axis=1)
    Q = snapshot.quantum_potential(x)
    H = float(snapshot.H)
    power = np.sum(snapshot.quantum_force(x) * v, axis=1)
    out = dict(T=T, Q=Q, H=np.full(T.shape, H), U=H - T - Q, power=power,
               dQdt_partial=np.full(T.shape, np.nan), eq18_rhs=np.full(T.shape, np.nan))
    if prev is not None and nxt is not None:
        span = nxt.t - prev.t
        out["dQdt_partial"] = (nxt.quantum_potential(x) - prev.quantum_potential(x)) / span
        R = snapshot.amplitude(x)
        dR = (nxt.amplitude(x) - prev.amplitude(x)) / span
        dlapR = (nxt.laplacian_amplitude(x) - prev.laplacian_amplitude(x)) / span
        out["eq18_rhs"] = p.hbar**2 / (2 * p.mass * R) * dlapR + Q / R * dR
    return out


def record(t: float, particle, fields, p: PhysicalParams | None = None) -> LedgerRecord:
    """Ledger entry for one particle.

    ``fields`` is a snapshot, or a ``(previous, current, next)`` triple of
    snapshots when the partial time derivatives are wanted.
    """
    p = p or PhysicalParams()
    if isinstance(fields, (tuple, list)):
        prev, cur, nxt = fields
    else:
        prev, cur, nxt = None, fields, None
    x = np.asarray(getattr(particle, "x", particle), dtype=float)[None, :]
    vals = evaluate(cur, x, p, prev, nxt)
    if not np.isfinite(vals["Q"][0]) or not np.isfinite(vals["T"][0]):
        raise ValueError(f"particle at {x[0]} sits in a node region")
    return LedgerRecord(t=float(t), **{k: float(v[0]) for k, v in vals.items()})


def central_rate(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Central difference ``dy/dt`` at interior records; NaN at both ends."""
    out = np.full(y.shape, np.nan)
    if len(t) >= 3:
        out[1:-1] = (y[2:] - y[:-2]) / (t[2:] - t[:-2])
    return out


@dataclass(frozen=True)
class CheckResult:
    """Residuals of one exchange relation along a series."""

    residual: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def max_abs(self) -> float:
        r = self.residual[np.isfinite(self.residual)]
        return float(np.max(np.abs(r))) if r.size else 0.0

    @property
    def rms(self) -> float:
        r = self.residual[np.isfinite(self.residual)]
        return float(np.sqrt(np.mean(r**2))) if r.size else 0.0

    @property
    def signal(self) -> float:
        """Largest magnitude of either side of the relation."""
        both = np.concatenate([self.lhs, self.rhs])
        both = both[np.isfinite(both)]
        return float(np.max(np.abs(both))) if both.size else 0.0

    @property
    def relative(self) -> float:
        s = self.signal
        return self.max_abs / s if s > 0 else self.max_abs


def check_eq16(series: LedgerSeries, stationary_tol: float = 1e-10) -> CheckResult:
    """``dT/dt`` from the ledger against ``-grad Q . v`` at the particle.

    Where ``dQ/dt`` at a frozen point is (numerically) zero, the drift of
    ``T + Q`` is also reported as ``extra['available_energy_drift']``.
    """
    t = series.column("t")
    dTdt = central_rate(t, series.column("T"))
    power = series.column("power")
    extra = {}
    dq = series.column("dQdt_partial")
    if np.all(np.isfinite(dq[1:-1])) and np.max(np.abs(dq[1:-1]), initial=0.0) <= stationary_tol:
        avail = series.column("T") + series.column("Q")
        extra["available_energy_drift"] = float(np.max(np.abs(avail - avail[0])))
    return CheckResult(dTdt - power, dTdt, power, extra)


def check_eq17(series: LedgerSeries) -> CheckResult:
    """``dU/dt`` from the ledger against ``-dQ/dt`` at a frozen point."""
    t = series.column("t")
    dUdt = central_rate(t, series.column("U"))
    minus_dq = -series.column("dQdt_partial")
    H = series.column("H")
    extra = {"H_relative_spread": float((H.max() - H.min()) / abs(H).max()) if len(H) else 0.0}
    return CheckResult(dUdt - minus_dq, dUdt, minus_dq, extra)


def check_eq18(series: LedgerSeries) -> CheckResult:
    """Shape-change expression for ``-dQ/dt`` against its direct time difference."""
    rhs = series.column("eq18_rhs")
    minus_dq = -series.column("dQdt_partial")
    return CheckResult(rhs - minus_dq, minus_dq, rhs)


def annotate(series: LedgerSeries) -> LedgerSeries:
    """Fill the residual columns of every record."""
    return series.with_columns(residual_eq16=check_eq16(series).residual,
                               residual_eq17=check_eq17(series).residual,
                               residual_eq18=check_eq18(series).residual)


def build_ledger(times, positions, snapshots, p: PhysicalParams | None = None,
                 metadata: dict | None = None) -> LedgerSeries:
    """Ledger of one path given its positions and the snapshot at each time.

    Interior records get the partial time derivatives from their neighbours.
    """
    p = p or PhysicalParams()
    recs = []
    n = len(times)
    for i in range(n):
        prev = snapshots[i - 1] if i > 0 else None
        nxt = snapshots[i + 1] if i < n - 1 else None
        fields = (prev, snapshots[i], nxt) if prev is not None and nxt is not None else snapshots[i]
        recs.append(record(times[i], positions[i], fields, p))
    return annotate(LedgerSeries(tuple(recs), dict(metadata or {})))


def series_from_columns(columns: dict, metadata: dict | None = None) -> LedgerSeries:
    """Ledger from equal-length arrays keyed by :class:`LedgerRecord` field names."""
    n = len(columns["t"])
    names = LedgerRecord.__dataclass_fields__
    recs = [LedgerRecord(**{k: float(np.asarray(v)[i]) for k, v in columns.items() if k in names})
            for i in range(n)]
    return LedgerSeries(tuple(recs), dict(metadata or {}))
