"""CSV and sidecar file formats.

All numbers are serialized with 17 significant digits so every emitted file
re-parses to the exact in-memory float64 values. Matrix files are full dense
p x p CSVs, symmetrized on load under a 1e-8 asymmetry tolerance.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .exceptions import DimensionError
from .fspd import FspdPlan
from .validation import SYMMETRY_TOL, check_data, check_symmetric


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]


def load_matrix(path, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Read a dense symmetric matrix CSV (p rows x p columns)."""
    rows = _rows(path)
    if not rows:
        raise DimensionError(f"{path}: empty matrix file")
    try:
        a = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    except ValueError as err:
        raise ValueError(f"{path}: {err}") from err
    return check_symmetric(a, tol=tol, name=str(path))


def save_matrix(path, m) -> None:
    a = np.asarray(m, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        for row in a:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def load_data(path, header: bool = False) -> np.ndarray:
    """Read an observation CSV, one row per observation."""
    rows = _rows(path)
    if header:
        rows = rows[1:]
    if not rows:
        raise DimensionError(f"{path}: no data rows")
    x = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    return check_data(x, name=str(path))


def save_data(path, x, header: list[str] | None = None) -> None:
    x = np.asarray(x, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in x:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def load_returns(path, dates: bool = False, header: bool = False):
    """Read a days x assets return CSV; ``dates`` strips an ISO-date first column.

    Returns (returns, date_strings_or_None).
    """
    rows = _rows(path)
    if header:
        rows = rows[1:]
    if not rows:
        raise DimensionError(f"{path}: no data rows")
    labels = None
    if dates:
        labels = [row[0] for row in rows]
        rows = [row[1:] for row in rows]
    x = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    return check_data(x, name=str(path)), labels


def write_plan(path, plan: FspdPlan, distances: dict[str, float] | None = None) -> None:
    """Flat key=value sidecar describing a repair plan."""
    lines = {
        "epsilon": fmt(plan.epsilon),
        "mu": "inf" if plan.mu is not None and math.isinf(plan.mu) else fmt(plan.mu),
        "mu_rule": plan.mu_rule,
        "alpha": fmt(plan.alpha),
        "repaired": fmt(plan.repaired),
        "gamma_min": fmt(plan.gamma_min),
        "mu_f_degenerate": fmt(plan.mu_f_degenerate),
    }
    for key, val in (distances or {}).items():
        lines[f"distance_{key}"] = fmt(val)
    with open(path, "w") as fh:
        for key, val in lines.items():
            fh.write(f"{key}={val}\n")


def read_plan(path) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                key, _, val = line.partition("=")
                out[key] = val
    return out


_SUMMARY_FIELDS = (
    "method", "replications", "failures",
    "risk_operator_l1_mean", "risk_operator_l1_se",
    "risk_spectral_mean", "risk_spectral_se",
    "risk_frobenius_mean", "risk_frobenius_se",
    "min_eigenvalue_mean", "negative_eigenvalue_fraction_mean",
    "pd_count", "support_equal_count", "nonconverged_count",
)

_REP_FIELDS = (
    "method", "rep", "risk_operator_l1", "risk_spectral", "risk_frobenius",
    "min_eigenvalue", "negative_eigenvalue_fraction", "is_pd",
    "support_equal", "converged", "error",
)


def write_summary_csv(path, report) -> None:
    """Aggregate report CSV; deterministic (no timing columns)."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(_SUMMARY_FIELDS) + "\n")
        for agg in report.aggregates():
            vals = [getattr(agg, f) if f != "method" else agg.method for f in _SUMMARY_FIELDS]
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in vals) + "\n")


def write_reps_csv(path, report) -> None:
    """Per-replication records; deterministic (no timing columns)."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(_REP_FIELDS) + "\n")
        for rec in report.records:
            vals = []
            for f in _REP_FIELDS:
                v = getattr(rec, f)
                vals.append(v if isinstance(v, str) else fmt(v))
            fh.write(",".join(vals) + "\n")


def write_timings_csv(path, report) -> None:
    """Wall-clock sidecar; varies run to run by nature."""
    with open(path, "w", newline="") as fh:
        fh.write("method,rep,seconds\n")
        for rec in report.records:
            fh.write(f"{rec.method},{rec.rep},{fmt(rec.seconds)}\n")


def read_csv_dicts(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def format_text_table(report) -> str:
    """Aligned plain-text risk table (rows: methods; columns: the three norms)."""
    aggs = report.aggregates()
    spec = report.spec
    head = (f"truth={spec.truth} dist={spec.distribution} n={spec.n} p={spec.p} "
            f"reps={spec.replications} seed={spec.rng_seed}")
    cols = ["method", "matrix_l1", "spectral", "frobenius", "min_eig", "#pd"]
    rows = []
    for a in aggs:
        rows.append([
            a.method,
            f"{a.risk_operator_l1_mean:.4f} ({a.risk_operator_l1_se:.4f})",
            f"{a.risk_spectral_mean:.4f} ({a.risk_spectral_se:.4f})",
            f"{a.risk_frobenius_mean:.4f} ({a.risk_frobenius_se:.4f})",
            f"{a.min_eigenvalue_mean:.4f}",
            f"{a.pd_count}/{a.replications - a.failures}",
        ])
    widths = [max(len(c), *(len(r[i]) for r in rows)) if rows else len(c)
              for i, c in enumerate(cols)]
    lines = [head, ""]
    lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(cols)))
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(cols))))
    return "\n".join(lines) + "\n"


def write_sweep_csv(path, params, curves: dict[str, np.ndarray]) -> None:
    names = list(curves)
    with open(path, "w", newline="") as fh:
        fh.write("param," + ",".join(f"min_eig_{n}" for n in names) + "\n")
        for i, v in enumerate(np.asarray(params)):
            fh.write(fmt(v) + "," + ",".join(fmt(curves[n][i]) for n in names) + "\n")


def write_portfolio_csv(path, results: dict[str, object]) -> None:
    """Table-style portfolio report: one row per method, both constraints."""
    cols = ("method",
            "realized_return_simple", "realized_return_no_short",
            "realized_risk_simple", "realized_risk_no_short",
            "sharpe_simple", "sharpe_no_short",
            "periods_used", "periods_failed", "risk_ratio_no_short_vs_simple")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for name, res in results.items():
            used = sum(1 for p in res.periods if not p.failed)
            failed = sum(1 for p in res.periods if p.failed)
            sharpe_s = fmt(res.simple.sharpe) if res.simple.sharpe_defined else "undefined"
            sharpe_n = fmt(res.no_short.sharpe) if res.no_short.sharpe_defined else "undefined"
            fh.write(",".join([
                name,
                fmt(res.simple.realized_return), fmt(res.no_short.realized_return),
                fmt(res.simple.realized_risk), fmt(res.no_short.realized_risk),
                sharpe_s, sharpe_n,
                str(used), str(failed), fmt(res.risk_ratio_no_short_vs_simple),
            ]) + "\n")
