"""Aggregation of stored results: means with standard errors, rejection rates, ECDFs.

All functions are pure passes over record lists; accumulation is plain
left-to-right summation in record order so repeated runs of the same
stored data reproduce identical bytes on export.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .paramspace import Configuration
from .storage import ResultRecord

__all__ = [
    "AggregateSummary",
    "EcdfCurve",
    "RejectionRateRow",
    "aggregate",
    "ecdf",
    "export",
    "mean_and_se",
    "rejection_rate",
    "rejection_rows",
]


def mean_and_se(values) -> tuple[float, float]:
    """Mean and standard error (sample sd over sqrt(n)); SE is 0 for n == 1."""
    values = list(values)
    n = len(values)
    if n == 0:
        raise ValueError("cannot summarize an empty value list")
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    ss = sum((v - mean) ** 2 for v in values)
    return mean, math.sqrt(ss / (n - 1)) / math.sqrt(n)


@dataclass(frozen=True)
class AggregateSummary:
    """Per-group replication count and (mean, standard error) per numeric outcome."""

    group: Configuration
    n: int
    stats: dict[str, tuple[float, float]]

    def mean(self, name: str) -> float:
        return self.stats[name][0]

    def std_error(self, name: str) -> float:
        return self.stats[name][1]

    def formatted(self, name: str, digits: int = 3) -> str:
        m, se = self.stats[name]
        return f"{m:.{digits}f} ({se:.{digits}f})"


def aggregate(records: list[ResultRecord], group_axes: list[str]) -> list[AggregateSummary]:
    """One summary per distinct value combination of the group axes.

    Numeric outcomes get a mean and standard error; text and blob outcomes
    are skipped.  Groups come back sorted by their axis values.
    """
    if not records:
        return []
    for axis in group_axes:
        records[0].config[axis]  # raises KeyError for unknown axes
    groups: dict[tuple, list[ResultRecord]] = {}
    for rec in records:
        key = tuple(rec.config[a] for a in group_axes)
        groups.setdefault(key, []).append(rec)

    numeric = [
        name
        for name, v in records[0].outcomes.items()
        if isinstance(v, (int, float)) and not isinstance(v, bool)
    ]
    out = []
    for key in sorted(groups):
        members = groups[key]
        stats = {}
        for name in numeric:
            stats[name] = mean_and_se([r.outcomes[name] for r in members])
        out.append(
            AggregateSummary(
                group=Configuration(tuple(zip(group_axes, key))),
                n=len(members),
                stats=stats,
            )
        )
    return out


def rejection_rate(pvalues, alpha: float) -> dict[str, float]:
    """Share of p-values at or below alpha, with its binomial standard error."""
    pvalues = list(pvalues)
    if not pvalues:
        raise ValueError("rejection rate undefined for an empty p-value list")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    _check_pvalues(pvalues)
    n = len(pvalues)
    rate = sum(1 for p in pvalues if p <= alpha) / n
    return {"rate": rate, "std_error": math.sqrt(rate * (1.0 - rate) / n)}


def _check_pvalues(pvalues) -> None:
    for p in pvalues:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")


@dataclass(frozen=True)
class EcdfCurve:
    """Right-continuous empirical CDF with a two-standard-error band."""

    points: tuple[tuple[float, float], ...]  # (x, fraction <= x), x strictly increasing
    n: int

    def evaluate(self, x: float) -> float:
        value = 0.0
        for xi, fi in self.points:
            if xi <= x:
                value = fi
            else:
                break
        return value

    def band_halfwidth(self, x: float) -> float:
        f = self.evaluate(x)
        return 2.0 * math.sqrt(f * (1.0 - f) / self.n)

    def band(self, x: float) -> tuple[float, float]:
        """Confidence band clipped to [0, 1]."""
        f = self.evaluate(x)
        h = self.band_halfwidth(x)
        return max(0.0, f - h), min(1.0, f + h)


def ecdf(pvalues) -> EcdfCurve:
    """ECDF of p-values; one point per distinct value."""
    pvalues = list(pvalues)
    if not pvalues:
        raise ValueError("cannot build an ECDF from an empty list")
    _check_pvalues(pvalues)
    n = len(pvalues)
    points = []
    seen = 0
    last = None
    for p in sorted(pvalues):
        if last is not None and p != last:
            points.append((last, seen / n))
        seen += 1
        last = p
    points.append((last, 1.0))
    return EcdfCurve(points=tuple(points), n=n)


@dataclass(frozen=True)
class RejectionRateRow:
    """Average p-value and rejection rates at fixed significance levels for one group."""

    group: Configuration
    n: int
    avg_p: float
    se_p: float
    rates: dict[float, tuple[float, float]]  # alpha -> (rate, std_error)


def rejection_rows(records: list[ResultRecord], group_axes: list[str],
                   p_field: str = "p_value",
                   alphas: tuple[float, ...] = (0.01, 0.05)) -> list[RejectionRateRow]:
    """Rejection-rate table rows, one per group, sorted by group values."""
    rows = []
    for summary in aggregate(records, group_axes):
        filt = summary.group.as_dict()
        pvals = [
            r.outcomes[p_field]
            for r in records
            if all(r.config[a] == v for a, v in filt.items())
        ]
        avg_p, se_p = mean_and_se(pvals)
        rates = {}
        for alpha in alphas:
            rr = rejection_rate(pvals, alpha)
            rates[alpha] = (rr["rate"], rr["std_error"])
        rows.append(RejectionRateRow(group=summary.group, n=summary.n,
                                     avg_p=avg_p, se_p=se_p, rates=rates))
    return rows


# ---------------------------------------------------------------------------
# export


def _alpha_label(alpha: float) -> str:
    pct = alpha * 100.0
    return f"{pct:g}".replace(".", "_")


def _summary_rows(summaries: list[AggregateSummary], include_formatted: bool) -> list[dict]:
    rows = []
    for s in summaries:
        row = dict(s.group.assignments)
        row["n"] = s.n
        for name, (m, se) in s.stats.items():
            row[f"{name}_mean"] = m
            row[f"{name}_se"] = se
            if include_formatted:
                row[f"{name}_fmt"] = s.formatted(name)
        rows.append(row)
    return rows


def _rejection_rows(rows_in: list[RejectionRateRow]) -> list[dict]:
    rows = []
    for r in rows_in:
        row = dict(r.group.assignments)
        row["n"] = r.n
        row["avg_p"] = r.avg_p
        row["se_p"] = r.se_p
        for alpha, (rate, se) in r.rates.items():
            label = _alpha_label(alpha)
            row[f"err_{label}pct"] = rate
            row[f"se_{label}"] = se
        rows.append(row)
    return rows


def _ecdf_rows(curve: EcdfCurve) -> list[dict]:
    return [
        {"x": x, "ecdf": f, "band": 2.0 * math.sqrt(f * (1.0 - f) / curve.n)}
        for x, f in curve.points
    ]


def _render(value) -> str:
    if isinstance(value, float):
        return repr(value)  # shortest exact round-trip, never below 6 significant digits
    return str(value)


def export(data, fmt: str, destination, *, include_formatted: bool = False,
           header: list[str] | None = None) -> None:
    """Write summaries, rejection rows, or an ECDF curve as CSV or JSON.

    ``destination`` is a path or a writable text file object.  Column order
    is deterministic: group axes first, then statistics in declaration
    order.  An empty summary list produces output with no rows; ``header``
    overrides the column names used in that case.
    """
    if isinstance(data, EcdfCurve):
        rows = _ecdf_rows(data)
        default_header = ["x", "ecdf", "band"]
    elif all(isinstance(d, AggregateSummary) for d in data):
        rows = _summary_rows(list(data), include_formatted)
        default_header = ["n"]
    elif all(isinstance(d, RejectionRateRow) for d in data):
        rows = _rejection_rows(list(data))
        default_header = ["n", "avg_p", "se_p"]
    else:
        raise TypeError("export expects AggregateSummary/RejectionRateRow lists or an EcdfCurve")

    header = list(rows[0].keys()) if rows else list(header or default_header)
    if fmt == "csv":
        _write(destination, lambda f: _write_csv(f, header, rows))
    elif fmt == "json":
        _write(destination, lambda f: json.dump(rows, f, indent=2))
    else:
        raise ValueError(f"unknown export format {fmt!r} (expected csv or json)")


def _write_csv(f, header, rows) -> None:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_render(row[k]) for k in header])


def _write(destination, writer) -> None:
    if isinstance(destination, (str, Path)):
        with open(destination, "w", encoding="utf-8", newline="") as f:
            writer(f)
    elif isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        writer(destination)
    else:
        raise TypeError(f"cannot write to {type(destination).__name__}")
