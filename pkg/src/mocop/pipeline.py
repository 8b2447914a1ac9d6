"""Bank-cohort ingestion and construction of paired failure-time samples.

Banks from two countries are ranked by externally estimated distress
scores and paired rank by rank; the larger country is first truncated to
the smaller one's size.  Failure times are measured in panel years from
each bank's panel start, and non-failed banks are right-censored at the
largest observed failure time t* (type-I scheme).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .marginals import TimeObservation, pseudo_observations

REQUIRED_COLUMNS = [
    "bank_id",
    "country",
    "total_assets",
    "distress_score",
    "failure_year",
    "panel_start",
    "panel_end",
]

PAIRED_COLUMNS = ["pair_id", "u", "v", "delta_x", "delta_y", "x_time", "y_time"]

SELECTION_RULES = ("by-assets", "by-distress")


class IngestError(ValueError):
    """Input file violates the CSV schema; `problems` lists per-line diagnostics."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class BankRecord:
    bank_id: str
    country: str
    total_assets: float
    distress_score: float
    failure_year: int | None
    panel_start: int
    panel_end: int


@dataclass
class PairedCohort:
    """Rank-aligned bank pairs (one per row, first country then second)."""

    pairs: list[tuple[BankRecord, BankRecord]]
    selection_rule: str
    t_star: float | None = None  # filled by build_censored


def ingest(path) -> list[BankRecord]:
    """Read and validate bank records; any malformed row aborts with diagnostics."""
    path = Path(path)
    problems: list[str] = []
    records: list[BankRecord] = []
    seen_ids: dict[str, int] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise IngestError([f"{path.name}: missing required column(s) {', '.join(missing)}"])
        for lineno, row in enumerate(reader, start=2):
            rec = _parse_row(row, lineno, path.name, problems, seen_ids)
            if rec is not None:
                records.append(rec)
    if problems:
        raise IngestError(problems)
    return records


def _parse_row(row, lineno, fname, problems, seen_ids):
    def bad(msg):
        problems.append(f"{fname}:{lineno}: {msg}")

    bank_id = (row.get("bank_id") or "").strip()
    if not bank_id:
        bad("empty bank_id")
        return None
    if bank_id in seen_ids:
        bad(f"duplicate bank_id {bank_id!r} (first seen at line {seen_ids[bank_id]})")
        return None
    seen_ids[bank_id] = lineno

    try:
        assets = float(row["total_assets"])
        score = float(row["distress_score"])
        start = int(row["panel_start"])
        end = int(row["panel_end"])
    except (TypeError, ValueError, KeyError) as exc:
        bad(f"unparsable numeric field ({exc})")
        return None
    if assets < 0:
        bad(f"total_assets must be >= 0, got {assets}")
        return None
    if not 0.0 <= score <= 1.0:
        bad(f"distress_score must be in [0, 1], got {score}")
        return None
    if start > end:
        bad(f"panel_start {start} exceeds panel_end {end}")
        return None
    raw_year = (row.get("failure_year") or "").strip()
    year = None
    if raw_year:
        try:
            year = int(raw_year)
        except ValueError:
            bad(f"unparsable failure_year {raw_year!r}")
            return None
        if not start <= year <= end:
            bad(f"failure_year {year} outside panel [{start}, {end}]")
            return None
    return BankRecord(
        bank_id=bank_id,
        country=(row.get("country") or "").strip(),
        total_assets=assets,
        distress_score=score,
        failure_year=year,
        panel_start=start,
        panel_end=end,
    )


def _by_score(records):
    # distress-score descending; bank_id breaks ties deterministically
    return sorted(records, key=lambda r: (-r.distress_score, r.bank_id))


def pair_countries(a, b, rule: str = "by-assets") -> PairedCohort:
    """Truncate the larger country and pair both, rank by rank, on distress score.

    `rule` picks which banks of the larger country survive truncation:
    "by-assets" keeps the largest balance sheets, "by-distress" the highest
    distress scores.  Input row order never matters.
    """
    if rule not in SELECTION_RULES:
        raise ValueError(f"rule must be one of {SELECTION_RULES}, got {rule!r}")
    a, b = list(a), list(b)
    if not a or not b:
        raise ValueError("both countries need at least one bank")
    size = min(len(a), len(b))

    def truncate(records):
        if len(records) == size:
            return records
        if rule == "by-assets":
            kept = sorted(records, key=lambda r: (-r.total_assets, r.bank_id))[:size]
        else:
            kept = _by_score(records)[:size]
        return kept

    left = _by_score(truncate(a))
    right = _by_score(truncate(b))
    return PairedCohort(pairs=list(zip(left, right)), selection_rule=rule)


def _time_to_default(rec: BankRecord, origin_offset: int) -> float | None:
    if rec.failure_year is None:
        return None
    return float(rec.failure_year - rec.panel_start + origin_offset)


def build_censored(cohort: PairedCohort, origin_offset: int = 1):
    """Type-I censored failure-time sequences for both margins.

    Failure time is failure_year - panel_start + origin_offset (the first
    panel year maps to `origin_offset`, default 1, keeping times positive).
    t* is the largest observed failure time across the whole cohort;
    non-failed banks carry time t* with observed=False.

    Returns (x_obs, y_obs, t_star).
    """
    fail_times = []
    for x, y in cohort.pairs:
        for rec in (x, y):
            t = _time_to_default(rec, origin_offset)
            if t is not None:
                fail_times.append(t)
    if not fail_times:
        raise ValueError("cannot censor a cohort with no observed failure (t* undefined)")
    t_star = max(fail_times)

    def to_obs(rec):
        t = _time_to_default(rec, origin_offset)
        if t is None:
            return TimeObservation(time=t_star, observed=False)
        return TimeObservation(time=t, observed=True)

    x_obs = [to_obs(x) for x, _ in cohort.pairs]
    y_obs = [to_obs(y) for _, y in cohort.pairs]
    cohort.t_star = t_star
    return x_obs, y_obs, t_star


def cohort_sample(cohort: PairedCohort, censored: bool, origin_offset: int = 1):
    """Pseudo-observations for a cohort.

    Censored mode keeps every pair (Kaplan-Meier margins); complete mode
    keeps only pairs where both banks failed (empirical-CDF margins).

    Returns (uv, deltas, x_times, y_times, t_star).
    """
    x_obs, y_obs, t_star = build_censored(cohort, origin_offset)
    if censored:
        uv, deltas = pseudo_observations(x_obs, y_obs, censored=True)
    else:
        keep = [i for i, (x, y) in enumerate(zip(x_obs, y_obs)) if x.observed and y.observed]
        if not keep:
            raise ValueError("complete mode needs at least one pair with both failures observed")
        x_obs = [x_obs[i] for i in keep]
        y_obs = [y_obs[i] for i in keep]
        uv, deltas = pseudo_observations(x_obs, y_obs, censored=False)
    x_times = np.array([o.time for o in x_obs])
    y_times = np.array([o.time for o in y_obs])
    return uv, deltas, x_times, y_times, t_star


def write_paired_sample(path, uv, deltas, x_times=None, y_times=None):
    """Write the paired-sample audit file (pair_id,u,v,delta_x,delta_y,x_time,y_time)."""
    uv = np.asarray(uv, dtype=float)
    deltas = np.asarray(deltas, dtype=int)
    n = uv.shape[0]
    if x_times is None:
        x_times = np.full(n, np.nan)
    if y_times is None:
        y_times = np.full(n, np.nan)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PAIRED_COLUMNS)
        for i in range(n):
            writer.writerow(
                [
                    i,
                    f"{uv[i, 0]:.17g}",
                    f"{uv[i, 1]:.17g}",
                    deltas[i, 0],
                    deltas[i, 1],
                    _fmt_time(x_times[i]),
                    _fmt_time(y_times[i]),
                ]
            )


def _fmt_time(t):
    return "" if np.isnan(t) else f"{t:.17g}"


def read_paired_sample(path):
    """Read a paired-sample file; returns (uv, deltas, x_times, y_times)."""
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in PAIRED_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise IngestError([f"{path.name}: missing required column(s) {', '.join(missing)}"])
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(
                    (
                        float(row["u"]),
                        float(row["v"]),
                        int(row["delta_x"]),
                        int(row["delta_y"]),
                        float(row["x_time"]) if row["x_time"] else np.nan,
                        float(row["y_time"]) if row["y_time"] else np.nan,
                    )
                )
            except (TypeError, ValueError) as exc:
                raise IngestError([f"{path.name}:{lineno}: unparsable row ({exc})"]) from exc
    if not rows:
        raise IngestError([f"{path.name}: no data rows"])
    arr = np.array(rows, dtype=float)
    return arr[:, 0:2], arr[:, 2:4].astype(int), arr[:, 4], arr[:, 5]
