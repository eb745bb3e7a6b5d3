"""Telemetry parsing, feature computation, and noon-report aggregation.

The grey-box regressors are ``x_hydro = V^3`` and
``x_aero = cos(alpha) * U_R^2 * V``; observed power is the response. Interval
aggregation averages both sides of the power equation over fixed consecutive
windows, which keeps the model linear in (a, b): the mean power of an interval
is ``a * mean(x_hydro) + b * mean(x_aero)`` plus noise.
"""

import csv
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import DataError, ParseError

TELEMETRY_HEADER = [
    "ship_id",
    "timestamp_utc",
    "stw_mps",
    "rel_wind_speed_mps",
    "rel_wind_angle_rad",
    "propulsion_power_w",
]

NOON_HEADER = [
    "ship_id",
    "interval_start_utc",
    "interval_end_utc",
    "mean_x_hydro",
    "mean_x_aero",
    "mean_power_w",
    "sample_count",
    "coverage",
]

_DAY = 86400
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TelemetryRecord:
    """One momentary observation of speed, relative wind, and power."""

    ship_id: str
    timestamp: int  # epoch seconds, UTC
    stw: float  # m/s
    rel_wind_speed: float  # m/s
    rel_wind_angle: float  # rad, [0, 2pi), 0 = head-on
    power: float  # W

    def __post_init__(self):
        if self.stw < 0 or not math.isfinite(self.stw):
            raise DataError("stw must be >= 0 and finite")
        if self.rel_wind_speed < 0 or not math.isfinite(self.rel_wind_speed):
            raise DataError("rel_wind_speed must be >= 0 and finite")
        if not (0.0 <= self.rel_wind_angle < _TWO_PI):
            raise DataError("rel_wind_angle must lie in [0, 2pi)")
        if not math.isfinite(self.power):
            raise DataError("power must be finite")


@dataclass(frozen=True)
class FeatureRow:
    """Grey-box regressors and response for one observation."""

    x_hydro: float  # m3/s3
    x_aero: float  # m3/s3
    y: float  # W
    weight: int = 1  # raw samples behind this row

    def __post_init__(self):
        if self.weight < 1:
            raise DataError("weight must be >= 1")
        for name in ("x_hydro", "x_aero", "y"):
            if not math.isfinite(getattr(self, name)):
                raise DataError("%s must be finite" % name)


@dataclass(frozen=True)
class NoonReport:
    """Interval-aggregated observation (noon-report style)."""

    ship_id: str
    interval_start: int  # epoch seconds, UTC
    interval_end: int
    mean_x_hydro: float
    mean_x_aero: float
    mean_power: float  # W
    sample_count: int
    coverage: float  # fraction of expected samples present, (0, 1]

    def __post_init__(self):
        if self.interval_end <= self.interval_start:
            raise DataError("interval_end must exceed interval_start")
        if not (0.0 < self.coverage <= 1.0):
            raise DataError("coverage must lie in (0, 1]")
        if self.sample_count < 1:
            raise DataError("sample_count must be >= 1")
        for name in ("mean_x_hydro", "mean_x_aero", "mean_power"):
            if not math.isfinite(getattr(self, name)):
                raise DataError("%s must be finite" % name)


def featurize(record: TelemetryRecord) -> FeatureRow:
    """Compute the grey-box regressors for one telemetry record."""
    v = record.stw
    return FeatureRow(
        x_hydro=v ** 3,
        x_aero=math.cos(record.rel_wind_angle) * record.rel_wind_speed ** 2 * v,
        y=record.power,
        weight=1,
    )


def feature_arrays(rows) -> tuple:
    """Columnar (x_hydro, x_aero, y) float arrays from FeatureRows or NoonReports."""
    rows = list(rows)
    if rows and isinstance(rows[0], NoonReport):
        xh = np.array([r.mean_x_hydro for r in rows], dtype=float)
        xa = np.array([r.mean_x_aero for r in rows], dtype=float)
        y = np.array([r.mean_power for r in rows], dtype=float)
    else:
        xh = np.array([r.x_hydro for r in rows], dtype=float)
        xa = np.array([r.x_aero for r in rows], dtype=float)
        y = np.array([r.y for r in rows], dtype=float)
    return xh, xa, y


def filter_maneuvering(records: Iterable[TelemetryRecord],
                       speed_floor: float = 2.0) -> List[TelemetryRecord]:
    """Drop records slower than ``speed_floor`` m/s (maneuvering periods)."""
    return [r for r in records if r.stw >= speed_floor]


def _nominal_cadence(timestamps: np.ndarray, interval_seconds: float) -> float:
    # Median inter-record gap; robust to occasional holes in the series.
    if timestamps.size < 2:
        return float(interval_seconds)
    gaps = np.diff(timestamps)
    gaps = gaps[gaps > 0]
    if gaps.size == 0:
        return float(interval_seconds)
    return float(np.median(gaps))


def aggregate(records: Sequence[TelemetryRecord], interval_hours: float = 24.0,
              min_coverage: float = 0.8) -> List[NoonReport]:
    """Aggregate telemetry into fixed consecutive intervals per ship.

    Intervals are anchored at the UTC midnight preceding each ship's first
    record. Within an interval the regressors and power are arithmetic means,
    so the linear-in-(a, b) structure of the power model is preserved.
    Intervals whose coverage (samples present / samples expected at the
    nominal cadence, where nominal cadence is the median inter-record gap)
    falls below ``min_coverage`` are dropped.

    Input order does not matter; records are sorted internally. Returns an
    empty list for empty input.
    """
    if interval_hours <= 0:
        raise DataError("interval_hours must be positive")
    if not (0.0 <= min_coverage <= 1.0):
        raise DataError("min_coverage must lie in [0, 1]")
    records = list(records)
    if not records:
        return []

    interval_seconds = int(round(interval_hours * 3600))
    by_ship = {}
    for rec in records:
        by_ship.setdefault(rec.ship_id, []).append(rec)

    reports: List[NoonReport] = []
    for ship_id in sorted(by_ship):
        ship_records = by_ship[ship_id]
        try:
            ts = np.array([int(r.timestamp) for r in ship_records], dtype=np.int64)
        except (TypeError, ValueError):
            raise DataError("ship %r: timestamps must be sortable integers" % ship_id) from None
        order = np.argsort(ts, kind="stable")
        ts = ts[order]
        v = np.array([ship_records[i].stw for i in order], dtype=float)
        ur = np.array([ship_records[i].rel_wind_speed for i in order], dtype=float)
        alpha = np.array([ship_records[i].rel_wind_angle for i in order], dtype=float)
        power = np.array([ship_records[i].power for i in order], dtype=float)

        xh = v ** 3
        xa = np.cos(alpha) * ur ** 2 * v

        anchor = (ts[0] // _DAY) * _DAY
        bins = (ts - anchor) // interval_seconds
        cadence = _nominal_cadence(ts, interval_seconds)
        expected = max(1, int(round(interval_seconds / cadence)))

        uniq, start_idx = np.unique(bins, return_index=True)
        boundaries = np.append(start_idx, len(bins))
        for k, b in enumerate(uniq):
            lo, hi = boundaries[k], boundaries[k + 1]
            count = hi - lo
            coverage = min(1.0, count / expected)
            if coverage < min_coverage or count == 0:
                continue
            start = int(anchor + b * interval_seconds)
            reports.append(NoonReport(
                ship_id=ship_id,
                interval_start=start,
                interval_end=start + interval_seconds,
                mean_x_hydro=float(np.mean(xh[lo:hi])),
                mean_x_aero=float(np.mean(xa[lo:hi])),
                mean_power=float(np.mean(power[lo:hi])),
                sample_count=int(count),
                coverage=float(coverage),
            ))
    return reports


def load_telemetry_csv(path, strict: bool = True):
    """Load telemetry records; returns ``(records, problems)``.

    In strict mode the first invalid row raises ParseError naming its line;
    otherwise invalid rows are skipped and collected in ``problems``.
    Duplicate (ship_id, timestamp) pairs are invalid.
    """
    records: List[TelemetryRecord] = []
    problems: List[str] = []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected header", path, 1) from None
        if [h.strip() for h in header] != TELEMETRY_HEADER:
            raise ParseError("bad header %r, expected %r" % (header, TELEMETRY_HEADER), path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != len(TELEMETRY_HEADER):
                    raise ParseError("expected %d columns, got %d"
                                     % (len(TELEMETRY_HEADER), len(row)), path, lineno)
                ship_id = row[0].strip()
                if not ship_id:
                    raise ParseError("empty ship_id", path, lineno)
                try:
                    timestamp = int(row[1])
                    values = [float(c) for c in row[2:6]]
                except ValueError:
                    raise ParseError("unparseable numeric field in %r" % (row,), path,
                                     lineno) from None
                key = (ship_id, timestamp)
                if key in seen:
                    raise ParseError("duplicate (ship_id, timestamp) %r" % (key,), path, lineno)
                record = TelemetryRecord(ship_id, timestamp, values[0], values[1],
                                         values[2], values[3])
            except (ParseError, DataError) as exc:
                if strict:
                    if isinstance(exc, ParseError):
                        raise
                    raise ParseError(str(exc), path, lineno) from None
                problems.append("%s:%d: %s" % (path, lineno, exc))
                continue
            seen.add(key)
            records.append(record)
    return records, problems


def save_telemetry_csv(path, records: Iterable[TelemetryRecord]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TELEMETRY_HEADER)
        for r in records:
            writer.writerow([r.ship_id, int(r.timestamp), repr(float(r.stw)),
                             repr(float(r.rel_wind_speed)), repr(float(r.rel_wind_angle)),
                             repr(float(r.power))])


def load_noon_csv(path, strict: bool = True):
    """Load noon reports; returns ``(reports, problems)`` like load_telemetry_csv."""
    reports: List[NoonReport] = []
    problems: List[str] = []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected header", path, 1) from None
        if [h.strip() for h in header] != NOON_HEADER:
            raise ParseError("bad header %r, expected %r" % (header, NOON_HEADER), path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != len(NOON_HEADER):
                    raise ParseError("expected %d columns, got %d"
                                     % (len(NOON_HEADER), len(row)), path, lineno)
                ship_id = row[0].strip()
                if not ship_id:
                    raise ParseError("empty ship_id", path, lineno)
                try:
                    start, end = int(row[1]), int(row[2])
                    xh, xa, mp = float(row[3]), float(row[4]), float(row[5])
                    count = int(row[6])
                    coverage = float(row[7])
                except ValueError:
                    raise ParseError("unparseable numeric field in %r" % (row,), path,
                                     lineno) from None
                key = (ship_id, start)
                if key in seen:
                    raise ParseError("duplicate (ship_id, interval_start) %r" % (key,),
                                     path, lineno)
                report = NoonReport(ship_id, start, end, xh, xa, mp, count, coverage)
            except (ParseError, DataError) as exc:
                if strict:
                    if isinstance(exc, ParseError):
                        raise
                    raise ParseError(str(exc), path, lineno) from None
                problems.append("%s:%d: %s" % (path, lineno, exc))
                continue
            seen.add(key)
            reports.append(report)
    return reports, problems


def save_noon_csv(path, reports: Iterable[NoonReport]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(NOON_HEADER)
        for r in reports:
            writer.writerow([r.ship_id, int(r.interval_start), int(r.interval_end),
                             repr(float(r.mean_x_hydro)), repr(float(r.mean_x_aero)),
                             repr(float(r.mean_power)), int(r.sample_count),
                             repr(float(r.coverage))])


def sniff_observation_file(path) -> str:
    """Return ``"telemetry"`` or ``"noon"`` from a data file's header."""
    with open(path, newline="") as fh:
        header = [h.strip() for h in next(csv.reader(fh), [])]
    if header == TELEMETRY_HEADER:
        return "telemetry"
    if header == NOON_HEADER:
        return "noon"
    raise ParseError("unrecognized header %r" % (header,), path, 1)
