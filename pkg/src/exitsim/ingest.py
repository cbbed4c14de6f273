"""Ingestion of mobility, demographic and case/death files, smoothing, and
assembly of the 32-feature training dataset.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import epi, rt
from .errors import (
    AllMissingError,
    CountryMismatchError,
    DataError,
    InvalidParameterError,
    MalformedDateError,
    MalformedHeaderError,
    TooFewRegionsError,
)

MOBILITY_CATEGORIES = (
    "retail_recreation",
    "grocery_pharmacy",
    "parks",
    "transit_stations",
    "workplaces",
    "residential",
)

MOBILITY_CSV_COLUMNS = {
    "retail_recreation": "retail_and_recreation_percent_change_from_baseline",
    "grocery_pharmacy": "grocery_and_pharmacy_percent_change_from_baseline",
    "parks": "parks_percent_change_from_baseline",
    "transit_stations": "transit_stations_percent_change_from_baseline",
    "workplaces": "workplaces_percent_change_from_baseline",
    "residential": "residential_percent_change_from_baseline",
}

SMOOTHING_WINDOWS = (5, 10, 15, 30)

DEMOGRAPHIC_FEATURES = ("gdp", "population", "density", "area", "under15", "over64")

FEATURE_NAMES = tuple(
    f"{cat}_{w}d" for cat in MOBILITY_CATEGORIES for w in SMOOTHING_WINDOWS
) + DEMOGRAPHIC_FEATURES + ("day_of_week", "region")

N_FEATURES = len(FEATURE_NAMES)  # 6*4 + 6 + 2 = 32


@dataclass(frozen=True)
class MobilityRecord:
    """Per-day percent change from baseline for the six place categories.

    None marks a missing value to be interpolated later.
    """

    country: str
    date: dt.date
    retail_recreation: float | None = None
    grocery_pharmacy: float | None = None
    parks: float | None = None
    transit_stations: float | None = None
    workplaces: float | None = None
    residential: float | None = None

    def __post_init__(self):
        for cat in MOBILITY_CATEGORIES:
            v = getattr(self, cat)
            if v is not None and v < -100:
                raise InvalidParameterError(f"{cat} below -100: {v}")

    def values(self):
        return tuple(getattr(self, cat) for cat in MOBILITY_CATEGORIES)


@dataclass(frozen=True)
class Demographics:
    country: str
    gdp: float
    population: float
    density: float
    area: float
    under15: float
    over64: float
    region: int

    def __post_init__(self):
        if self.population <= 0 or self.area <= 0:
            raise InvalidParameterError("population and area must be > 0")
        if self.under15 + self.over64 > 1.0 + 1e-12:
            raise InvalidParameterError("under15 + over64 exceeds 1")
        if not 0 <= self.region <= 10:
            raise InvalidParameterError("region code must be in [0, 10]")

    def feature_values(self):
        return tuple(getattr(self, name) for name in DEMOGRAPHIC_FEATURES)


@dataclass(frozen=True)
class FeatureRow:
    """One labeled training instance: 32 features for one (country, day)."""

    country: str
    date: dt.date
    features: tuple
    label_rt: float | None = None

    def __post_init__(self):
        feats = tuple(float(v) for v in self.features)
        if len(feats) != N_FEATURES:
            raise InvalidParameterError(
                f"expected {N_FEATURES} features, got {len(feats)}"
            )
        object.__setattr__(self, "features", feats)

    @property
    def region(self) -> int:
        return int(self.features[-1])


@dataclass
class Dataset:
    """FeatureRows with optional train/test tags and train-only z-score stats."""

    rows: list
    split: list | None = None
    standardization: tuple | None = None  # (means, stds) over train rows

    def __len__(self):
        return len(self.rows)

    def matrix(self, subset=None):
        """(X, y) for all rows, or only the rows tagged `subset`."""
        idx = range(len(self.rows))
        if subset is not None:
            if self.split is None:
                raise DataError("dataset has no split tags")
            idx = [i for i in idx if self.split[i] == subset]
        X = np.array([self.rows[i].features for i in idx], dtype=float)
        y = np.array(
            [math.nan if self.rows[i].label_rt is None else self.rows[i].label_rt for i in idx],
            dtype=float,
        )
        return X, y

    def compute_standardization(self):
        """Per-feature (mean, std) over the train rows only."""
        X, _ = self.matrix("train")
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        stds[stds == 0] = 1.0
        self.standardization = (means, stds)
        return self.standardization


def _parse_float(cell):
    cell = cell.strip()
    return None if cell == "" else float(cell)


def parse_mobility_csv(stream) -> list:
    """Parse a mobility report CSV into country-level MobilityRecords.

    Rows carrying a sub-national region code are skipped. Empty cells
    become missing markers.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    header = reader.fieldnames or []
    required = ["country_region_code", "date", *MOBILITY_CSV_COLUMNS.values()]
    missing = [col for col in required if col not in header]
    if missing:
        raise MalformedHeaderError(f"missing columns: {', '.join(missing)}")

    subnational_cols = [c for c in ("sub_region_1", "sub_region_2", "metro_area") if c in header]
    records = []
    for lineno, row in enumerate(reader, start=2):
        if any((row.get(c) or "").strip() for c in subnational_cols):
            continue
        try:
            date = dt.date.fromisoformat(row["date"].strip())
        except ValueError:
            raise MalformedDateError(
                f"malformed date {row['date']!r} on line {lineno}", line=lineno
            ) from None
        values = {}
        for cat, col in MOBILITY_CSV_COLUMNS.items():
            try:
                values[cat] = _parse_float(row[col])
            except ValueError:
                raise DataError(f"malformed value in column {col} on line {lineno}") from None
        records.append(MobilityRecord(country=row["country_region_code"].strip(), date=date, **values))
    return records


def mobility_to_csv(records) -> str:
    """Serialize records back to the published CSV header (lossless for
    non-missing values)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["country_region_code", "date", *MOBILITY_CSV_COLUMNS.values()])
    for rec in records:
        row = [rec.country, rec.date.isoformat()]
        row += ["" if v is None else repr(float(v)) for v in rec.values()]
        writer.writerow(row)
    return buf.getvalue()


def parse_demographics_csv(stream) -> list:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    required = ["country", *DEMOGRAPHIC_FEATURES, "region"]
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise MalformedHeaderError(f"missing columns: {', '.join(missing)}")
    out = []
    for row in reader:
        out.append(
            Demographics(
                country=row["country"].strip(),
                gdp=float(row["gdp"]),
                population=float(row["population"]),
                density=float(row["density"]),
                area=float(row["area"]),
                under15=float(row["under15"]),
                over64=float(row["over64"]),
                region=int(row["region"]),
            )
        )
    return out


def parse_cases_csv(stream) -> dict:
    """Observed cumulative cases/deaths per country, keyed by country code."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    required = ["country", "date", "cumulative_cases", "cumulative_deaths"]
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise MalformedHeaderError(f"missing columns: {', '.join(missing)}")
    per_country = {}
    for lineno, row in enumerate(reader, start=2):
        try:
            date = dt.date.fromisoformat(row["date"].strip())
        except ValueError:
            raise MalformedDateError(
                f"malformed date {row['date']!r} on line {lineno}", line=lineno
            ) from None
        per_country.setdefault(row["country"].strip(), []).append(
            (date, float(row["cumulative_cases"]), float(row["cumulative_deaths"]))
        )
    return per_country


def observed_series(per_country_rows, country, population) -> rt.ObservedSeries:
    rows = sorted(per_country_rows[country])
    return rt.ObservedSeries(
        start_date=rows[0][0],
        cumulative_cases=tuple(r[1] for r in rows),
        cumulative_deaths=tuple(r[2] for r in rows),
        population=population,
    )


def interpolate_missing(series) -> list:
    """Fill gaps by linear interpolation; lead/tail gaps take the nearest value."""
    values = list(series)
    known = [(i, v) for i, v in enumerate(values) if v is not None]
    if not known:
        raise AllMissingError("series has no observed values")
    xs = np.array([i for i, _ in known], dtype=float)
    ys = np.array([v for _, v in known], dtype=float)
    filled = np.interp(np.arange(len(values), dtype=float), xs, ys)
    return [float(v) for v in filled]


def smooth(series, window: int) -> list:
    """Trailing mean over `window` days; truncated at the head of the series."""
    return [float(v) for v in _smooth_array(np.asarray(series, dtype=float), window)]


def _smooth_array(x: np.ndarray, window: int) -> np.ndarray:
    csum = np.concatenate(([0.0], np.cumsum(x)))
    t = np.arange(len(x))
    lo = np.maximum(0, t - window + 1)
    return (csum[t + 1] - csum[lo]) / (t + 1 - lo)


def smooth_matrix(daily: np.ndarray) -> np.ndarray:
    """Smoothed mobility features for a (n_days, 6) matrix -> (n_days, 24),
    ordered category-major then window."""
    daily = np.asarray(daily, dtype=float)
    out = np.empty((daily.shape[0], daily.shape[1] * len(SMOOTHING_WINDOWS)))
    col = 0
    for c in range(daily.shape[1]):
        for w in SMOOTHING_WINDOWS:
            out[:, col] = _smooth_array(daily[:, c], w)
            col += 1
    return out


def mobility_by_country(records) -> dict:
    """Group records into per-country (dates, daily 6-column matrix) with
    missing values interpolated. Dates are made contiguous."""
    grouped = {}
    for rec in records:
        grouped.setdefault(rec.country, []).append(rec)
    out = {}
    for country, recs in grouped.items():
        recs = sorted(recs, key=lambda r: r.date)
        start, end = recs[0].date, recs[-1].date
        n = (end - start).days + 1
        raw = [[None] * 6 for _ in range(n)]
        for rec in recs:
            raw[(rec.date - start).days] = list(rec.values())
        columns = []
        for c in range(6):
            columns.append(interpolate_missing([row[c] for row in raw]))
        dates = [start + dt.timedelta(days=i) for i in range(n)]
        out[country] = (dates, np.array(columns, dtype=float).T)
    return out


def assemble_dataset(mobility_records, demographics, rt_histories) -> Dataset:
    """One FeatureRow per (country, day) where mobility and a fitted R_t
    history are both available."""
    demo_by_country = {d.country: d for d in demographics}
    per_country = mobility_by_country(mobility_records)

    missing = sorted(
        set(per_country) - set(demo_by_country) | set(per_country) - set(rt_histories)
    )
    if missing:
        raise CountryMismatchError(
            f"countries missing from demographics or R_t fits: {', '.join(missing)}",
            missing=missing,
        )

    rows = []
    for country in sorted(per_country):
        dates, daily = per_country[country]
        smoothed = smooth_matrix(daily)
        demo = demo_by_country[country]
        history = rt_histories[country]
        for i, date in enumerate(dates):
            day_index = (date - history.start_date).days
            if day_index < 0 or day_index >= len(history.values):
                continue
            features = (
                tuple(smoothed[i])
                + demo.feature_values()
                + (float(date.weekday()), float(demo.region))
            )
            rows.append(
                FeatureRow(
                    country=country,
                    date=date,
                    features=features,
                    label_rt=history.value_at(day_index),
                )
            )
    return Dataset(rows=rows)


def split(dataset: Dataset, scheme: str, seed: int = 0, test_fraction: float = 0.2) -> Dataset:
    """Tag rows train/test under one of the three split schemes."""
    if not dataset.rows:
        raise DataError("cannot split an empty dataset")
    n = len(dataset.rows)
    if scheme == "random":
        rng = np.random.default_rng(seed)
        tags = ["test" if u < test_fraction else "train" for u in rng.random(n)]
    elif scheme == "region":
        tags = _region_split(dataset, seed, test_fraction)
    elif scheme == "temporal":
        tags = _temporal_split(dataset, test_fraction)
    else:
        raise InvalidParameterError(f"unknown split scheme: {scheme!r}")
    out = Dataset(rows=list(dataset.rows), split=tags)
    out.compute_standardization()
    return out


def _region_split(dataset, seed, test_fraction):
    n = len(dataset.rows)
    counts = {}
    for row in dataset.rows:
        counts[row.region] = counts.get(row.region, 0) + 1
    regions = list(counts)
    rng = np.random.default_rng(seed)
    rng.shuffle(regions)
    held, held_count = set(), 0
    best_gap = abs(0.0 - test_fraction)
    for region in regions:
        gap = abs((held_count + counts[region]) / n - test_fraction)
        if gap < best_gap:
            held.add(region)
            held_count += counts[region]
            best_gap = gap
    share = held_count / n
    if not 0.15 <= share <= 0.25:
        raise TooFewRegionsError(
            f"region split cannot reach a 15-25% test share (best {share:.0%})"
        )
    return ["test" if row.region in held else "train" for row in dataset.rows]


def _temporal_split(dataset, test_fraction):
    dates = sorted({row.date for row in dataset.rows})
    n = len(dataset.rows)
    best = None
    for cutoff in dates:
        share = sum(1 for row in dataset.rows if row.date >= cutoff) / n
        gap = abs(share - test_fraction)
        if best is None or gap < best[0]:
            best = (gap, cutoff)
    cutoff = best[1]
    return ["test" if row.date >= cutoff else "train" for row in dataset.rows]


def dataset_to_jsonl(dataset: Dataset):
    """(rows JSONL, sidecar JSON with split tags and standardization stats)."""
    lines = []
    for row in dataset.rows:
        lines.append(
            json.dumps(
                {
                    "country": row.country,
                    "date": row.date.isoformat(),
                    "features": list(row.features),
                    "label_rt": row.label_rt,
                }
            )
        )
    sidecar = {
        "feature_names": list(FEATURE_NAMES),
        "split": dataset.split,
        "standardization": None
        if dataset.standardization is None
        else {
            "means": list(dataset.standardization[0]),
            "stds": list(dataset.standardization[1]),
        },
    }
    return "\n".join(lines) + "\n", json.dumps(sidecar)


def dataset_from_jsonl(rows_text: str, sidecar_text: str | None = None) -> Dataset:
    rows = []
    for line in rows_text.splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        rows.append(
            FeatureRow(
                country=doc["country"],
                date=dt.date.fromisoformat(doc["date"]),
                features=tuple(doc["features"]),
                label_rt=doc["label_rt"],
            )
        )
    dataset = Dataset(rows=rows)
    if sidecar_text:
        sidecar = json.loads(sidecar_text)
        dataset.split = sidecar.get("split")
        stats = sidecar.get("standardization")
        if stats:
            dataset.standardization = (
                np.array(stats["means"]),
                np.array(stats["stds"]),
            )
    return dataset
