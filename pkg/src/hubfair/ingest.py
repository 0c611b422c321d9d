"""Parsing and alignment of hub-format forecast, ground-truth, and county
covariate files onto county x epi-week keys.

File schemas (CSV, UTF-8, header required, ISO-8601 dates):

- forecasts:     forecast_date,target,target_end_date,location,type,quantile,value
- truth:         date,location,value (cumulative)  or  week_end,location,incident
- demographics:  fips,population,pct_white,pct_black,pct_hispanic,pct_asian,pct_age65,state
- urbanization:  fips,code
- health:        fips,BPHIGH,CANCER,DIABETES,OBESITY,STROKE,COPD,KIDNEY,CASTHMA,CHD
- metadata:      team_id,model_type,mobility

Forecast files carry no team column (hub convention: one file per team), so
the team id is taken from an argument or the file name stem.
"""
from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import InputDataError
from .metrics import QUANTILE_LEVELS
from .phases import assign_phase

HEALTH_OUTCOMES = ("BPHIGH", "CANCER", "DIABETES", "OBESITY", "STROKE",
                   "COPD", "KIDNEY", "CASTHMA", "CHD")

MODEL_TYPES = ("Compartmental", "Statistical", "DeepLearning", "Baseline", "Ensemble")
MOBILITY_LEVELS = ("No", "Yes", "Mixed")

_TARGET_RE = re.compile(r"^(\d+) wk ahead inc case$")


class UrbanicityGroup(str, Enum):
    """CDC urbanization codes 1-6 collapsed to three labels."""

    LM = "LM"    # large metropolitan, codes 1-2
    SMM = "SMM"  # small and medium metropolitan, codes 3-4
    MC = "MC"    # micropolitan and noncore, codes 5-6

    @classmethod
    def from_code(cls, code):
        if code in (1, 2):
            return cls.LM
        if code in (3, 4):
            return cls.SMM
        if code in (5, 6):
            return cls.MC
        raise InputDataError(f"urbanization code must be 1..6, got {code!r}")


def epi_week_end(d):
    """Saturday ending the MMWR week (Sunday..Saturday) that contains ``d``."""
    return d + timedelta(days=(5 - d.weekday()) % 7)


@dataclass(frozen=True, slots=True)
class QuantileForecast:
    team_id: str
    forecast_date: date
    lookahead_days: int
    target_end_date: date
    fips: str
    quantile: float
    value: float


@dataclass(frozen=True, slots=True)
class GroundTruth:
    fips: str
    week_end: date
    incident_cases: float


@dataclass(frozen=True, slots=True)
class CountyCovariates:
    fips: str
    population: int
    pct_white: float
    pct_black: float
    pct_hispanic: float
    pct_asian: float
    pct_age65: float
    health_outcomes: tuple  # aligned with HEALTH_OUTCOMES
    state: str
    urbanization_code: int

    @property
    def urbanicity(self):
        return UrbanicityGroup.from_code(self.urbanization_code)


@dataclass(frozen=True, slots=True)
class TeamMetadata:
    team_id: str
    model_type: str
    mobility: str

    def __post_init__(self):
        if self.model_type not in MODEL_TYPES:
            raise InputDataError(
                f"unknown model type {self.model_type!r} for team {self.team_id}"
            )
        if self.mobility not in MOBILITY_LEVELS:
            raise InputDataError(
                f"unknown mobility flag {self.mobility!r} for team {self.team_id}"
            )


@dataclass
class ForecastParseResult:
    records: list
    dropped_non_quantile: int = 0
    dropped_non_county: int = 0
    dropped_quantile_level: int = 0
    excluded_incomplete_groups: int = 0
    repaired_crossings: int = 0
    dropped_crossing_groups: int = 0
    row_errors: list = field(default_factory=list)  # (line_number, message)


def _team_from_filename(path):
    # hub files are named like 2020-07-06-TeamName-Model.csv
    stem = Path(path).stem
    return re.sub(r"^\d{4}-\d{2}-\d{2}-", "", stem)


def parse_forecasts(file, quantile_whitelist=QUANTILE_LEVELS, team_id=None,
                    repair_crossing=True):
    """Parse one hub forecast file into validated quantile records.

    Keeps only ``type == "quantile"`` rows at whitelisted levels with 5-digit
    county locations; state/national codes are dropped and counted. Groups
    (team, fips, week, lookahead) missing any of the seven levels are
    excluded. Quantile crossings (values not non-decreasing in the level) are
    repaired by sorting values within the group, or the group is dropped when
    ``repair_crossing`` is false.

    Returns
    -------
    ForecastParseResult
        ``.records`` holds the surviving :class:`QuantileForecast` rows;
        counters report every drop cause; ``.row_errors`` lists malformed
        rows as (line_number, message) without aborting the parse.
    """
    whitelist = np.sort(np.asarray(quantile_whitelist, dtype=float))
    team = team_id if team_id is not None else _team_from_filename(file)
    try:
        frame = pd.read_csv(file, dtype=str)
    except pd.errors.EmptyDataError:
        return ForecastParseResult(records=[])
    required = ["forecast_date", "target", "target_end_date", "location", "type",
                "quantile", "value"]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise InputDataError(f"forecast file {file} missing columns {missing}")

    result = ForecastParseResult(records=[])
    groups = defaultdict(list)
    for pos, row in enumerate(frame.itertuples(index=False), start=2):
        if row.type != "quantile":
            result.dropped_non_quantile += 1
            continue
        loc = str(row.location).strip()
        if len(loc) != 5 or not loc.isdigit():
            result.dropped_non_county += 1
            continue
        m = _TARGET_RE.match(str(row.target).strip())
        if m is None:
            result.row_errors.append((pos, f"unrecognized target {row.target!r}"))
            continue
        try:
            tau = float(row.quantile)
            value = float(row.value)
            fdate = date.fromisoformat(str(row.forecast_date).strip())
            tdate = date.fromisoformat(str(row.target_end_date).strip())
        except (TypeError, ValueError) as exc:
            result.row_errors.append((pos, str(exc)))
            continue
        if not np.any(np.isclose(tau, whitelist, atol=1e-9)):
            result.dropped_quantile_level += 1
            continue
        lookahead = 7 * int(m.group(1))
        if value < 0:
            result.row_errors.append((pos, f"negative forecast value {value}"))
            continue
        if tdate.weekday() != 5:
            result.row_errors.append((pos, f"target_end_date {tdate} is not a Saturday"))
            continue
        horizon = (tdate - fdate).days
        if not (lookahead - 7 < horizon <= lookahead):
            result.row_errors.append(
                (pos, f"target_end_date {tdate} inconsistent with lookahead {lookahead}"))
            continue
        rec = QuantileForecast(team_id=team, forecast_date=fdate,
                               lookahead_days=lookahead, target_end_date=tdate,
                               fips=loc, quantile=tau, value=value)
        groups[(team, loc, tdate, lookahead)].append(rec)

    n_levels = len(whitelist)
    for key in sorted(groups):
        recs = sorted(groups[key], key=lambda r: r.quantile)
        taus = np.array([r.quantile for r in recs])
        if len(recs) != n_levels or not np.allclose(taus, whitelist, atol=1e-9):
            result.excluded_incomplete_groups += 1
            continue
        values = np.array([r.value for r in recs])
        if np.any(np.diff(values) < 0):
            if not repair_crossing:
                result.dropped_crossing_groups += 1
                continue
            values = np.sort(values)
            result.repaired_crossings += 1
            recs = [QuantileForecast(team_id=r.team_id, forecast_date=r.forecast_date,
                                     lookahead_days=r.lookahead_days,
                                     target_end_date=r.target_end_date, fips=r.fips,
                                     quantile=r.quantile, value=float(v))
                    for r, v in zip(recs, values)]
        result.records.extend(recs)
    return result


def write_forecasts(records, path):
    """Serialize quantile records back to the hub forecast schema."""
    rows = [{
        "forecast_date": r.forecast_date.isoformat(),
        "target": f"{r.lookahead_days // 7} wk ahead inc case",
        "target_end_date": r.target_end_date.isoformat(),
        "location": r.fips,
        "type": "quantile",
        "quantile": r.quantile,
        "value": r.value,
    } for r in records]
    pd.DataFrame(rows, columns=["forecast_date", "target", "target_end_date",
                                "location", "type", "quantile", "value"]).to_csv(
        path, index=False)


@dataclass
class TruthParseResult:
    records: list
    clamped_negative: int = 0
    skipped_unknown_fips: int = 0


def parse_truth(file, known_fips=None):
    """Parse ground truth into weekly incident counts on epi weeks.

    Accepts either a cumulative file (``date,location,value``) or a weekly
    incident file (``week_end,location,incident``). Cumulative series are
    collapsed to the last observation per epi week and differenced; the first
    week (unknown baseline) is dropped and negative increments clamp to zero.
    """
    frame = pd.read_csv(file, dtype={"location": str})
    cols = set(frame.columns)
    result = TruthParseResult(records=[])

    if {"week_end", "location", "incident"} <= cols:
        for row in frame.itertuples(index=False):
            fips = str(row.location).strip()
            if known_fips is not None and fips not in known_fips:
                result.skipped_unknown_fips += 1
                continue
            week = date.fromisoformat(str(row.week_end).strip())
            if week.weekday() != 5:
                raise InputDataError(f"week_end {week} is not a Saturday")
            inc = float(row.incident)
            if inc < 0:
                inc = 0.0
                result.clamped_negative += 1
            result.records.append(GroundTruth(fips=fips, week_end=week, incident_cases=inc))
    elif {"date", "location", "value"} <= cols:
        frame = frame.copy()
        frame["date"] = pd.to_datetime(frame["date"]).dt.date
        frame["location"] = frame["location"].astype(str).str.strip()
        if known_fips is not None:
            unknown = ~frame["location"].isin(known_fips)
            result.skipped_unknown_fips = int(unknown.sum())
            frame = frame[~unknown]
        frame["week_end"] = frame["date"].map(epi_week_end)
        weekly = (frame.sort_values(["location", "date"])
                       .groupby(["location", "week_end"], sort=True)["value"]
                       .last())
        for fips, series in weekly.groupby(level=0):
            cum = series.droplevel(0)
            inc = cum.diff().iloc[1:]  # first week has no baseline
            for week, val in inc.items():
                val = float(val)
                if val < 0:
                    val = 0.0
                    result.clamped_negative += 1
                result.records.append(GroundTruth(fips=fips, week_end=week,
                                                  incident_cases=val))
    else:
        raise InputDataError(
            f"truth file {file} must have columns date,location,value or "
            f"week_end,location,incident; got {sorted(cols)}")
    result.records.sort(key=lambda r: (r.fips, r.week_end))
    return result


def write_truth(records, path):
    rows = [{"week_end": r.week_end.isoformat(), "location": r.fips,
             "incident": r.incident_cases} for r in records]
    pd.DataFrame(rows, columns=["week_end", "location", "incident"]).to_csv(
        path, index=False)


@dataclass
class CovariateParseResult:
    covariates: dict  # fips -> CountyCovariates
    retained: int = 0
    excluded_missing_source: int = 0


def _check_percent(value, fieldname, fips):
    if not (0.0 <= value <= 100.0):
        raise InputDataError(f"{fieldname}={value} outside [0, 100] for fips {fips}")
    return value


def parse_covariates(demo_file, urban_file, health_file):
    """Join the three covariate sources into per-county records.

    Only counties present in all sources are retained; the result reports the
    retained count and how many were dropped by the intersection rule. Any
    percentage outside [0, 100] is a hard error naming the field and county.
    """
    demo = pd.read_csv(demo_file, dtype={"fips": str, "state": str})
    urban = pd.read_csv(urban_file, dtype={"fips": str})
    health = pd.read_csv(health_file, dtype={"fips": str})
    for frame, name, cols in ((demo, "demographics",
                               ["fips", "population", "pct_white", "pct_black",
                                "pct_hispanic", "pct_asian", "pct_age65", "state"]),
                              (urban, "urbanization", ["fips", "code"]),
                              (health, "health", ["fips", *HEALTH_OUTCOMES])):
        missing = [c for c in cols if c not in frame.columns]
        if missing:
            raise InputDataError(f"{name} file missing columns {missing}")

    demo = demo.set_index("fips")
    urban = urban.set_index("fips")
    health = health.set_index("fips")
    all_fips = set(demo.index) | set(urban.index) | set(health.index)
    shared = sorted(set(demo.index) & set(urban.index) & set(health.index))

    covariates = {}
    for fips in shared:
        d = demo.loc[fips]
        pop = int(d["population"])
        if pop <= 0:
            raise InputDataError(f"population must be positive for fips {fips}")
        code = int(urban.loc[fips, "code"])
        UrbanicityGroup.from_code(code)
        h = health.loc[fips]
        outcomes = tuple(_check_percent(float(h[name]), name, fips)
                         for name in HEALTH_OUTCOMES)
        covariates[fips] = CountyCovariates(
            fips=fips,
            population=pop,
            pct_white=_check_percent(float(d["pct_white"]), "pct_white", fips),
            pct_black=_check_percent(float(d["pct_black"]), "pct_black", fips),
            pct_hispanic=_check_percent(float(d["pct_hispanic"]), "pct_hispanic", fips),
            pct_asian=_check_percent(float(d["pct_asian"]), "pct_asian", fips),
            pct_age65=_check_percent(float(d["pct_age65"]), "pct_age65", fips),
            health_outcomes=outcomes,
            state=str(d["state"]).strip(),
            urbanization_code=code,
        )
    return CovariateParseResult(covariates=covariates, retained=len(shared),
                                excluded_missing_source=len(all_fips) - len(shared))


def parse_metadata(file):
    """Parse the team metadata table; every forecast team must appear once."""
    frame = pd.read_csv(file, dtype=str)
    missing = [c for c in ("team_id", "model_type", "mobility") if c not in frame.columns]
    if missing:
        raise InputDataError(f"metadata file missing columns {missing}")
    out = {}
    for row in frame.itertuples(index=False):
        if row.team_id in out:
            raise InputDataError(f"duplicate metadata row for team {row.team_id}")
        out[row.team_id] = TeamMetadata(team_id=row.team_id,
                                        model_type=row.model_type.strip(),
                                        mobility=row.mobility.strip())
    return out


@dataclass(frozen=True, slots=True)
class JoinedGroup:
    """One (team, county, week, lookahead) forecast group with everything
    needed to score it."""

    team_id: str
    fips: str
    week_end: date
    lookahead_days: int
    quantiles: tuple       # the 7 levels, ascending
    values: tuple          # forecast values aligned with quantiles
    truth: float
    covariates: CountyCovariates
    metadata: TeamMetadata
    phase: int


@dataclass
class JoinedPanel:
    rows: list
    drop_counts: Counter

    @property
    def n_input_groups(self):
        return len(self.rows) + sum(self.drop_counts.values())


def join_panel(forecasts, truth, covariates, metadata, phase_config):
    """Merge parsed inputs into scored-panel precursors.

    One row per (team, fips, week_end, lookahead) group carrying all seven
    quantiles, the observed count, county covariates, team metadata, and the
    phase id. Unmatched groups are dropped and counted by cause
    (missing_truth, missing_covariates, missing_metadata, outside_phase_span).
    """
    truth_map = {(t.fips, t.week_end): t.incident_cases for t in truth}
    groups = defaultdict(list)
    for rec in forecasts:
        groups[(rec.team_id, rec.fips, rec.target_end_date, rec.lookahead_days)].append(rec)

    rows = []
    drops = Counter()
    for key in sorted(groups):
        team, fips, week, lookahead = key
        recs = sorted(groups[key], key=lambda r: r.quantile)
        if len(recs) != len(QUANTILE_LEVELS):
            drops["incomplete_group"] += 1
            continue
        if team not in metadata:
            drops["missing_metadata"] += 1
            continue
        if fips not in covariates:
            drops["missing_covariates"] += 1
            continue
        if (fips, week) not in truth_map:
            drops["missing_truth"] += 1
            continue
        try:
            phase = assign_phase(week, phase_config)
        except InputDataError:
            drops["outside_phase_span"] += 1
            continue
        rows.append(JoinedGroup(
            team_id=team, fips=fips, week_end=week, lookahead_days=lookahead,
            quantiles=tuple(r.quantile for r in recs),
            values=tuple(r.value for r in recs),
            truth=truth_map[(fips, week)],
            covariates=covariates[fips],
            metadata=metadata[team],
            phase=phase,
        ))
    return JoinedPanel(rows=rows, drop_counts=drops)
