"""Deterministic synthetic-data generator with planted disparity effects.

Every observation's expected square-root error is ``exp(x . beta_planted)``.
Quantile forecasts are reverse-engineered so the scoring pipeline reproduces
that target exactly: all seven quantile values sit a constant offset ``d``
above the truth, which makes the mean pinball loss ``d / 2`` because the
seven retained quantile levels average to one half. Optionally a fixed
fraction of rows is inflated far above the clean range so a matching
upper-tail trim removes exactly those rows downstream.

Everything is reproducible from the seed; the same config writes
byte-identical files.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import InputDataError
from .ingest import (HEALTH_OUTCOMES, GroundTruth, QuantileForecast, TeamMetadata,
                     write_forecasts, write_truth)
from .metrics import QUANTILE_LEVELS, mean_pbl_batch, normalize
from .panel import panel_from_arrays
from .phases import DEFAULT_PHASES, assign_phase

STATE_POOL = ("CA", "GA", "MD", "NY", "TX", "WA", "IL", "FL", "OH", "PA")


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_counties: int = 300
    n_weeks: int = 40
    teams: tuple = (
        TeamMetadata(team_id="alpha", model_type="Compartmental", mobility="No"),
        TeamMetadata(team_id="bravo", model_type="Statistical", mobility="No"),
    )
    lookaheads: tuple = (7, 14, 21, 28)
    start_week: date = date(2020, 7, 11)  # a Saturday inside the default phase span
    #: expected sqrt error when every covariate is zero / at reference
    base_sqrt_pbl: float = 1.0
    #: design-column label -> multiplicative effect on expected sqrt error
    planted_effects: tuple = ()
    noise_sd: float = 0.15
    #: fraction of rows inflated above the clean range (pairs with trimming)
    outlier_frac: float = 0.0
    outlier_scale: float = 3.0
    #: Dirichlet concentration for (white, black, hispanic, asian, other) shares
    race_alpha: tuple = (40.0, 4.0, 4.0, 1.0, 4.0)
    n_states: int = 4
    population_range: tuple = (20_000, 800_000)
    cases_range: tuple = (50, 500)
    age65_range: tuple = (8.0, 25.0)
    health_range: tuple = (5.0, 40.0)
    scale_factor: float = 100_000.0

    def __post_init__(self):
        if self.n_counties < 50:
            raise InputDataError("n_counties must be at least 50 for fitting headroom")
        if any(eff <= 0 for _, eff in self.planted_effects):
            raise InputDataError("planted effects must be positive multipliers")
        if not (0.0 <= self.outlier_frac < 0.5):
            raise InputDataError("outlier_frac must lie in [0, 0.5)")
        if self.start_week.weekday() != 5:
            raise InputDataError("start_week must be a Saturday")

    @property
    def effects(self):
        return dict(self.planted_effects)


@dataclass
class SynthData:
    """In-memory generated corpus plus file emitters."""

    config: SynthConfig
    counties: dict           # column arrays keyed by field name
    weeks: list              # week_end dates
    truth_cases: np.ndarray  # (n_counties, n_weeks)
    # per observation row:
    team_id: np.ndarray
    county_idx: np.ndarray
    week_idx: np.ndarray
    lookahead: np.ndarray
    phase: np.ndarray
    target_sqrt: np.ndarray
    forecast_values: np.ndarray  # (n, 7)

    @property
    def n(self):
        return self.team_id.shape[0]

    def truth_for_rows(self):
        return self.truth_cases[self.county_idx, self.week_idx].astype(float)

    def to_panel(self, trim_frac=0.0):
        """Score through the real metrics pipeline and assemble a panel."""
        c = self.counties
        y = self.truth_for_rows()
        pop = c["population"][self.county_idx].astype(float)
        pbl = normalize(mean_pbl_batch(y, self.forecast_values), pop,
                        self.config.scale_factor)
        week_end = np.array([self.weeks[i] for i in self.week_idx], dtype=object)
        return panel_from_arrays(
            team_id=self.team_id,
            fips=c["fips"][self.county_idx],
            week_end=week_end,
            lookahead=self.lookahead,
            phase=self.phase,
            pbl_norm=pbl,
            model_type=np.array([self._meta(t).model_type for t in self.team_id],
                                dtype=object),
            mobility=np.array([self._meta(t).mobility for t in self.team_id],
                              dtype=object),
            pct_white=c["pct_white"][self.county_idx],
            pct_black=c["pct_black"][self.county_idx],
            pct_hispanic=c["pct_hispanic"][self.county_idx],
            pct_asian=c["pct_asian"][self.county_idx],
            pct_age65=c["pct_age65"][self.county_idx],
            urbanicity=c["urbanicity"][self.county_idx],
            health=c["health"][self.county_idx],
            state=c["state"][self.county_idx],
            population=c["population"][self.county_idx],
            trim_frac=trim_frac,
        )

    def _meta(self, team_id):
        for t in self.config.teams:
            if t.team_id == team_id:
                return t
        raise InputDataError(f"no metadata for team {team_id}")

    def write(self, out_dir):
        """Emit the ingest module's file schemas; returns a path map."""
        import pandas as pd
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        c = self.counties
        paths = {}

        forecast_dir = out / "forecasts"
        forecast_dir.mkdir(exist_ok=True)
        forecast_paths = []
        for team in self.config.teams:
            mask = self.team_id == team.team_id
            records = []
            for i in np.flatnonzero(mask):
                week = self.weeks[self.week_idx[i]]
                look = int(self.lookahead[i])
                fdate = week - timedelta(days=look - 2)
                for tau, value in zip(QUANTILE_LEVELS, self.forecast_values[i]):
                    records.append(QuantileForecast(
                        team_id=team.team_id, forecast_date=fdate,
                        lookahead_days=look, target_end_date=week,
                        fips=c["fips"][self.county_idx[i]], quantile=tau,
                        value=float(value)))
            path = forecast_dir / f"{team.team_id}.csv"
            write_forecasts(records, path)
            forecast_paths.append(path)
        paths["forecasts"] = forecast_paths

        truth_records = [
            GroundTruth(fips=c["fips"][ci], week_end=self.weeks[wi],
                        incident_cases=float(self.truth_cases[ci, wi]))
            for ci in range(len(c["fips"])) for wi in range(len(self.weeks))
        ]
        paths["truth"] = out / "truth.csv"
        write_truth(truth_records, paths["truth"])

        demo = pd.DataFrame({
            "fips": c["fips"], "population": c["population"],
            "pct_white": c["pct_white"], "pct_black": c["pct_black"],
            "pct_hispanic": c["pct_hispanic"], "pct_asian": c["pct_asian"],
            "pct_age65": c["pct_age65"], "state": c["state"],
        })
        paths["demographics"] = out / "demographics.csv"
        demo.to_csv(paths["demographics"], index=False)

        urban = pd.DataFrame({"fips": c["fips"], "code": c["urbanization_code"]})
        paths["urbanization"] = out / "urbanization.csv"
        urban.to_csv(paths["urbanization"], index=False)

        health = pd.DataFrame({"fips": c["fips"]})
        for j, name in enumerate(HEALTH_OUTCOMES):
            health[name] = c["health"][:, j]
        paths["health"] = out / "health.csv"
        health.to_csv(paths["health"], index=False)

        meta = pd.DataFrame([{"team_id": t.team_id, "model_type": t.model_type,
                              "mobility": t.mobility} for t in self.config.teams])
        paths["metadata"] = out / "metadata.csv"
        meta.to_csv(paths["metadata"], index=False)
        return paths


def _planted_column(label, config, counties, county_idx, lookahead, phase, team_id):
    """Resolve a design-column label to its numeric value per row."""
    c = counties
    if label in ("pct_black", "pct_hispanic", "pct_asian", "pct_white", "pct_age65"):
        return c[label][county_idx]
    if label in ("urb_smm", "urb_mc"):
        target = "SMM" if label == "urb_smm" else "MC"
        return (c["urbanicity"][county_idx] == target).astype(float)
    if label.startswith("lookahead"):
        return (lookahead == int(label[len("lookahead"):])).astype(float)
    if label.startswith("phase"):
        return (phase == int(label[len("phase"):])).astype(float)
    if label.startswith("model_type"):
        level = label[len("model_type"):]
        types = {t.team_id: t.model_type for t in config.teams}
        return np.array([types[t] == level for t in team_id], dtype=float)
    if label.startswith("mobility"):
        level = label[len("mobility"):]
        mob = {t.team_id: t.mobility for t in config.teams}
        return np.array([mob[t] == level for t in team_id], dtype=float)
    if label in HEALTH_OUTCOMES:
        return c["health"][county_idx][:, HEALTH_OUTCOMES.index(label)]
    if label.startswith("state"):
        return (c["state"][county_idx] == label[len("state"):]).astype(float)
    raise InputDataError(f"planted effect label {label!r} matches no design column")


def generate(config):
    """Generate a corpus whose scored pipeline recovers the planted effects.

    Raises
    ------
    InputDataError
        If the effect/noise combination yields a non-positive square-root
        error target for any observation.
    """
    rng = np.random.default_rng(config.seed)
    nc, nw = config.n_counties, config.n_weeks

    shares = rng.dirichlet(config.race_alpha, size=nc) * 100.0
    states = np.array([STATE_POOL[i % config.n_states] for i in range(nc)],
                      dtype=object)
    codes = rng.integers(1, 7, size=nc)
    counties = {
        "fips": np.array([f"{i + 1:05d}" for i in range(nc)], dtype=object),
        "population": rng.integers(config.population_range[0],
                                   config.population_range[1], size=nc),
        "pct_white": shares[:, 0],
        "pct_black": shares[:, 1],
        "pct_hispanic": shares[:, 2],
        "pct_asian": shares[:, 3],
        "pct_age65": rng.uniform(*config.age65_range, size=nc),
        "health": rng.uniform(*config.health_range, size=(nc, len(HEALTH_OUTCOMES))),
        "state": states,
        "urbanization_code": codes,
        "urbanicity": np.array(["LM" if k <= 2 else "SMM" if k <= 4 else "MC"
                                for k in codes], dtype=object),
    }

    weeks = [config.start_week + timedelta(days=7 * i) for i in range(nw)]
    phase_of_week = np.array([assign_phase(w, DEFAULT_PHASES) for w in weeks])
    truth_cases = rng.integers(config.cases_range[0], config.cases_range[1],
                               size=(nc, nw)).astype(float)

    team_ids = [t.team_id for t in config.teams]
    team_col, county_col, week_col, look_col = [], [], [], []
    for team in team_ids:
        for ci in range(nc):
            for wi in range(nw):
                for look in config.lookaheads:
                    team_col.append(team)
                    county_col.append(ci)
                    week_col.append(wi)
                    look_col.append(look)
    team_id = np.array(team_col, dtype=object)
    county_idx = np.array(county_col, dtype=int)
    week_idx = np.array(week_col, dtype=int)
    lookahead = np.array(look_col, dtype=int)
    phase = phase_of_week[week_idx]
    n = team_id.shape[0]

    eta = np.full(n, np.log(config.base_sqrt_pbl))
    for label, effect in config.planted_effects:
        eta += np.log(effect) * _planted_column(label, config, counties, county_idx,
                                                lookahead, phase, team_id)
    target = np.exp(eta)
    if config.noise_sd > 0:
        target = target + rng.normal(0.0, config.noise_sd, size=n)
    if np.any(target <= 0):
        raise InputDataError(
            "planted effects and noise_sd produce non-positive error targets; "
            "reduce noise_sd or raise base_sqrt_pbl")

    if config.outlier_frac > 0:
        k = int(np.floor(n * config.outlier_frac))
        if k:
            idx = rng.choice(n, size=k, replace=False)
            top = target.max()
            target[idx] = top * (config.outlier_scale + rng.uniform(0.0, 1.0, size=k))

    # reverse-engineer the uniform over-forecast offset: mean PBL must equal
    # target^2 * population / scale, and a constant offset d gives mean d/2
    pop = counties["population"][county_idx].astype(float)
    mean_pbl_target = target ** 2 * pop / config.scale_factor
    d = 2.0 * mean_pbl_target
    y = truth_cases[county_idx, week_idx]
    forecast_values = y[:, None] + d[:, None] * np.ones((1, len(QUANTILE_LEVELS)))

    return SynthData(config=config, counties=counties, weeks=weeks,
                     truth_cases=truth_cases, team_id=team_id,
                     county_idx=county_idx, week_idx=week_idx,
                     lookahead=lookahead, phase=phase, target_sqrt=target,
                     forecast_values=forecast_values)
