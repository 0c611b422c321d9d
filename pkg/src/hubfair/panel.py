"""Columnar scored panel: the bridge between joined forecast groups and the
regression design. One row per (team, county, week, lookahead) observation
that survived trimming.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np
import pandas as pd

from .errors import InputDataError
from .ingest import CountyCovariates, TeamMetadata
from .metrics import mean_pbl_batch, normalize, trim_and_transform

PANEL_EXPORT_COLUMNS = ("team_id", "fips", "week_end", "lookahead", "phase",
                        "pbl_norm", "sqrt_pbl")


@dataclass(frozen=True, slots=True)
class PblObservation:
    """Record view of one scored panel row."""

    team_id: str
    fips: str
    week_end: date
    lookahead_days: int
    phase: int
    pbl_norm: float
    sqrt_pbl: float
    covariates: CountyCovariates
    metadata: TeamMetadata


@dataclass
class Panel:
    """Column arrays for the scored analysis dataset.

    All arrays share length ``n``; ``health`` is ``(n, 9)`` aligned with
    :data:`hubfair.ingest.HEALTH_OUTCOMES`.
    """

    team_id: np.ndarray
    fips: np.ndarray
    week_end: np.ndarray
    lookahead: np.ndarray
    phase: np.ndarray
    pbl_norm: np.ndarray
    sqrt_pbl: np.ndarray
    model_type: np.ndarray
    mobility: np.ndarray
    pct_white: np.ndarray
    pct_black: np.ndarray
    pct_hispanic: np.ndarray
    pct_asian: np.ndarray
    pct_age65: np.ndarray
    urbanicity: np.ndarray
    health: np.ndarray
    state: np.ndarray
    population: np.ndarray

    @property
    def n(self):
        return self.team_id.shape[0]

    def to_frame(self):
        """Export view with the stable column header."""
        return pd.DataFrame({
            "team_id": self.team_id,
            "fips": self.fips,
            "week_end": [d.isoformat() for d in self.week_end],
            "lookahead": self.lookahead,
            "phase": self.phase,
            "pbl_norm": self.pbl_norm,
            "sqrt_pbl": self.sqrt_pbl,
        }, columns=list(PANEL_EXPORT_COLUMNS))

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False)


def score_joined(joined_rows, scale_factor=1.0):
    """Population-normalized mean pinball loss for each joined group."""
    if not joined_rows:
        raise InputDataError("no joined rows to score")
    y = np.array([r.truth for r in joined_rows], dtype=float)
    values = np.array([r.values for r in joined_rows], dtype=float)
    taus = np.asarray(joined_rows[0].quantiles, dtype=float)
    pop = np.array([r.covariates.population for r in joined_rows], dtype=float)
    return normalize(mean_pbl_batch(y, values, taus), pop, scale_factor)


def build_panel(joined, scale_factor=1.0, trim_frac=0.0):
    """Score, trim, and square-root transform a joined panel.

    Parameters
    ----------
    joined : JoinedPanel
        Output of :func:`hubfair.ingest.join_panel`.
    scale_factor : float
        Multiplier applied before dividing by county population.
    trim_frac : float
        Upper-tail fraction removed globally from the pooled pbl_norm
        distribution before the square-root transform.

    Returns
    -------
    (Panel, TrimReport)
    """
    rows = joined.rows
    pbl_norm = score_joined(rows, scale_factor)
    trimmed = trim_and_transform(pbl_norm, trim_frac)
    kept = trimmed.kept_indices
    rows_kept = [rows[i] for i in kept]
    cov = [r.covariates for r in rows_kept]
    panel = Panel(
        team_id=np.array([r.team_id for r in rows_kept], dtype=object),
        fips=np.array([r.fips for r in rows_kept], dtype=object),
        week_end=np.array([r.week_end for r in rows_kept], dtype=object),
        lookahead=np.array([r.lookahead_days for r in rows_kept], dtype=int),
        phase=np.array([r.phase for r in rows_kept], dtype=int),
        pbl_norm=pbl_norm[kept],
        sqrt_pbl=trimmed.sqrt_values,
        model_type=np.array([r.metadata.model_type for r in rows_kept], dtype=object),
        mobility=np.array([r.metadata.mobility for r in rows_kept], dtype=object),
        pct_white=np.array([c.pct_white for c in cov], dtype=float),
        pct_black=np.array([c.pct_black for c in cov], dtype=float),
        pct_hispanic=np.array([c.pct_hispanic for c in cov], dtype=float),
        pct_asian=np.array([c.pct_asian for c in cov], dtype=float),
        pct_age65=np.array([c.pct_age65 for c in cov], dtype=float),
        urbanicity=np.array([c.urbanicity.value for c in cov], dtype=object),
        health=np.array([c.health_outcomes for c in cov], dtype=float),
        state=np.array([c.state for c in cov], dtype=object),
        population=np.array([c.population for c in cov], dtype=int),
    )
    return panel, trimmed.report


def panel_from_arrays(*, team_id, fips, week_end, lookahead, phase, pbl_norm,
                      model_type, mobility, pct_white, pct_black, pct_hispanic,
                      pct_asian, pct_age65, urbanicity, health, state, population,
                      trim_frac=0.0):
    """Fast path used by the synthetic generator: arrays in, trimmed panel out."""
    trimmed = trim_and_transform(np.asarray(pbl_norm, dtype=float), trim_frac)
    k = trimmed.kept_indices
    panel = Panel(
        team_id=np.asarray(team_id, dtype=object)[k],
        fips=np.asarray(fips, dtype=object)[k],
        week_end=np.asarray(week_end, dtype=object)[k],
        lookahead=np.asarray(lookahead, dtype=int)[k],
        phase=np.asarray(phase, dtype=int)[k],
        pbl_norm=np.asarray(pbl_norm, dtype=float)[k],
        sqrt_pbl=trimmed.sqrt_values,
        model_type=np.asarray(model_type, dtype=object)[k],
        mobility=np.asarray(mobility, dtype=object)[k],
        pct_white=np.asarray(pct_white, dtype=float)[k],
        pct_black=np.asarray(pct_black, dtype=float)[k],
        pct_hispanic=np.asarray(pct_hispanic, dtype=float)[k],
        pct_asian=np.asarray(pct_asian, dtype=float)[k],
        pct_age65=np.asarray(pct_age65, dtype=float)[k],
        urbanicity=np.asarray(urbanicity, dtype=object)[k],
        health=np.asarray(health, dtype=float)[k],
        state=np.asarray(state, dtype=object)[k],
        population=np.asarray(population, dtype=int)[k],
    )
    return panel, trimmed.report


def iter_observations(panel):
    """Yield :class:`PblObservation` records (record view of the panel)."""
    for i in range(panel.n):
        cov = CountyCovariates(
            fips=panel.fips[i], population=int(panel.population[i]),
            pct_white=float(panel.pct_white[i]), pct_black=float(panel.pct_black[i]),
            pct_hispanic=float(panel.pct_hispanic[i]), pct_asian=float(panel.pct_asian[i]),
            pct_age65=float(panel.pct_age65[i]),
            health_outcomes=tuple(panel.health[i]),
            state=panel.state[i],
            urbanization_code={"LM": 1, "SMM": 3, "MC": 5}[panel.urbanicity[i]],
        )
        meta = TeamMetadata(team_id=panel.team_id[i], model_type=panel.model_type[i],
                            mobility=panel.mobility[i])
        yield PblObservation(
            team_id=panel.team_id[i], fips=panel.fips[i], week_end=panel.week_end[i],
            lookahead_days=int(panel.lookahead[i]), phase=int(panel.phase[i]),
            pbl_norm=float(panel.pbl_norm[i]), sqrt_pbl=float(panel.sqrt_pbl[i]),
            covariates=cov, metadata=meta)
