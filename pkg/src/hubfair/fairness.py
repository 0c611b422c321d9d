"""Fairness outputs: relative effects with percent-difference columns,
accuracy-equality-ratio (AER) distributions grouped by plurality race or
urbanicity, and nutritional cards bundled as a single JSON document for the
dashboard.

An AER cell compares mean normalized pinball loss between a protected group's
counties and the unprotected reference group's counties within one
(phase, lookahead) stratum; values above 1 mean higher error for the
protected group. Card numbers are pooled from the cells they summarize, so
every card is recomputable from the bundle's raw cell data.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import InputDataError, UndefinedRatioError
from .design import hypothesis_vector
from .glm import Z95, wald_linear_hypothesis

RACE_GROUP_ORDER = ("White", "Black", "Hispanic", "Asian")
PROTECTED_RACE_GROUPS = ("Black", "Hispanic", "Asian")
PROTECTED_URBANICITY_GROUPS = ("SMM", "MC")


@dataclass(frozen=True)
class RelativeEffect:
    """Multiplicative error difference of one sensitive term at one level of
    an interacting characteristic, against the sensitive reference group."""

    sensitive_term: str
    characteristic: str
    level: object
    is_reference_level: bool
    exp_combined: float
    pct_diff: float
    se: float
    z: float
    p_value: float
    significant: bool

    def to_dict(self, model=None):
        out = {
            "sensitive": self.sensitive_term,
            "characteristic": self.characteristic,
            "level": self.level,
            "reference_level": self.is_reference_level,
            "exp_combined": self.exp_combined,
            "pct_diff": self.pct_diff,
            "se": self.se,
            "z": self.z,
            "p_value": self.p_value,
            "significant": self.significant,
        }
        if model is not None:
            out = {"model": model, **out}
        return out


def relative_effects(fit, design, alpha=0.05):
    """Relative effects e^(beta + delta) for every sensitive term and every
    level (reference included) of the design's interacting characteristic.

    The percent difference is ``(e^(beta+delta) - 1) * 100`` so that a
    combined effect of 1.246 reads as +24.6% higher error than the sensitive
    reference group.
    """
    spec = design.spec
    if spec is None or spec.interaction_with is None:
        name = spec.name if spec else "?"
        raise InputDataError(
            f"design {name} has no interaction block; fit one of the "
            "interaction ModelSpecs (GLM-1a..d, GLM-2a..d)")
    factor = design.factors[spec.interaction_with]
    effects = []
    for sens in design.sensitive_labels:
        for level in factor.levels:
            c = hypothesis_vector(design, sens, factor.name, level)
            wald = wald_linear_hypothesis(fit, c)
            effects.append(RelativeEffect(
                sensitive_term=sens,
                characteristic=factor.name,
                level=level,
                is_reference_level=(level == factor.reference),
                exp_combined=wald.exp_estimate,
                pct_diff=(wald.exp_estimate - 1.0) * 100.0,
                se=wald.se,
                z=wald.z,
                p_value=wald.p_value,
                significant=wald.p_value < alpha,
            ))
    return effects


def plurality_group(covariates):
    """Largest racial/ethnic share in the county.

    Ties go to the first group in the fixed order White, Black, Hispanic,
    Asian.
    """
    shares = (covariates.pct_white, covariates.pct_black,
              covariates.pct_hispanic, covariates.pct_asian)
    if all(s == 0 for s in shares):
        raise InputDataError(
            f"all race shares are zero for fips {covariates.fips}")
    return RACE_GROUP_ORDER[int(np.argmax(shares))]


def _plurality_labels(panel):
    shares = np.column_stack([panel.pct_white, panel.pct_black,
                              panel.pct_hispanic, panel.pct_asian])
    if np.any(shares.max(axis=1) == 0):
        raise InputDataError("some rows have all race shares zero")
    idx = shares.argmax(axis=1)
    return np.array(RACE_GROUP_ORDER, dtype=object)[idx]


def aer(pbl_protected, pbl_unprotected):
    """Accuracy Equality Ratio: mean protected error over mean unprotected."""
    prot = np.asarray(pbl_protected, dtype=float)
    unprot = np.asarray(pbl_unprotected, dtype=float)
    if prot.size == 0 or unprot.size == 0:
        raise InputDataError("AER needs non-empty protected and unprotected groups")
    denom = float(unprot.mean())
    if denom == 0.0:
        raise UndefinedRatioError("unprotected group has zero mean error")
    return float(prot.mean()) / denom


def config_hash(config_obj):
    """Stable short hash of a JSON-serializable run configuration."""
    canon = json.dumps(config_obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ViewConfig:
    """Which protected grouping the bundle is keyed by."""

    group_by: str = "race"  # "race" | "urbanicity"

    def __post_init__(self):
        if self.group_by not in ("race", "urbanicity"):
            raise InputDataError(f"group_by must be race or urbanicity, got {self.group_by!r}")

    @property
    def protected_groups(self):
        return (PROTECTED_RACE_GROUPS if self.group_by == "race"
                else PROTECTED_URBANICITY_GROUPS)

    @property
    def unprotected(self):
        return "White" if self.group_by == "race" else "LM"


def _group_stats(values):
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = float(values.mean()) if n else 0.0
    var = float(values.var(ddof=1)) if n > 1 else 0.0
    return n, mean, var


def _pool_cells(cells):
    """Pool (n, mean, var) triples into overall (n, mean, var) per side."""
    out = {}
    for side in ("protected", "unprotected"):
        ns = np.array([c[f"n_{side}"] for c in cells], dtype=float)
        means = np.array([c[f"mean_{side}"] for c in cells], dtype=float)
        varis = np.array([c[f"var_{side}"] for c in cells], dtype=float)
        n = ns.sum()
        if n == 0:
            return None
        mean = float((ns * means).sum() / n)
        ss = ((ns - 1).clip(min=0) * varis + ns * (means - mean) ** 2).sum()
        var = float(ss / (n - 1)) if n > 1 else 0.0
        out[side] = (int(n), mean, var)
    return out


def _card_from_cells(team_rows_mask, panel, cells, group, phase_sel, look_sel,
                     team_id, view):
    selected = [c for c in cells
                if c["group"] == group
                and (phase_sel == "all" or c["phase"] == phase_sel)
                and (look_sel == "all" or c["lookahead"] == look_sel)
                and c["aer"] is not None]
    if not selected:
        return None
    pooled = _pool_cells(selected)
    if pooled is None or pooled["unprotected"][1] == 0.0:
        return None
    n_p, m_p, v_p = pooled["protected"]
    n_u, m_u, v_u = pooled["unprotected"]
    diff = m_p - m_u
    se = float(np.sqrt(v_p / n_p + v_u / n_u)) if n_p and n_u else 0.0
    aers = np.array([c["aer"] for c in selected], dtype=float)

    # coverage comes from the raw rows of the view, not from cells
    in_view = team_rows_mask.copy()
    if phase_sel != "all":
        in_view &= panel.phase == phase_sel
    if look_sel != "all":
        in_view &= panel.lookahead == look_sel
    group_lbl = (_plurality_labels(panel) if view.group_by == "race"
                 else panel.urbanicity)
    in_groups = (group_lbl == group) | (group_lbl == view.unprotected)
    rows = in_view & in_groups
    county_count = int(np.unique(panel.fips[rows]).size)
    prediction_count = int(rows.sum())

    return {
        "view": {"group": group, "phase": phase_sel, "lookahead": look_sel},
        "model_info": {
            "team": team_id,
            "variables_analyzed": f"{view.group_by}: {group} vs {view.unprotected}",
        },
        "mean_difference": {
            "value": diff,
            "lower": diff - Z95 * se,
            "upper": diff + Z95 * se,
        },
        "aer_values": {
            "min": float(aers.min()),
            "max": float(aers.max()),
            "median": float(np.median(aers)),
            "this_view": m_p / m_u,
        },
        "coverage": {
            "county_count": county_count,
            "prediction_count": prediction_count,
        },
    }


def build_bundle(panel, view=ViewConfig(), relative_effect_rows=(),
                 run_manifest=None):
    """Assemble the audit bundle consumed by the dashboard.

    Per team, an AER cell is computed for every (protected group, phase,
    lookahead) combination; cells whose protected or unprotected side is
    empty (or whose unprotected mean is zero) are marked absent with a null
    AER rather than zero. Cards pool the cells for every phase/lookahead
    selection the dashboard offers. All orderings are deterministic.
    """
    group_labels = (_plurality_labels(panel) if view.group_by == "race"
                    else panel.urbanicity)
    phases = sorted(int(p) for p in np.unique(panel.phase))
    lookaheads = sorted(int(l) for l in np.unique(panel.lookahead))
    teams = sorted(set(panel.team_id))

    bundle_teams = []
    for team in teams:
        tmask = panel.team_id == team
        meta_idx = int(np.flatnonzero(tmask)[0])
        cells = []
        for group in view.protected_groups:
            pmask = tmask & (group_labels == group)
            umask = tmask & (group_labels == view.unprotected)
            for phase in phases:
                for look in lookaheads:
                    sel = (panel.phase == phase) & (panel.lookahead == look)
                    prot = panel.pbl_norm[pmask & sel]
                    unprot = panel.pbl_norm[umask & sel]
                    n_p, m_p, v_p = _group_stats(prot)
                    n_u, m_u, v_u = _group_stats(unprot)
                    value = (m_p / m_u) if (n_p and n_u and m_u > 0) else None
                    cells.append({
                        "group": group, "phase": phase, "lookahead": look,
                        "aer": value,
                        "n_protected": n_p, "n_unprotected": n_u,
                        "mean_protected": m_p, "mean_unprotected": m_u,
                        "var_protected": v_p, "var_unprotected": v_u,
                        "n_counties": int(np.unique(
                            panel.fips[(pmask | umask) & sel]).size),
                    })
        present = [c["aer"] for c in cells if c["aer"] is not None]
        median_aer = float(np.median(present)) if present else None

        cards = []
        for group in view.protected_groups:
            for phase_sel in ["all", *phases]:
                for look_sel in ["all", *lookaheads]:
                    card = _card_from_cells(tmask, panel, cells, group,
                                            phase_sel, look_sel, team, view)
                    if card is not None:
                        cards.append(card)

        bundle_teams.append({
            "team_id": team,
            "model_type": panel.model_type[meta_idx],
            "mobility": panel.mobility[meta_idx],
            "cells": cells,
            "median_aer": median_aer,
            "cards": cards,
        })

    run = {"config_hash": "", "n_obs": int(panel.n), "trimmed": {}}
    if run_manifest:
        run.update(run_manifest)
    return {
        "run": run,
        "group_by": view.group_by,
        "unprotected": view.unprotected,
        "groups": list(view.protected_groups),
        "phases": phases,
        "lookaheads": lookaheads,
        "teams": bundle_teams,
        "relative_effects": list(relative_effect_rows),
    }


def bundle_to_json(bundle):
    """Deterministic serialization: identical bundles give identical bytes."""
    return json.dumps(bundle, indent=2, sort_keys=True, allow_nan=False)


def save_bundle(bundle, path):
    with open(path, "w") as fh:
        fh.write(bundle_to_json(bundle))
        fh.write("\n")


def audit_bundle_consistency(bundle, tol=1e-9):
    """Recompute every card's mean difference and AER summaries from the raw
    cells; returns the maximum absolute discrepancy found.

    Raises
    ------
    AnalysisError via InputDataError if a card references cells that cannot
    reproduce it.
    """
    worst = 0.0
    for team in bundle["teams"]:
        cells = team["cells"]
        for card in team["cards"]:
            v = card["view"]
            selected = [c for c in cells
                        if c["group"] == v["group"]
                        and (v["phase"] == "all" or c["phase"] == v["phase"])
                        and (v["lookahead"] == "all" or c["lookahead"] == v["lookahead"])
                        and c["aer"] is not None]
            if not selected:
                raise InputDataError(
                    f"card {v} of team {team['team_id']} has no backing cells")
            pooled = _pool_cells(selected)
            n_p, m_p, v_p = pooled["protected"]
            n_u, m_u, v_u = pooled["unprotected"]
            diff = m_p - m_u
            se = float(np.sqrt(v_p / n_p + v_u / n_u))
            aers = np.array([c["aer"] for c in selected], dtype=float)
            checks = (
                (card["mean_difference"]["value"], diff),
                (card["mean_difference"]["lower"], diff - Z95 * se),
                (card["mean_difference"]["upper"], diff + Z95 * se),
                (card["aer_values"]["min"], float(aers.min())),
                (card["aer_values"]["max"], float(aers.max())),
                (card["aer_values"]["median"], float(np.median(aers))),
                (card["aer_values"]["this_view"], m_p / m_u),
            )
            worst = max(worst, max(abs(a - b) for a, b in checks))
    if worst > tol:
        raise InputDataError(f"bundle self-consistency audit failed: {worst} > {tol}")
    return worst
