"""Multicollinearity screening via generalized variance inflation factors and
post-fit influence diagnostics.

GVIF for a term group g is ``det(R_g) * det(R_-g) / det(R)`` on the
correlation matrix R of the centered, scaled non-intercept columns; the
df-adjusted form ``GVIF^(1/(2 df))`` is compared against the screening
threshold. Terms covering the sensitive attributes and the model-data
characteristics are protected and never removed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.linalg

from .errors import AnalysisError, CollinearityError, InputDataError


@dataclass(frozen=True)
class GvifEntry:
    term: str
    df: int
    gvif: float
    adjusted: float
    removable: bool


@dataclass(frozen=True)
class GvifReport:
    entries: tuple

    def entry(self, term):
        for e in self.entries:
            if e.term == term:
                return e
        raise InputDataError(f"no GVIF entry for term {term!r}")

    def to_frame(self, removed=()):
        removed = set(removed)
        return pd.DataFrame([{
            "term": e.term, "df": e.df, "gvif": e.gvif,
            "adjusted": e.adjusted, "removed": e.term in removed,
        } for e in self.entries])


def _standardized_columns(design):
    """Center and scale the non-intercept, non-interaction columns; returns
    (Z, labels, terms) where ``terms`` maps each term to its positions in Z.

    Product (interaction) terms are excluded: they are structurally
    correlated with their parent main effects, which says nothing about data
    quality, so collinearity is screened on the additive structure only.
    """
    cols, labels = [], []
    terms = {}
    pos = 0
    for term, idx in design.term_groups.items():
        if ":" in term:
            continue
        positions = []
        for i in idx:
            col = design.X[:, i]
            sd = col.std(ddof=0)
            if sd == 0:
                raise CollinearityError(
                    f"column {design.column_labels[i]!r} is constant",
                    columns=[design.column_labels[i]])
            cols.append((col - col.mean()) / sd)
            labels.append(design.column_labels[i])
            positions.append(pos)
            pos += 1
        terms[term] = tuple(positions)
    return np.column_stack(cols), labels, terms


def _near_dependent(Z, labels):
    """Name the columns a pivoted QR flags as (near) linearly dependent."""
    _, R, piv = scipy.linalg.qr(Z, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag.max() * max(Z.shape) * np.finfo(float).eps if diag.size else 0.0
    rank = int((diag > tol).sum())
    return [labels[i] for i in sorted(piv[rank:])]


def _logdet_corr(R, idx):
    sub = R[np.ix_(idx, idx)]
    sign, logdet = np.linalg.slogdet(sub)
    if sign <= 0:
        raise CollinearityError("singular correlation submatrix")
    return logdet


def gvif(design):
    """Generalized variance inflation factors per term group.

    Requires at least two non-intercept term groups so each term has
    something to be inflated against.

    Raises
    ------
    CollinearityError
        If the predictor correlation matrix is singular; the error lists the
        near-dependent columns.
    """
    term_names = [t for t in design.term_groups if ":" not in t]
    if len(term_names) < 2:
        raise InputDataError("GVIF needs at least two non-intercept terms")
    Z, labels, terms = _standardized_columns(design)
    R = np.corrcoef(Z, rowvar=False)
    sign, logdet_R = np.linalg.slogdet(R)
    if sign <= 0 or not np.isfinite(logdet_R):
        raise CollinearityError(
            "correlation matrix of the predictors is singular; near-dependent "
            f"columns: {_near_dependent(Z, labels)}",
            columns=_near_dependent(Z, labels))

    protected = set(design.protected_terms)
    all_pos = np.arange(Z.shape[1])
    entries = []
    for term in term_names:
        idx = list(terms[term])
        rest = [i for i in all_pos if i not in idx]
        log_g = _logdet_corr(R, idx)
        log_rest = _logdet_corr(R, rest) if rest else 0.0
        val = float(np.exp(log_g + log_rest - logdet_R))
        df = len(idx)
        entries.append(GvifEntry(term=term, df=df, gvif=val,
                                 adjusted=float(val ** (1.0 / (2.0 * df))),
                                 removable=term not in protected))
    return GvifReport(entries=tuple(entries))


@dataclass(frozen=True)
class RemovalRecord:
    step: int
    term: str
    adjusted_gvif: float


def screen_collinearity(design, threshold=2.0, protected_terms=None):
    """Iteratively drop the worst removable term until all adjusted GVIFs pass.

    While any removable term's adjusted GVIF is at or above ``threshold``,
    the removable term with the largest adjusted GVIF is dropped (ties go to
    the term appearing later in column order) and GVIFs are recomputed. If a
    protected term still sits at or above the threshold at the fixpoint, the
    screen fails hard: the analysis must not proceed on inflated variables
    of interest.

    Returns
    -------
    (DesignMatrix, list[RemovalRecord], GvifReport)
        The reduced design, the removal log, and the final report.
    """
    if protected_terms is None:
        protected_terms = design.protected_terms
    unknown = set(protected_terms) - set(design.term_groups)
    if unknown:
        raise InputDataError(f"protected terms not in design: {sorted(unknown)}")

    current = design
    log = []
    step = 0
    while True:
        report = gvif(current)
        removable = [e for e in report.entries
                     if e.term not in protected_terms and e.adjusted >= threshold]
        if not removable:
            offenders = [e for e in report.entries
                         if e.term in protected_terms and e.adjusted >= threshold]
            if offenders:
                worst = max(offenders, key=lambda e: e.adjusted)
                raise CollinearityError(
                    f"protected term {worst.term!r} has adjusted GVIF "
                    f"{worst.adjusted:.3f} >= {threshold} after screening; "
                    "refusing to fit on inflated variables of interest",
                    columns=[worst.term])
            return current, log, report
        worst_adj = max(e.adjusted for e in removable)
        # later in column order wins ties
        order = {t: min(current.term_groups[t]) for t in current.term_groups}
        victim = max((e for e in removable if e.adjusted == worst_adj),
                     key=lambda e: order[e.term])
        step += 1
        log.append(RemovalRecord(step=step, term=victim.term,
                                 adjusted_gvif=victim.adjusted))
        current = current.drop_terms([victim.term])
        if len(current.term_groups) < 2:
            raise CollinearityError(
                "screening removed too many terms; fewer than two remain")


@dataclass(frozen=True)
class FitDiagnostics:
    residual_quantiles: dict      # prob -> response-scale residual quantile
    leverage: np.ndarray
    cooks_distance: np.ndarray
    max_cooks: float
    max_cooks_index: int


def fit_diagnostics(fit, design):
    """Leverage and Cook's distance from the weighted hat matrix.

    Leverage is the diagonal of the hat matrix of the final weighted IRLS
    regression. Cook's distance uses the working residuals of that weighted
    regression (for the Gaussian family with identity or log link these
    reduce to the response residuals ``y - mu``):

        d_i = r_i^2 h_i / (p * dispersion * (1 - h_i)^2)
    """
    if not fit.converged:
        raise AnalysisError("diagnostics require a converged fit")
    X = np.asarray(design.X, dtype=float)
    y = np.asarray(design.y, dtype=float)
    sw = np.sqrt(fit.weights)
    Q, _ = np.linalg.qr(sw[:, None] * X)
    h = np.einsum("ij,ij->i", Q, Q)
    resid = y - fit.mu
    denom = fit.p * fit.dispersion * (1.0 - h) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        cooks = np.where(denom > 0, resid ** 2 * h / denom, np.inf)
    probs = (0.0, 0.25, 0.5, 0.75, 1.0)
    quantiles = {p: float(q) for p, q in zip(probs, np.quantile(resid, probs))}
    imax = int(np.argmax(cooks))
    return FitDiagnostics(residual_quantiles=quantiles, leverage=h,
                          cooks_distance=cooks, max_cooks=float(cooks[imax]),
                          max_cooks_index=imax)
