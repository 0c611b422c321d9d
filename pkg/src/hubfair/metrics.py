"""Forecast-error scoring: pinball loss, quantile averaging, population
normalization, tail trimming, and the square-root response transform.

All functions accept scalars or NumPy arrays and broadcast elementwise, so
the same code path scores a single forecast or a full panel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputDataError

#: The seven quantile levels retained from hub submissions.
QUANTILE_LEVELS = (0.025, 0.100, 0.250, 0.500, 0.750, 0.900, 0.975)


def pinball_loss(y, f, tau):
    """Pinball (quantile) loss of forecast ``f`` at level ``tau``.

    Parameters
    ----------
    y : float or array
        Observed value.
    f : float or array
        Forecast value at quantile ``tau``.
    tau : float or array in (0, 1)
        Quantile level.

    Returns
    -------
    float or array
        ``tau * (y - f)`` when ``y >= f``, else ``(1 - tau) * (f - y)``.
        Non-negative, and zero exactly when ``y == f``.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0.0) or np.any(tau >= 1.0):
        raise InputDataError(f"quantile level must lie in (0, 1), got {tau}")
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    diff = y - f
    loss = np.where(diff >= 0.0, tau * diff, (tau - 1.0) * diff)
    if loss.ndim == 0:
        return float(loss)
    return loss


def mean_pbl(y, forecasts):
    """Average pinball loss over the seven retained quantiles.

    Parameters
    ----------
    y : float
        Observed value.
    forecasts : sequence of (tau, value) pairs
        Exactly the seven levels in :data:`QUANTILE_LEVELS`, any order.

    Returns
    -------
    float
        Arithmetic mean of the seven pinball losses.
    """
    if len(forecasts) != len(QUANTILE_LEVELS):
        raise InputDataError(
            f"expected {len(QUANTILE_LEVELS)} quantile forecasts, got {len(forecasts)}"
        )
    taus = np.array([t for t, _ in forecasts], dtype=float)
    vals = np.array([v for _, v in forecasts], dtype=float)
    expected = np.sort(np.array(QUANTILE_LEVELS))
    if not np.allclose(np.sort(taus), expected, atol=1e-9):
        raise InputDataError(f"quantile levels {sorted(taus)} do not match {expected}")
    return float(np.mean(pinball_loss(y, vals, taus)))


def mean_pbl_batch(y, values, taus=None):
    """Vectorized :func:`mean_pbl` for a stacked panel.

    Parameters
    ----------
    y : (n,) array
        Observed values.
    values : (n, 7) array
        Forecast values, columns ordered to match ``taus``.
    taus : (7,) array, optional
        Quantile levels; defaults to :data:`QUANTILE_LEVELS`.

    Returns
    -------
    (n,) array of mean pinball losses.
    """
    taus = np.asarray(QUANTILE_LEVELS if taus is None else taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != taus.shape[0]:
        raise InputDataError(
            f"values must be (n, {taus.shape[0]}), got {values.shape}"
        )
    y = np.asarray(y, dtype=float)[:, None]
    return pinball_loss(y, values, taus[None, :]).mean(axis=1)


def normalize(mean_loss, population, scale_factor=1.0):
    """Population-normalize a mean pinball loss.

    ``pbl_norm = mean_loss * scale_factor / population``. The scale factor
    only rescales coefficients downstream; significance structure does not
    depend on it.
    """
    population = np.asarray(population, dtype=float)
    if np.any(population <= 0):
        raise InputDataError("population must be positive")
    if scale_factor <= 0:
        raise InputDataError("scale_factor must be positive")
    out = np.asarray(mean_loss, dtype=float) * (scale_factor / population)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class TrimReport:
    """What the upper-tail trim removed."""

    n_input: int
    n_removed: int
    trim_frac: float
    #: smallest removed value; +inf when nothing was removed
    threshold: float

    def to_dict(self):
        return {
            "n_input": self.n_input,
            "n_removed": self.n_removed,
            "trim_frac": self.trim_frac,
            # JSON-safe: an untriggered trim has no finite threshold
            "threshold": self.threshold if math.isfinite(self.threshold) else None,
        }


@dataclass(frozen=True)
class TrimResult:
    """Survivors of the trim, already square-root transformed."""

    sqrt_values: np.ndarray
    #: positions of survivors in the input, in original order
    kept_indices: np.ndarray
    report: TrimReport


def trim_and_transform(values, trim_frac):
    """Drop the ``floor(n * trim_frac)`` largest values, then take square roots.

    Ties at the cut are broken by stable input order (later duplicates are
    removed first). Survivors keep their input order.

    Parameters
    ----------
    values : (n,) array-like of non-negative pbl_norm values
    trim_frac : float in [0, 0.5)

    Returns
    -------
    TrimResult
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InputDataError("cannot trim an empty value list")
    if not (0.0 <= trim_frac < 0.5):
        raise InputDataError(f"trim_frac must lie in [0, 0.5), got {trim_frac}")
    n = values.size
    n_removed = math.floor(n * trim_frac)
    order = np.argsort(values, kind="stable")
    removed = order[n - n_removed:] if n_removed else np.array([], dtype=int)
    keep_mask = np.ones(n, dtype=bool)
    keep_mask[removed] = False
    kept = np.flatnonzero(keep_mask)
    threshold = float(values[removed].min()) if n_removed else math.inf
    report = TrimReport(n_input=n, n_removed=n_removed, trim_frac=float(trim_frac),
                        threshold=threshold)
    return TrimResult(sqrt_values=np.sqrt(values[kept]), kept_indices=kept, report=report)
