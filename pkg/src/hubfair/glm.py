"""Gaussian-family GLM fitting by iteratively reweighted least squares, with
log or identity link, normal-theory inference, and Wald linear hypotheses.

Each weighted solve uses a thin QR factorization of the weighted design
rather than normal equations, which keeps large ill-conditioned panels
numerically stable. The Gaussian variance function is constant, so the IRLS
weights reduce to ``(d mu / d eta)^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import norm

from .errors import ConvergenceError, InputDataError, RankDeficientError

#: two-sided 95% normal quantile used for every confidence interval
Z95 = 1.959964

LINKS = ("log", "identity")


@dataclass(frozen=True)
class FitResult:
    """Coefficients and inference for one fitted model."""

    beta: np.ndarray
    vcov: np.ndarray
    se: np.ndarray
    z: np.ndarray
    ci95: np.ndarray          # (p, 2) on the link scale
    dispersion: float
    loglik: float
    loglik_null: float
    pseudo_r2_cs: float
    n: int
    p: int
    converged: bool
    iterations: int
    link: str
    column_labels: tuple = ()
    mu: np.ndarray = None       # fitted means at the optimum
    weights: np.ndarray = None  # final IRLS weights

    def to_table(self):
        """Coefficient table matching the published layout.

        Columns: term, coef, exp_coef, se, z, p, ci_lo, ci_hi. Standard
        errors are on the link scale; the interval bounds are exponentiated
        so they sit next to ``exp_coef`` for side-by-side inspection.
        """
        import pandas as pd

        pvals = 2.0 * norm.sf(np.abs(self.z))
        return pd.DataFrame({
            "term": list(self.column_labels) or [f"b{i}" for i in range(self.p)],
            "coef": self.beta,
            "exp_coef": np.exp(self.beta),
            "se": self.se,
            "z": self.z,
            "p": pvals,
            "ci_lo": np.exp(self.ci95[:, 0]),
            "ci_hi": np.exp(self.ci95[:, 1]),
        })


def _check_rank(X, labels):
    """Raise RankDeficientError naming the dependent columns, if any."""
    n, p = X.shape
    _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag.max() * max(n, p) * np.finfo(float).eps if diag.size else 0.0
    rank = int((diag > tol).sum())
    if rank < p:
        dependent = [labels[i] if labels else str(i) for i in sorted(piv[rank:])]
        raise RankDeficientError(
            f"design matrix is rank deficient (rank {rank} < p {p}); "
            f"dependent columns: {dependent}", dependent_columns=dependent)


def _links(link):
    if link == "log":
        return (lambda mu: np.log(mu), lambda eta: np.exp(eta), lambda mu: mu)
    if link == "identity":
        return (lambda mu: mu, lambda eta: eta, lambda mu: np.ones_like(mu))
    raise InputDataError(f"link must be one of {LINKS}, got {link!r}")


def _gaussian_loglik(rss, n):
    # profile log-likelihood at the MLE dispersion rss/n
    with np.errstate(divide="ignore"):
        return -0.5 * n * (np.log(2.0 * np.pi * rss / n) + 1.0)


def _wls_solve(X, z, w, intercept_only=False):
    """Weighted least-squares step via an orthogonal (pivoted QR) solve."""
    if intercept_only:
        return np.array([np.sum(w * z) / np.sum(w)])
    sw = np.sqrt(w)
    beta, *_ = scipy.linalg.lstsq(sw[:, None] * X, sw * z,
                                  lapack_driver="gelsy", check_finite=False,
                                  overwrite_a=True, overwrite_b=True)
    return beta


def _weighted_R(X, w):
    """Triangular factor of the weighted design, for the covariance."""
    sw = np.sqrt(w)
    R = scipy.linalg.qr(sw[:, None] * X, mode="r", check_finite=False,
                        overwrite_a=True)[0]
    return R[: X.shape[1]]


def _valid_mu(mu, link):
    return bool(np.all(np.isfinite(mu)) and (link != "log" or np.all(mu > 0)))


def _irls(X, y, link, tol, max_iter, need_R=True):
    """Core IRLS loop; returns (beta, mu, w, R, deviance, iterations, converged)."""
    linkfun, invlink, dmu_deta = _links(link)
    n, p = X.shape
    intercept_only = p == 1 and np.all(X[:, 0] == 1.0)
    if link == "log":
        mu = np.maximum(y, y.mean() / 10.0) + 0.1  # keeps logs finite for zero responses
    else:
        mu = np.full(n, float(y.mean()))
    eta = linkfun(mu)
    deviance = np.sum((y - mu) ** 2)
    beta = None
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = dmu_deta(mu)
        w = grad ** 2
        z = eta + (y - mu) / grad
        new_beta = _wls_solve(X, z, w, intercept_only)
        # step-halve (up to 10 times) on invalid means or a deviance increase
        base = beta if beta is not None else np.zeros(p)
        step, accepted = 1.0, False
        for halving in range(11):
            trial = base + step * (new_beta - base)
            eta_t = X @ trial
            with np.errstate(over="ignore"):
                mu_t = invlink(eta_t)
            if _valid_mu(mu_t, link):
                dev_t = np.sum((y - mu_t) ** 2)
                first_full = beta is None and halving == 0
                if first_full or dev_t <= deviance or halving == 10:
                    accepted = True
                    break
            step /= 2.0
        if not accepted:
            raise ConvergenceError(
                "IRLS step-halving failed to restore positive finite means",
                last_beta=beta, iterations=it)
        rel_change = abs(dev_t - deviance) / (abs(dev_t) + 0.1)
        beta, eta, mu, deviance = trial, eta_t, mu_t, dev_t
        if it > 1 and rel_change < tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"IRLS did not converge within {max_iter} iterations",
            last_beta=beta, iterations=it)
    # refresh the factorization at the optimum for the covariance
    w = dmu_deta(mu) ** 2
    R = _weighted_R(X, w) if need_R else None
    return beta, mu, w, R, deviance, it, converged


def fit_glm(design, link="log", tol=1e-8, max_iter=100):
    """Fit a Gaussian-family GLM to a realized design.

    Parameters
    ----------
    design : DesignMatrix
        Full-column-rank design with response ``y`` (requires ``n > p``).
    link : {"log", "identity"}
    tol : float
        Relative deviance-change convergence threshold
        ``|dev - dev_prev| / (|dev| + 0.1) < tol``.
    max_iter : int

    Returns
    -------
    FitResult
        Link-scale coefficients with ``vcov = dispersion * (X'WX)^{-1}``,
        ``dispersion = RSS / (n - p)``, normal-theory z statistics and 95%
        intervals, profile log-likelihoods, and the Cox-Snell pseudo R².

    Raises
    ------
    RankDeficientError
        Naming the linearly dependent columns.
    ConvergenceError
        Carrying the last iterate when IRLS fails.
    """
    X = np.asarray(design.X, dtype=float)
    y = np.asarray(design.y, dtype=float)
    labels = tuple(design.column_labels)
    n, p = X.shape
    if n < p:
        raise InputDataError(f"need n >= p, got n={n}, p={p}")
    _check_rank(X, labels)

    beta, mu, w, R, rss, iterations, converged = _irls(X, y, link, tol, max_iter)

    # saturated n == p designs interpolate exactly; dispersion degenerates to 0
    dispersion = rss / (n - p) if n > p else 0.0
    # (X'WX)^{-1} = R^{-1} R^{-T} from the final weighted QR
    Rinv = scipy.linalg.solve_triangular(R, np.eye(p))
    xtwx_inv = Rinv @ Rinv.T
    vcov = dispersion * xtwx_inv
    vcov = 0.5 * (vcov + vcov.T)
    se = np.sqrt(np.diag(vcov))
    with np.errstate(divide="ignore", invalid="ignore"):
        zstat = np.where(se > 0, beta / se, 0.0)
    ci95 = np.column_stack([beta - Z95 * se, beta + Z95 * se])

    loglik = _gaussian_loglik(rss, n)
    if p == 1 and np.all(X[:, 0] == 1.0):
        loglik_null = loglik
    else:
        ones = np.ones((n, 1))
        _, mu0, _, _, rss0, _, _ = _irls(ones, y, link, tol, max_iter, need_R=False)
        loglik_null = _gaussian_loglik(rss0, n)
    if np.isinf(loglik):
        # exactly interpolated response; degenerate but well-defined
        pseudo = 0.0 if np.isinf(loglik_null) else 1.0
    else:
        pseudo = 1.0 - np.exp((2.0 / n) * (loglik_null - loglik))

    return FitResult(beta=beta, vcov=vcov, se=se, z=zstat, ci95=ci95,
                     dispersion=float(dispersion), loglik=float(loglik),
                     loglik_null=float(loglik_null), pseudo_r2_cs=float(pseudo),
                     n=n, p=p, converged=converged, iterations=iterations,
                     link=link, column_labels=labels, mu=mu, weights=w)


@dataclass(frozen=True)
class WaldResult:
    estimate: float
    se: float
    z: float
    p_value: float
    exp_estimate: float
    exp_ci95: tuple


def wald_linear_hypothesis(fit, c):
    """Wald test of the scalar linear hypothesis ``c . beta = 0``.

    Returns the estimate ``c . beta``, its standard error
    ``sqrt(c' V c)``, the two-sided normal p-value, and the exponentiated
    estimate with its 95% interval.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (fit.p,):
        raise InputDataError(f"contrast must have length p={fit.p}, got {c.shape}")
    if not np.any(c):
        raise InputDataError("contrast vector must be non-zero")
    est = float(c @ fit.beta)
    var = float(c @ fit.vcov @ c)
    se = float(np.sqrt(var))
    z = est / se if se > 0 else 0.0
    p_value = float(2.0 * norm.sf(abs(z)))
    return WaldResult(estimate=est, se=se, z=z, p_value=p_value,
                      exp_estimate=float(np.exp(est)),
                      exp_ci95=(float(np.exp(est - Z95 * se)),
                                float(np.exp(est + Z95 * se))))


def predict(fit, X_new):
    """Mean response for new rows: ``link^{-1}(X_new . beta)``."""
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    if X_new.shape[1] != fit.p:
        raise InputDataError(
            f"X_new has {X_new.shape[1]} columns, fit expects {fit.p}")
    _, invlink, _ = _links(fit.link)
    return invlink(X_new @ fit.beta)
