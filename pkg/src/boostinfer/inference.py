"""Post-selection inference estimators built on the greedy fits.

Two estimators: two-stage least squares whose first stage is selected by
boosting among many instruments, and the double-selection treatment-effect
regression among many controls (select controls for the outcome and for
the treatment separately, refit OLS on the union).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from .boosting import (
    BoostingConfig,
    DegenerateDesignError,
    _pivoted_lstsq,
    fit_boosting,
    predict,
    standardize,
)


class WeakFirstStageError(RuntimeError):
    """First stage is empty or the instrument fit does not track d."""

    def __init__(self, support_size, message=None):
        self.support_size = support_size
        if message is None:
            message = (
                "weak or empty first stage (support size %d)" % support_size
            )
        super().__init__(message)


@dataclass
class IVEstimate:
    beta_hat: float
    se: float
    first_stage_support: np.ndarray
    m_star: int

    def t_stat(self, null_value: float) -> float:
        return (self.beta_hat - null_value) / self.se


@dataclass
class TEEstimate:
    alpha_hat: float
    se: float
    support_y: np.ndarray
    support_d: np.ndarray
    support_union: np.ndarray
    m_star_y: int
    m_star_d: int

    def t_stat(self, null_value: float) -> float:
        return (self.alpha_hat - null_value) / self.se


def _center(v: np.ndarray) -> np.ndarray:
    return v - v.mean()


def iv_estimate(y, d, Z, cfg: BoostingConfig) -> IVEstimate:
    """2SLS with a boosting-selected first stage.

    Fits d on Z with the configured variant, forms first-stage predictions
    dhat on the original scale, and computes, on centered variables,
    beta = <dhat, y>/<dhat, d> and se = sqrt(sigma2/<dhat, dhat>) with
    sigma2 the divisor-n mean squared residual of y - beta*d.
    """
    y = np.asarray(y, dtype=float)
    d = np.asarray(d, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if y.shape != d.shape or y.ndim != 1 or Z.shape[0] != y.shape[0]:
        raise ValueError("inconsistent dimensions for y, d, Z")
    data = standardize(d, Z)
    fit = fit_boosting(data, cfg)
    if fit.support.size == 0:
        raise WeakFirstStageError(0)
    dhat_c = _center(predict(fit, Z))
    yc = _center(y)
    dc = _center(d)
    denom = float(dhat_c @ dc)
    if denom <= 0.0:
        raise WeakFirstStageError(int(fit.support.size))
    beta_hat = float(dhat_c @ yc) / denom
    resid = yc - beta_hat * dc
    sigma2 = float(resid @ resid) / y.shape[0]
    se = float(np.sqrt(sigma2 / float(dhat_c @ dhat_c)))
    return IVEstimate(
        beta_hat=beta_hat,
        se=se,
        first_stage_support=fit.support,
        m_star=fit.m_star,
    )


def _hc1_ols(W: np.ndarray, y: np.ndarray, labels):
    """OLS coefficients with the HC1 sandwich covariance."""
    n, k = W.shape
    coef = _pivoted_lstsq(W, y, labels=labels)
    resid = y - W @ coef
    gram_inv = np.linalg.inv(W.T @ W)
    meat = (W * resid[:, None] ** 2).T @ W
    vcov = gram_inv @ meat @ gram_inv * (n / (n - k))
    return coef, vcov


def double_selection(y, d, X, cfg: BoostingConfig) -> TEEstimate:
    """Treatment effect after double selection among the columns of X.

    Boosting selects controls for the outcome and, separately, for the
    treatment; the final OLS of y on (intercept, d, union of controls)
    reports the coefficient on d with its HC1 standard error.
    """
    y = np.asarray(y, dtype=float)
    d = np.asarray(d, dtype=float)
    X = np.asarray(X, dtype=float)
    if y.shape != d.shape or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("inconsistent dimensions for y, d, X")
    n = y.shape[0]
    fit_y = fit_boosting(standardize(y, X), cfg)
    fit_d = fit_boosting(standardize(d, X), cfg)
    union = np.union1d(fit_y.support, fit_d.support).astype(int)
    # strict: a saturated regression (union + 2 == n) has zero residual
    # degrees of freedom, so no standard error exists
    if union.size + 2 >= n:
        raise DegenerateDesignError(
            list(union),
            "selected union (%d controls) too large for OLS with n = %d"
            % (union.size, n),
        )
    W = np.column_stack([np.ones(n), d, X[:, union]])
    labels = ["intercept", "treatment"] + ["x%d" % j for j in union]
    coef, vcov = _hc1_ols(W, y, labels)
    return TEEstimate(
        alpha_hat=float(coef[1]),
        se=float(np.sqrt(vcov[1, 1])),
        support_y=fit_y.support,
        support_d=fit_d.support,
        support_union=union,
        m_star_y=fit_y.m_star,
        m_star_d=fit_d.m_star,
    )


def reject_null(estimate_value, se, null_value, level=0.05) -> bool:
    """Two-sided test of ``null_value`` against the normal critical value."""
    if se <= 0:
        raise ValueError("se must be > 0")
    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    z = scipy.stats.norm.ppf(1.0 - level / 2.0)
    return abs(estimate_value - null_value) / se > z
