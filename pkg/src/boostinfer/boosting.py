"""Componentwise L2 boosting for sparse linear regression.

Three estimators over a standardized design:

* pure greedy (``Variant.PGA``): each iteration fits the residual on the
  single best-correlated column and takes a univariate least-squares step,
* post-selection OLS (``Variant.POST_PGA``): the greedy path only picks the
  support, final coefficients come from an OLS refit on that support,
* orthogonal greedy (``Variant.OGA``): after each selection the response is
  re-projected onto the span of every column selected so far, so no column
  is ever picked twice.

All fitting happens on columns scaled to unit second moment (divisor-n
standard deviation) with a centered response; coefficients are mapped back
to the original scale, with an intercept, before they leave this module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class Variant(enum.Enum):
    PGA = "pga"
    POST_PGA = "post-pga"
    OGA = "oga"


class StopRule(enum.Enum):
    FIXED_M = "fixed"
    AICC = "aicc"
    RESIDUAL_TOL = "tol"


class NoDescentDirection(Exception):
    """Every selectable column is exactly uncorrelated with the residual."""


class DegenerateDesignError(ValueError):
    """Restricted design is numerically rank deficient.

    ``columns`` holds the offending column indices (or labels, when the
    caller works with named columns).
    """

    def __init__(self, columns, message=None):
        self.columns = list(columns)
        if message is None:
            message = "rank-deficient restricted design; offending columns: %s" % (
                self.columns,
            )
        super().__init__(message)


# Relative pivot tolerance below which a restricted design counts as
# rank deficient rather than being silently truncated.
PIVOT_RTOL = 1e-12

# Columns whose divisor-n standard deviation falls below this (relative to
# their mean magnitude) are flagged constant and excluded from selection.
CONSTANT_COL_RTOL = 1e-12


@dataclass
class DesignData:
    """Standardized response/design pair with the statistics to undo it.

    ``X`` has centered, unit-second-moment columns; ``y`` is centered.
    ``constant_cols`` lists columns that were constant in the raw input:
    they are stored as all-zero columns with scale 1 and never selected.
    """

    y: np.ndarray
    X: np.ndarray
    col_means: np.ndarray
    col_scales: np.ndarray
    y_mean: float
    n: int
    p: int
    constant_cols: np.ndarray

    def selectable(self) -> np.ndarray:
        """Boolean mask of columns eligible for selection."""
        mask = np.ones(self.p, dtype=bool)
        mask[self.constant_cols] = False
        return mask


@dataclass
class BoostingConfig:
    """Knobs of a single boosting fit.

    ``shrinkage`` multiplies each greedy step (1.0 reproduces the plain
    algorithm); ``m_max`` caps the iteration count for every stop rule.
    ``residual_tol`` is the relative RSS-improvement threshold used by
    ``StopRule.RESIDUAL_TOL``.
    """

    variant: Variant = Variant.PGA
    m_max: int = 100
    shrinkage: float = 1.0
    stop_rule: StopRule = StopRule.AICC
    residual_tol: float = 1e-6

    def __post_init__(self):
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1, got %d" % self.m_max)
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError("shrinkage must be in (0, 1], got %g" % self.shrinkage)
        if self.residual_tol < 0.0:
            raise ValueError("residual_tol must be >= 0, got %g" % self.residual_tol)


@dataclass
class BoostingFit:
    """Result of one boosting run.

    ``path`` is the sequence of selected column indices, ``support`` its
    distinct sorted entries.  ``gammas`` records the realized update
    coefficients (shrinkage already applied; empty for OGA).
    ``residual_norms[m]`` is the squared residual norm after m steps, so the
    sequence has ``m_star + 1`` entries.  ``beta_std`` lives on the
    standardized scale, ``beta_orig`` and ``intercept`` on the original one.
    """

    variant: Variant
    path: list[int]
    gammas: np.ndarray
    beta_std: np.ndarray
    beta_orig: np.ndarray
    intercept: float
    residual_norms: np.ndarray
    m_star: int
    support: np.ndarray = field(init=False)

    def __post_init__(self):
        self.support = np.unique(np.asarray(self.path, dtype=int))


def standardize(y_raw, X_raw) -> DesignData:
    """Center y and scale X columns to mean zero, unit second moment.

    Scaling uses the divisor-n standard deviation.  Constant columns are
    flagged and zeroed rather than rejected; raises if every column is
    constant, on a row-count mismatch, or on non-finite input.
    """
    y = np.asarray(y_raw, dtype=float)
    X = np.asarray(X_raw, dtype=float)
    if y.ndim != 1 or X.ndim != 2:
        raise ValueError("expected 1-d response and 2-d design")
    n, p = X.shape
    if y.shape[0] != n:
        raise ValueError(
            "dimension mismatch: y has %d rows, X has %d" % (y.shape[0], n)
        )
    if n < 2:
        raise ValueError("need at least 2 observations, got %d" % n)
    if not np.isfinite(X).all():
        raise ValueError("design matrix contains non-finite entries")
    if not np.isfinite(y).all():
        raise ValueError("response contains non-finite entries")

    col_means = X.mean(axis=0)
    Xc = X - col_means
    col_scales = np.sqrt(np.mean(Xc**2, axis=0))
    constant = col_scales <= CONSTANT_COL_RTOL * np.maximum(1.0, np.abs(col_means))
    if constant.all():
        raise ValueError("all design columns are constant")
    col_scales = np.where(constant, 1.0, col_scales)
    Xs = Xc / col_scales
    Xs[:, constant] = 0.0

    y_mean = float(y.mean())
    return DesignData(
        y=y - y_mean,
        X=Xs,
        col_means=col_means,
        col_scales=col_scales,
        y_mean=y_mean,
        n=n,
        p=p,
        constant_cols=np.flatnonzero(constant),
    )


def pga_step(U, X, selectable=None, exclude=None):
    """One greedy selection: pick the column most correlated with U.

    Returns ``(j, gamma)`` where gamma is the univariate least-squares
    coefficient of U on column j.  For standardized columns the selection
    score |X_j . U| is proportional to the absolute correlation; ties go to
    the lowest index.  Raises :class:`NoDescentDirection` when every
    candidate score is exactly zero (or everything is masked out).
    """
    scores = np.abs(X.T @ U)
    if selectable is not None:
        scores[~selectable] = -1.0
    if exclude is not None and len(exclude) > 0:
        scores[np.asarray(exclude, dtype=int)] = -1.0
    j = int(np.argmax(scores))
    if scores[j] <= 0.0:
        raise NoDescentDirection()
    col = X[:, j]
    gamma = float(col @ U) / float(col @ col)
    return j, gamma


def aicc_score(rss, k, n) -> float:
    """Corrected AIC n*log(rss/n) + 2*k*n/(n-k-1); +inf once k+1 >= n."""
    if n - k - 1 <= 0:
        return math.inf
    if rss <= 0.0:
        return -math.inf
    return n * math.log(rss / n) + 2.0 * k * n / (n - k - 1)


def stop_decision(residual_norms, path_len, cfg, n, support_sizes=None) -> bool:
    """Decide whether the greedy loop should stop after ``path_len`` steps.

    ``residual_norms`` holds squared residual norms for iterations
    0..path_len.  ``support_sizes`` (same length) holds the distinct
    selected-column count at each iteration; when omitted every step is
    assumed to have selected a new column, which is exact for OGA.

    Rules: FIXED_M stops at the m_max cap (the cap also applies to every
    other rule); RESIDUAL_TOL stops when the relative RSS improvement of
    the last step falls below ``residual_tol``; AICC stops at the first
    iteration whose corrected-AIC score, with k = distinct support size
    plus one for the intercept, exceeds the previous score.
    """
    if len(residual_norms) == 0:
        raise ValueError("residual_norms must be non-empty")
    if path_len >= cfg.m_max:
        return True
    if cfg.stop_rule is StopRule.FIXED_M:
        return False
    if path_len == 0 or len(residual_norms) < 2:
        return False
    prev_rss = residual_norms[-2]
    cur_rss = residual_norms[-1]
    if cfg.stop_rule is StopRule.RESIDUAL_TOL:
        if prev_rss <= 0.0:
            return True
        return (prev_rss - cur_rss) / prev_rss < cfg.residual_tol
    if cfg.stop_rule is StopRule.AICC:
        return _aicc_increased(residual_norms, path_len, n, support_sizes)
    raise ValueError("unknown stop rule %r" % (cfg.stop_rule,))


def _aicc_increased(residual_norms, path_len, n, support_sizes=None) -> bool:
    """True when the last step pushed the corrected-AIC score uphill."""
    if path_len == 0 or len(residual_norms) < 2:
        return False
    if support_sizes is None:
        k_prev, k_cur = path_len, path_len + 1
    else:
        k_prev, k_cur = support_sizes[-2] + 1, support_sizes[-1] + 1
    if n - k_cur - 1 <= 0:
        return True
    prev_rss, cur_rss = residual_norms[-2], residual_norms[-1]
    return aicc_score(cur_rss, k_cur, n) > aicc_score(prev_rss, k_prev, n)


def _pivoted_lstsq(A, b, labels=None, rtol=PIVOT_RTOL):
    """Least squares via column-pivoted QR with an explicit rank guard.

    Raises :class:`DegenerateDesignError` naming the columns whose pivot
    falls below ``rtol`` relative to the largest one.
    """
    A = np.atleast_2d(A)
    Q, R, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    k = diag.shape[0]
    if diag[0] == 0.0:
        bad = piv
    else:
        bad = piv[np.flatnonzero(diag < rtol * diag[0])]
    if len(bad) > 0:
        if labels is not None:
            bad = [labels[i] for i in bad]
        raise DegenerateDesignError(bad)
    z = scipy.linalg.solve_triangular(R, Q.T @ b)
    coef = np.empty(k)
    coef[piv] = z
    return coef


def _ls_on_support(data: DesignData, support) -> np.ndarray:
    """Full-p standardized coefficient vector of an OLS on ``support``."""
    support = np.asarray(sorted(support), dtype=int)
    beta = np.zeros(data.p)
    if support.size == 0:
        return beta
    if support.size > data.n:
        raise ValueError(
            "support size %d exceeds sample size %d" % (support.size, data.n)
        )
    beta[support] = _pivoted_lstsq(data.X[:, support], data.y, labels=support)
    return beta


def _to_original_scale(data: DesignData, beta_std):
    beta_orig = beta_std / data.col_scales
    intercept = data.y_mean - float(beta_orig @ data.col_means)
    return beta_orig, intercept


def post_ols(data: DesignData, support):
    """OLS of y restricted to ``support``, on the original scale.

    Returns ``(coefficients, intercept)`` with zeros off the support.  An
    empty support gives the null model (intercept = mean of the raw
    response).  Rank-deficient restricted designs raise
    :class:`DegenerateDesignError` naming the offending columns.
    """
    beta_std = _ls_on_support(data, support)
    return _to_original_scale(data, beta_std)


def _finalize(data, variant, path, gammas, beta_std, rss) -> BoostingFit:
    beta_orig, intercept = _to_original_scale(data, beta_std)
    return BoostingFit(
        variant=variant,
        path=list(path),
        gammas=np.asarray(gammas, dtype=float),
        beta_std=beta_std,
        beta_orig=beta_orig,
        intercept=intercept,
        residual_norms=np.asarray(rss, dtype=float),
        m_star=len(path),
    )


def fit_pga(data: DesignData, cfg: BoostingConfig) -> BoostingFit:
    """Run the pure greedy algorithm (and its post-OLS variant).

    Iterates selection + univariate update with step length
    ``shrinkage * gamma`` until the stop rule fires or ``m_max`` is
    reached.  Under AICC stopping the step that pushed the score uphill is
    rolled back, so ``m_star`` sits at the score's first local minimum.
    If the response is exactly uncorrelated with every column at the start,
    the zero fit with an empty path is returned.
    """
    if cfg.variant not in (Variant.PGA, Variant.POST_PGA):
        raise ValueError("fit_pga requires variant PGA or POST_PGA")
    X, y, n, p = data.X, data.y, data.n, data.p
    selectable = data.selectable()

    beta = np.zeros(p)
    U = y.copy()
    rss = [float(U @ U)]
    path: list[int] = []
    gammas: list[float] = []
    seen = np.zeros(p, dtype=bool)
    support_sizes = [0]

    while len(path) < cfg.m_max:
        try:
            j, gamma = pga_step(U, X, selectable=selectable)
        except NoDescentDirection:
            break
        step = cfg.shrinkage * gamma
        prev_U = U
        beta[j] += step
        U = U - step * X[:, j]
        newly_selected = not seen[j]
        seen[j] = True
        path.append(j)
        gammas.append(step)
        support_sizes.append(int(seen.sum()))
        rss.append(float(U @ U))
        if stop_decision(rss, len(path), cfg, n, support_sizes=support_sizes):
            if cfg.stop_rule is StopRule.AICC and _aicc_increased(
                rss, len(path), n, support_sizes
            ):
                beta[j] -= step
                U = prev_U
                path.pop()
                gammas.pop()
                support_sizes.pop()
                rss.pop()
                if newly_selected:
                    seen[j] = False
            break

    if cfg.variant is Variant.POST_PGA:
        beta = _ls_on_support(data, np.flatnonzero(seen))
    return _finalize(data, cfg.variant, path, gammas, beta, rss)


def fit_oga(data: DesignData, cfg: BoostingConfig) -> BoostingFit:
    """Run the orthogonal greedy algorithm.

    Selection is the same greedy step restricted to never-selected columns;
    the update replaces the fitted values with the projection of y onto the
    span of every selected column, so residuals stay orthogonal to the
    selected set and no index repeats.
    """
    if cfg.variant is not Variant.OGA:
        raise ValueError("fit_oga requires variant OGA")
    X, y, n = data.X, data.y, data.n
    selectable = data.selectable()

    sel: list[int] = []
    beta_sub = np.empty(0)
    U = y.copy()
    rss = [float(U @ U)]

    while len(sel) < cfg.m_max:
        try:
            j, _ = pga_step(U, X, selectable=selectable, exclude=sel)
        except NoDescentDirection:
            break
        prev = (U, beta_sub)
        sel.append(j)
        try:
            beta_sub = _pivoted_lstsq(X[:, sel], y, labels=sel)
        except DegenerateDesignError as err:
            raise DegenerateDesignError(err.columns, "degenerate selection") from err
        U = y - X[:, sel] @ beta_sub
        rss.append(float(U @ U))
        if stop_decision(rss, len(sel), cfg, n):
            if cfg.stop_rule is StopRule.AICC and _aicc_increased(rss, len(sel), n):
                U, beta_sub = prev
                sel.pop()
                rss.pop()
            break

    beta = np.zeros(data.p)
    if sel:
        beta[sel] = beta_sub
    return _finalize(data, cfg.variant, sel, [], beta, rss)


def fit_boosting(data: DesignData, cfg: BoostingConfig) -> BoostingFit:
    """Dispatch to the fitter matching ``cfg.variant``."""
    if cfg.variant is Variant.OGA:
        return fit_oga(data, cfg)
    return fit_pga(data, cfg)


def predict(fit: BoostingFit, X_new) -> np.ndarray:
    """Evaluate ``intercept + X_new @ beta_orig`` for original-scale rows."""
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim != 2 or X_new.shape[1] != fit.beta_orig.shape[0]:
        raise ValueError(
            "X_new must have %d columns, got shape %r"
            % (fit.beta_orig.shape[0], X_new.shape)
        )
    if not np.isfinite(X_new).all():
        raise ValueError("X_new contains non-finite entries")
    return fit.intercept + X_new @ fit.beta_orig
