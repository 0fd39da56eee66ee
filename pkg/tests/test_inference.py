import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boostinfer.boosting import BoostingConfig, StopRule, Variant, standardize
from boostinfer.inference import (
    WeakFirstStageError,
    double_selection,
    iv_estimate,
    reject_null,
)

statsmodels = pytest.importorskip("statsmodels.api")


def fixed_cfg(variant, m):
    return BoostingConfig(variant=variant, stop_rule=StopRule.FIXED_M, m_max=m)


# ----------------------------------------------------------------- iv_estimate

def test_iv_perfect_instrument_collapses_to_ols(rng):
    Z = rng.normal(size=(60, 3))
    d = Z[:, 0].copy()
    y = 1.5 * d + rng.normal(size=60) * 0.4
    est = iv_estimate(y, d, Z, fixed_cfg(Variant.OGA, 3))
    dc = d - d.mean()
    yc = y - y.mean()
    ols_slope = float(dc @ yc) / float(dc @ dc)
    assert est.beta_hat == pytest.approx(ols_slope, abs=1e-8)


IV8_Z = np.array([[0.5], [-1.2], [0.3], [2.0], [-0.7], [1.1], [-0.4], [0.9]])
IV8_D = np.array([0.8, -1.0, 0.5, 2.2, -0.3, 1.4, -0.6, 1.0])
IV8_Y = np.array([1.9, -1.8, 0.9, 4.5, -0.8, 2.6, -1.0, 2.1])


def test_iv_eight_observation_frozen_oracle():
    """Single instrument: beta and se frozen from hand-run scalar algebra."""
    est = iv_estimate(IV8_Y, IV8_D, IV8_Z, fixed_cfg(Variant.PGA, 1))
    assert est.beta_hat == pytest.approx(1.985237483953787, abs=1e-12)
    assert est.se == pytest.approx(0.06346519654576915, abs=1e-12)
    assert list(est.first_stage_support) == [0]
    assert est.m_star == 1


def test_iv_formula_matches_independent_arithmetic(rng):
    Z = rng.normal(size=(50, 6))
    d = Z[:, :2] @ np.array([1.0, -0.5]) + rng.normal(size=50) * 0.5
    y = 2.0 * d + rng.normal(size=50)
    cfg = fixed_cfg(Variant.OGA, 2)
    est = iv_estimate(y, d, Z, cfg)

    from boostinfer.boosting import fit_boosting, predict

    fit = fit_boosting(standardize(d, Z), cfg)
    dhat = predict(fit, Z)
    dq = dhat - dhat.mean()
    yc = y - y.mean()
    dc = d - d.mean()
    beta = float(dq @ yc) / float(dq @ dc)
    sigma2 = float(np.mean((yc - beta * dc) ** 2))
    assert est.beta_hat == pytest.approx(beta, abs=1e-12)
    assert est.se == pytest.approx(np.sqrt(sigma2 / float(dq @ dq)), abs=1e-12)


def test_iv_empty_first_stage_raises(rng):
    # constant d: the centered response is exactly zero, so the first
    # stage has no descent direction and selects nothing
    Z = rng.normal(size=(12, 2))
    d = np.full(12, 2.0)
    y = rng.normal(size=12)
    with pytest.raises(WeakFirstStageError) as err:
        iv_estimate(y, d, Z, fixed_cfg(Variant.PGA, 5))
    assert err.value.support_size == 0


# ------------------------------------------------------------ double_selection

def test_double_selection_empty_union_is_simple_ols():
    # X columns live on rows 4-7 and sum to zero; y and d live on rows
    # 0-3, so every selection score is exactly 0.0 and nothing is picked
    X = np.zeros((8, 3))
    X[4:, 0] = [1.0, -1.0, 1.0, -1.0]
    X[4:, 1] = [1.0, 1.0, -1.0, -1.0]
    X[4:, 2] = [1.0, -1.0, -1.0, 1.0]
    d = np.array([2.0, 1.0, -1.0, -2.0, 0.0, 0.0, 0.0, 0.0])
    y = np.array([2.0, -1.5, 0.5, -1.0, 0.0, 0.0, 0.0, 0.0])
    est = double_selection(y, d, X, fixed_cfg(Variant.PGA, 5))
    assert est.support_union.size == 0
    W = np.column_stack([np.ones(8), d])
    ref = np.linalg.solve(W.T @ W, W.T @ y)
    assert est.alpha_hat == pytest.approx(ref[1], abs=1e-8)


def te15_fixture():
    gen = np.random.default_rng(5)
    X = gen.normal(size=(15, 3))
    d = 1.3 * X[:, 1] + gen.normal(size=15) * 0.5
    y = 0.7 * d + 2.0 * X[:, 0] + gen.normal(size=15) * 0.6
    return y, d, X


def test_double_selection_frozen_hc1_oracle():
    """One-step selections pick column 0 for y and 1 for d; the final
    stage numbers are frozen from an independent sandwich computation."""
    y, d, X = te15_fixture()
    est = double_selection(y, d, X, fixed_cfg(Variant.PGA, 1))
    assert list(est.support_y) == [0]
    assert list(est.support_d) == [1]
    assert list(est.support_union) == [0, 1]
    assert est.alpha_hat == pytest.approx(0.5717081775171883, abs=1e-10)
    assert est.se == pytest.approx(0.2483773031854592, abs=1e-10)


def test_double_selection_matches_statsmodels_hc1():
    y, d, X = te15_fixture()
    est = double_selection(y, d, X, fixed_cfg(Variant.PGA, 1))
    W = np.column_stack([np.ones(15), d, X[:, [0, 1]]])
    res = statsmodels.OLS(y, W).fit(cov_type="HC1")
    assert est.alpha_hat == pytest.approx(res.params[1], abs=1e-10)
    assert est.se == pytest.approx(res.bse[1], abs=1e-10)


def test_hc1_equals_classical_on_constant_magnitude_residuals():
    """Hadamard columns: residuals of constant magnitude, orthogonal to
    the regressors, so the sandwich must equal the classical variance."""
    from scipy.linalg import hadamard

    from boostinfer.inference import _hc1_ols

    H = hadamard(8).astype(float)
    W = H[:, :3]  # includes the all-ones intercept column
    e = 0.7 * H[:, 4]
    b = np.array([1.0, -2.0, 0.5])
    y = W @ b + e
    coef, vcov = _hc1_ols(W, y, labels=list("abc"))
    assert np.allclose(coef, b, atol=1e-12)
    n, k = W.shape
    rss = float(e @ e)
    classical = rss / (n - k) * np.linalg.inv(W.T @ W)
    assert np.allclose(vcov, classical, atol=1e-8)


def test_double_selection_union_too_large(rng):
    from boostinfer.boosting import DegenerateDesignError

    X = rng.normal(size=(12, 40))
    theta = rng.normal(size=40)
    d = X @ theta + rng.normal(size=12)
    y = 0.5 * d + X @ theta + rng.normal(size=12)
    with pytest.raises(DegenerateDesignError):
        double_selection(
            y, d, X,
            BoostingConfig(
                variant=Variant.PGA, stop_rule=StopRule.RESIDUAL_TOL,
                m_max=200, residual_tol=0.0,
            ),
        )


# ------------------------------------------------------------------ reject_null

def test_reject_null_zero_t():
    assert not reject_null(1.0, 0.5, 1.0)


def test_reject_null_t_of_two():
    assert reject_null(2.0, 0.5, 1.0)


def test_reject_null_quantile_boundary():
    assert reject_null(1.97, 1.0, 0.0, level=0.05)
    assert not reject_null(1.95, 1.0, 0.0, level=0.05)


def test_reject_null_validation():
    with pytest.raises(ValueError):
        reject_null(1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        reject_null(1.0, 1.0, 0.0, level=1.5)


# ------------------------------------------------------------------ properties

@given(
    a=st.floats(0.1, 10.0),
    b=st.floats(-5.0, 5.0),
    seed=st.integers(0, 2**31 - 1),
)
@settings(max_examples=25)
def test_iv_affine_equivariance(a, b, seed):
    gen = np.random.default_rng(seed)
    Z = gen.normal(size=(40, 5))
    d = Z[:, :2] @ np.array([0.8, 0.6]) + gen.normal(size=40) * 0.5
    y = d + gen.normal(size=40)
    cfg = fixed_cfg(Variant.OGA, 2)
    base = iv_estimate(y, d, Z, cfg)
    scaled = iv_estimate(a * y + b, d, Z, cfg)
    assert scaled.beta_hat == pytest.approx(a * base.beta_hat, rel=1e-8)
    assert scaled.se == pytest.approx(a * base.se, rel=1e-8)
    assert reject_null(base.beta_hat, base.se, 1.0) == reject_null(
        scaled.beta_hat, scaled.se, a * 1.0
    )


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=25)
def test_double_selection_column_permutation_symmetry(seed):
    gen = np.random.default_rng(seed)
    X = gen.normal(size=(40, 6))
    theta = np.array([1.0, 0.5, 0.0, 0.0, 0.3, 0.0])
    d = X @ theta + gen.normal(size=40)
    y = 0.5 * d + X @ theta + gen.normal(size=40)
    cfg = fixed_cfg(Variant.OGA, 3)
    base = double_selection(y, d, X, cfg)
    perm = gen.permutation(6)
    permuted = double_selection(y, d, X[:, perm], cfg)
    assert permuted.alpha_hat == pytest.approx(base.alpha_hat, abs=1e-8)
    assert permuted.se == pytest.approx(base.se, abs=1e-8)
    assert set(perm[permuted.support_union]) == set(base.support_union)
