"""Seeded generators for the two simulation designs.

Reproducibility contract
------------------------
Every random draw comes from a numpy ``Generator`` backed by the Philox
counter-based bit generator, keyed through ``SeedSequence`` with the tuple
``(master_seed, replication, label_code)`` where ``label_code`` is the
UTF-8 integer encoding of a short stream label.  Normal variates use
numpy's ziggurat ``standard_normal``.  Given the same key and draw shapes
the output is bit-identical, independent of thread or process count, which
is what the Monte Carlo harness relies on.

Draw order is part of the contract: ``gen_iv`` draws the instrument block,
then the outcome error, then the first-stage error residual; ``gen_te``
draws the control block, then the treatment error, then the outcome error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


def _label_code(label: str) -> int:
    return int.from_bytes(label.encode("utf-8"), "big")


def stream(master_seed: int, replication: int = 0, label: str = "dgp") -> np.random.Generator:
    """Deterministic random stream for one replication of one experiment."""
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    seq = np.random.SeedSequence((master_seed, replication, _label_code(label)))
    return np.random.Generator(np.random.Philox(seq))


def ar1_covariance(p: int, rho: float) -> np.ndarray:
    """AR(1) correlation matrix with entries rho**|j-h|."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    return scipy.linalg.toeplitz(rho ** np.arange(p))


def chol_sample(L: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. rows of N(0, L L') from a lower-triangular factor."""
    p = L.shape[0]
    return rng.standard_normal((n, p)) @ L.T


@dataclass
class DgpConfigIV:
    """Instrumental-variables design: sparse first stage over AR(1) instruments.

    ``mu`` is the target concentration parameter; the first-stage scale is
    calibrated so the endogenous regressor has unit unconditional variance.
    """

    n: int = 100
    p: int = 100
    s: int = 5
    mu: float = 180.0
    rho: float = 0.5
    corr_ev: float = 0.6
    beta_true: float = 1.0
    sigma_e: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 1 <= self.s <= self.p:
            raise ValueError("need 1 <= s <= p")
        if self.mu <= 0:
            raise ValueError("mu must be > 0")
        if not abs(self.rho) < 1:
            raise ValueError("|rho| must be < 1")
        if not abs(self.corr_ev) < 1:
            raise ValueError("|corr_ev| must be < 1")
        if self.sigma_e <= 0:
            raise ValueError("sigma_e must be > 0")


@dataclass
class DgpConfigTE:
    """Treatment-effect design: decaying controls 1/j**decay_exponent."""

    n: int = 100
    p: int = 200
    alpha0: float = 0.5
    rho: float = 0.5
    decay_exponent: float = 2.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not math.isfinite(self.alpha0):
            raise ValueError("alpha0 must be finite")
        if self.decay_exponent <= 0:
            raise ValueError("decay_exponent must be > 0")
        if not abs(self.rho) < 1:
            raise ValueError("|rho| must be < 1")


@dataclass
class IvSample:
    y: np.ndarray
    d: np.ndarray
    Z: np.ndarray


@dataclass
class TeSample:
    y: np.ndarray
    d: np.ndarray
    X: np.ndarray


def calibrate_first_stage(cfg: DgpConfigIV):
    """Scale the sparse first stage to hit the target concentration parameter.

    With q the quadratic form of the s-ones pattern in the instrument
    covariance, C = sqrt((mu/(n+mu))/q) and sigma_v^2 = 1 - C^2 q, so the
    recomputed concentration parameter n*Pi'Sigma*Pi/sigma_v^2 equals mu
    and the endogenous regressor has unit unconditional variance.
    Returns ``(C, sigma_v2, Pi)``.
    """
    q = float(ar1_covariance(cfg.s, cfg.rho).sum())
    C = math.sqrt((cfg.mu / (cfg.n + cfg.mu)) / q)
    sigma_v2 = 1.0 - C * C * q
    if sigma_v2 <= 0.0:
        raise ValueError(
            "configuration gives non-positive first-stage error variance"
        )
    Pi = np.zeros(cfg.p)
    Pi[: cfg.s] = C
    return C, sigma_v2, Pi


def gen_iv(cfg: DgpConfigIV, rng: np.random.Generator) -> IvSample:
    """Draw one IV sample: d = Z Pi + v, y = beta d + e, Corr(e, v) fixed.

    (e, v) are bivariate normal with Var(e) = sigma_e^2 and Var(v) from the
    concentration calibration; v is built as its regression on e plus an
    independent residual, which reproduces the joint law exactly.
    """
    C, sigma_v2, Pi = calibrate_first_stage(cfg)
    L = np.linalg.cholesky(ar1_covariance(cfg.p, cfg.rho))
    Z = chol_sample(L, cfg.n, rng)
    e = cfg.sigma_e * rng.standard_normal(cfg.n)
    sigma_v = math.sqrt(sigma_v2)
    sigma_ev = cfg.corr_ev * cfg.sigma_e * sigma_v
    resid_var = sigma_v2 - sigma_ev**2 / cfg.sigma_e**2
    w = math.sqrt(resid_var) * rng.standard_normal(cfg.n)
    v = (sigma_ev / cfg.sigma_e**2) * e + w
    d = Z @ Pi + v
    y = cfg.beta_true * d + e
    return IvSample(y=y, d=d, Z=Z)


def decay_coefficients(cfg: DgpConfigTE) -> np.ndarray:
    """Control coefficients 1/j**decay_exponent for j = 1..p."""
    return 1.0 / np.arange(1, cfg.p + 1, dtype=float) ** cfg.decay_exponent


def gen_te(cfg: DgpConfigTE, rng: np.random.Generator) -> TeSample:
    """Draw one treatment-effect sample with shared decaying coefficients.

    d = X theta + nu and y = alpha0 d + X theta + xi with xi, nu
    independent standard normal, independent of X.
    """
    L = np.linalg.cholesky(ar1_covariance(cfg.p, cfg.rho))
    X = chol_sample(L, cfg.n, rng)
    theta = decay_coefficients(cfg)
    nu = rng.standard_normal(cfg.n)
    xi = rng.standard_normal(cfg.n)
    d = X @ theta + nu
    y = cfg.alpha0 * d + X @ theta + xi
    return TeSample(y=y, d=d, X=X)
