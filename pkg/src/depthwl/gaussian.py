"""Multivariate Gaussian family: Mahalanobis distance, log-density,
closed-form MLE and Kullback-Leibler divergence.

The scatter matrix is always handled through its Cholesky factor; a
factorization failure means the matrix is not symmetric positive
definite and raises ValueError rather than being silently regularized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "GaussianParams",
    "mahalanobis_sq",
    "mle_fit",
    "kl_gaussian",
    "log_density",
]

_SYM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GaussianParams:
    """Location vector and SPD scatter matrix of a p-variate Gaussian."""

    mu: np.ndarray
    sigma: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if sigma.shape != (mu.size, mu.size):
            raise ValueError("sigma must be a p x p matrix matching mu")
        scale = max(1.0, float(np.abs(sigma).max()))
        if float(np.abs(sigma - sigma.T).max()) > _SYM_TOL * scale:
            raise ValueError("sigma is not symmetric")
        try:
            chol = np.linalg.cholesky(sigma)
        except np.linalg.LinAlgError:
            raise ValueError("sigma is not positive definite") from None
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "_chol", chol)

    @property
    def p(self) -> int:
        return self.mu.size

    @property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor of the scatter matrix."""
        return self._chol

    @property
    def log_det(self) -> float:
        return 2.0 * float(np.log(np.diag(self._chol)).sum())

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "sigma": self.sigma.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianParams":
        return cls(np.asarray(d["mu"], dtype=np.float64),
                   np.asarray(d["sigma"], dtype=np.float64))

    @classmethod
    def standard(cls, p: int) -> "GaussianParams":
        return cls(np.zeros(p), np.eye(p))


def mahalanobis_sq(x, params: GaussianParams):
    """Squared Mahalanobis distance (x - mu)' sigma^{-1} (x - mu).

    Computed through a triangular solve against the Cholesky factor.
    ``x`` may be a single p-vector or an (n, p) matrix; the result is a
    scalar or a length-n vector accordingly.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    diff = (np.atleast_2d(x) - params.mu).T
    y = solve_triangular(params.chol, diff, lower=True, check_finite=False)
    d2 = np.einsum("ij,ij->j", y, y)
    return float(d2[0]) if single else d2


def weighted_location_scatter(data: np.ndarray, w: np.ndarray, denom: float):
    """Weighted mean and (mean-centered) weighted scatter sum / denom.

    Shared by the maximum likelihood fit (unit weights, denom = n) and
    the reweighting iteration so that the unit-weight fixed point is
    bit-for-bit the MLE.
    """
    sw = float(w.sum())
    mu = (data.T @ w) / sw
    centered = data - mu
    sigma = (centered.T * w) @ centered / denom
    sigma = 0.5 * (sigma + sigma.T)
    return mu, sigma


def mle_fit(data) -> GaussianParams:
    """Maximum likelihood estimate: sample mean and 1/n covariance.

    The 1/n normalization is the fixed point of the unweighted score
    equations.  Raises ValueError when the sample covariance is
    singular (e.g. identical rows or n <= p).
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    n = data.shape[0]
    if n < 1:
        raise ValueError("empty data")
    mu, sigma = weighted_location_scatter(data, np.ones(n), float(n))
    try:
        return GaussianParams(mu, sigma)
    except ValueError:
        raise ValueError("sample covariance is singular") from None


def kl_gaussian(p0: GaussianParams, p1: GaussianParams) -> float:
    """KL divergence KL(N(mu0, sigma0) || N(mu1, sigma1)), closed form.

    0.5 * (tr(S1^-1 S0) + (mu1-mu0)' S1^-1 (mu1-mu0) - p
           + log det S1 - log det S0)
    """
    if p0.p != p1.p:
        raise ValueError("dimension mismatch")
    half = solve_triangular(p1.chol, p0.sigma, lower=True, check_finite=False)
    half = solve_triangular(p1.chol, half.T, lower=True, check_finite=False)
    trace = float(np.trace(half))
    quad = mahalanobis_sq(p0.mu, p1)
    kl = 0.5 * (trace + quad - p0.p + p1.log_det - p0.log_det)
    return max(kl, 0.0)


def log_density(x, params: GaussianParams):
    """Gaussian log-density; ``x`` a p-vector or (n, p) matrix."""
    d2 = mahalanobis_sq(x, params)
    return -0.5 * (params.p * np.log(2.0 * np.pi) + params.log_det + d2)
