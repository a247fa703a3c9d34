"""Gaussian copula baseline: empirical marginals + normal-scores correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

EIG_FLOOR = 1e-10


class CopulaError(ValueError):
    pass


@dataclass
class CopulaModel:
    marginals: np.ndarray    # (n, d), each column sorted ascending
    factor: np.ndarray       # (d, d) lower-triangular, factor of the correlation

    @property
    def d(self) -> int:
        return self.marginals.shape[1]

    def to_dict(self) -> dict:
        return {
            "format": "loadgen-copula-v1",
            "marginals": self.marginals.tolist(),
            "factor": self.factor.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CopulaModel":
        if obj.get("format") != "loadgen-copula-v1":
            raise CopulaError(f"unsupported copula format {obj.get('format')!r}")
        return cls(
            np.array(obj["marginals"], dtype=float),
            np.array(obj["factor"], dtype=float),
        )


def fit_gaussian_copula(values: np.ndarray) -> CopulaModel:
    """Rank-transform each dimension to normal scores and correlate them.

    The correlation matrix is nudged to positive definite by clipping
    eigenvalues at 1e-10 when needed (exactly comonotone pairs make it
    singular).
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise CopulaError("training values must be a 2-D matrix")
    n, d = values.shape
    if n < d + 1:
        raise CopulaError(f"need at least d+1={d + 1} rows, got {n}")
    if np.any(values.max(axis=0) == values.min(axis=0)):
        raise CopulaError("degenerate (constant) dimension; cannot fit marginals")

    ranks = np.empty_like(values)
    for j in range(d):
        ranks[:, j] = stats.rankdata(values[:, j], method="average")
    scores = stats.norm.ppf(ranks / (n + 1))
    corr = np.corrcoef(scores, rowvar=False)
    corr = np.atleast_2d(corr)

    eigval, eigvec = np.linalg.eigh(corr)
    if eigval.min() < EIG_FLOOR:
        eigval = np.maximum(eigval, EIG_FLOOR)
        corr = eigvec @ np.diag(eigval) @ eigvec.T
        corr = 0.5 * (corr + corr.T)
    factor = np.linalg.cholesky(corr)

    return CopulaModel(marginals=np.sort(values, axis=0), factor=factor)


def sample_copula(model: CopulaModel, count: int, seed: int) -> np.ndarray:
    """Draw correlated normals, map through Phi, invert empirical marginals."""
    if count < 0:
        raise CopulaError("count must be >= 0")
    n, d = model.marginals.shape
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, d)) @ model.factor.T
    u = stats.norm.cdf(z)
    positions = np.arange(1, n + 1) / (n + 1)
    out = np.empty((count, d))
    for j in range(d):
        out[:, j] = np.interp(u[:, j], positions, model.marginals[:, j])
    return out
