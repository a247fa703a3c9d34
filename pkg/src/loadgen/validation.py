"""Statistical validation of generated populations against historical data.

Three tests: repeated two-sample K-S on each marginal, reconstruction
errors under a deterministic autoencoder, and a permutation energy test
on the joint distribution.  Repetitions draw from seeds spawned off the
master seed, so results are independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import kolmogorov

from .nets import (
    AdamState,
    LayerSpec,
    NetworkParams,
    adam_step,
    backward,
    forward,
    init_params,
)


class ValidationError(ValueError):
    pass


@dataclass
class PValueCurve:
    """Sorted p-values from a repeated two-sample test."""

    p_values: np.ndarray
    repetitions: int
    fraction: float
    label: str = ""

    def __post_init__(self):
        self.p_values = np.sort(np.asarray(self.p_values, dtype=float))
        if self.p_values.size != self.repetitions:
            raise ValidationError("p-value count does not match repetitions")
        if self.p_values.size and not (
            0.0 <= self.p_values[0] and self.p_values[-1] <= 1.0
        ):
            raise ValidationError("p-values must lie in [0, 1]")

    def sup_distance_from_uniform(self) -> float:
        """K-S distance between the p-value sample and U[0, 1]."""
        n = self.p_values.size
        if n == 0:
            return 0.0
        grid = np.arange(1, n + 1) / n
        return float(
            np.maximum(grid - self.p_values, self.p_values - (grid - 1.0 / n)).max()
        )


@dataclass
class EcdfReport:
    """Sorted reconstruction errors per population."""

    populations: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, label: str, errors: np.ndarray) -> "EcdfReport":
        errors = np.sort(np.asarray(errors, dtype=float))
        if errors.size and errors[0] < 0:
            raise ValidationError("reconstruction errors must be nonnegative")
        self.populations[label] = errors
        return self


def _subsample_size(fraction: float, population: int) -> int:
    """Rows per draw: the fraction of the population, rounded to nearest."""
    m = int(round(fraction * population))
    if m < 10:
        raise ValidationError(
            f"subsample size {m} of population {population} too small; need >= 10"
        )
    if m > population:
        raise ValidationError("subsample fraction exceeds the population")
    return m


def ks_two_sample(a: np.ndarray, b: np.ndarray):
    """Two-sample K-S: D = sup |ECDF_a - ECDF_b| with the asymptotic p-value.

    The p-value evaluates the Kolmogorov distribution at effective size
    n_a n_b / (n_a + n_b), with the classic small-sample refinement of
    the scale.  D lives on the lattice of multiples of 1/lcm(n_a, n_b);
    the survival function is averaged over one lattice step so the null
    p-value distribution is centered on uniform instead of sitting a
    staircase below it (for equal small samples the steps are coarse).
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValidationError("samples must be non-empty")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.abs(cdf_a - cdf_b).max())
    root = np.sqrt(a.size * b.size / (a.size + b.size))
    scale = root + 0.12 + 0.11 / root
    step = 1.0 / math.lcm(a.size, b.size)
    p = 0.5 * float(kolmogorov(scale * d) + kolmogorov(scale * min(d + step, 1.0)))
    return d, p


def ks_repeated(
    hist: np.ndarray,
    gen: np.ndarray,
    fraction: float,
    repetitions: int,
    seed: int,
    labels=None,
) -> list[PValueCurve]:
    """Repeated subsampled K-S test, one p-value curve per dimension."""
    hist = np.atleast_2d(np.asarray(hist, dtype=float))
    gen = np.atleast_2d(np.asarray(gen, dtype=float))
    if hist.shape[1] != gen.shape[1]:
        raise ValidationError("populations must share dimensionality")
    d = hist.shape[1]
    m_hist = _subsample_size(fraction, hist.shape[0])
    m_gen = _subsample_size(fraction, gen.shape[0])
    if labels is None:
        labels = [f"dim{j}" for j in range(d)]

    p_values = np.empty((repetitions, d))
    for rep, ss in enumerate(np.random.SeedSequence(seed).spawn(repetitions)):
        rng = np.random.default_rng(ss)
        rows_h = rng.choice(hist.shape[0], size=m_hist, replace=False)
        rows_g = rng.choice(gen.shape[0], size=m_gen, replace=False)
        sub_h, sub_g = hist[rows_h], gen[rows_g]
        for j in range(d):
            p_values[rep, j] = ks_two_sample(sub_h[:, j], sub_g[:, j])[1]

    return [
        PValueCurve(p_values[:, j], repetitions, fraction, label=labels[j])
        for j in range(d)
    ]


# --- autoencoder reconstruction-error test ---

@dataclass(frozen=True)
class AEConfig:
    input_dim: int
    hidden: tuple[int, ...] = (24, 16)
    bottleneck: int = 8
    batch_size: int = 64
    iterations: int = 20_000
    learning_rate: float = 1e-4

    def specs(self) -> tuple[LayerSpec, ...]:
        down = [self.input_dim, *self.hidden]
        up = [self.bottleneck, *reversed(self.hidden)]
        layers = [LayerSpec(a, b, "relu") for a, b in zip(down, down[1:])]
        layers.append(LayerSpec(down[-1], self.bottleneck, "identity"))
        layers += [LayerSpec(a, b, "relu") for a, b in zip(up, up[1:])]
        layers.append(LayerSpec(up[-1], self.input_dim, "identity"))
        return tuple(layers)


@dataclass
class AEModel:
    params: NetworkParams
    config: AEConfig
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0))


def train_autoencoder(x: np.ndarray, config: AEConfig, seed: int) -> AEModel:
    """Deterministic autoencoder minimizing mean ||x - x_hat||^2 / d."""
    x = np.asarray(x, dtype=float)
    n, d = x.shape
    if d != config.input_dim:
        raise ValidationError(f"data dim {d} != config dim {config.input_dim}")
    ss = np.random.SeedSequence(seed)
    s_init, s_loop = ss.spawn(2)
    params = init_params(config.specs(), s_init)
    state = AdamState.for_params(params)
    rng = np.random.default_rng(s_loop)

    batch = min(config.batch_size, n)
    trace = np.empty(config.iterations)
    for it in range(config.iterations):
        xb = x[rng.choice(n, size=batch, replace=False)]
        cache = forward(params, xb)
        resid = cache.output - xb
        trace[it] = float(np.mean(np.sum(resid**2, axis=1)) / d)
        grads, _ = backward(params, cache, 2.0 * resid / (d * batch))
        adam_step(params, grads, state, config.learning_rate)
    return AEModel(params, config, trace)


def reconstruction_errors(ae: AEModel, data: np.ndarray) -> np.ndarray:
    """Per-row squared reconstruction error divided by the dimension."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        return np.empty(0)
    out = forward(ae.params, data).output
    return np.sum((data - out) ** 2, axis=1) / ae.config.input_dim


def recon_error_cdf(ae: AEModel, data: np.ndarray, label: str = "data") -> EcdfReport:
    """Sorted reconstruction-error distribution for one population."""
    return EcdfReport().add(label, reconstruction_errors(ae, data))


# --- energy test ---

def energy_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Energy distance statistic 2 E|a-b| - E|a-a'| - E|b-b'| (V-statistic).

    Computed on a canonical argument ordering so the result is exactly
    symmetric in (a, b).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValidationError("samples must share dimensionality")
    if (b.shape[0], b.tobytes()) < (a.shape[0], a.tobytes()):
        a, b = b, a
    mean_ab = cdist(a, b).mean()
    mean_aa = cdist(a, a).mean()
    mean_bb = cdist(b, b).mean()
    return 2.0 * mean_ab - mean_aa - mean_bb


def energy_test(a: np.ndarray, b: np.ndarray, permutations: int, seed: int) -> float:
    """Permutation p-value for the energy statistic, add-one convention."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise ValidationError("samples must share dimensionality")
    if permutations < 1:
        raise ValidationError("need at least one permutation")
    na, nb = a.shape[0], b.shape[0]
    pooled = np.vstack([a, b])
    dist = cdist(pooled, pooled)
    total = dist.sum()

    def stat(idx_a, idx_b):
        s_aa = dist[np.ix_(idx_a, idx_a)].sum()
        s_bb = dist[np.ix_(idx_b, idx_b)].sum()
        s_ab = 0.5 * (total - s_aa - s_bb)
        return 2.0 * s_ab / (na * nb) - s_aa / na**2 - s_bb / nb**2

    observed = stat(np.arange(na), np.arange(na, na + nb))
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(permutations):
        perm = rng.permutation(na + nb)
        if stat(perm[:na], perm[na:]) >= observed:
            hits += 1
    return (1 + hits) / (1 + permutations)


def energy_repeated(
    hist: np.ndarray,
    gen: np.ndarray,
    fraction: float,
    repetitions: int,
    seed: int,
    permutations: int = 200,
) -> PValueCurve:
    """Repeated subsampled multivariate energy test; one p-value per draw."""
    hist = np.atleast_2d(np.asarray(hist, dtype=float))
    gen = np.atleast_2d(np.asarray(gen, dtype=float))
    if hist.shape[1] != gen.shape[1]:
        raise ValidationError("populations must share dimensionality")
    m_hist = _subsample_size(fraction, hist.shape[0])
    m_gen = _subsample_size(fraction, gen.shape[0])

    p_values = np.empty(repetitions)
    for rep, ss in enumerate(np.random.SeedSequence(seed).spawn(repetitions)):
        ss_rows, ss_perm = ss.spawn(2)
        rng = np.random.default_rng(ss_rows)
        rows_h = rng.choice(hist.shape[0], size=m_hist, replace=False)
        rows_g = rng.choice(gen.shape[0], size=m_gen, replace=False)
        p_values[rep] = energy_test(hist[rows_h], gen[rows_g], permutations, ss_perm)
    return PValueCurve(p_values, repetitions, fraction, label="energy")
