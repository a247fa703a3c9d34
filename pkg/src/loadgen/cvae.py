"""(C)VAE with co-optimized output noise: model, losses, training, generation.

The encoder and decoder are plain dense networks from :mod:`loadgen.nets`.
Both sigma heads emit log-variance (floored at ``LOGVAR_FLOOR``) so the
standard deviations are positive by construction.  The four strategy
permutations are: auto vs fixed output sigma (training objective) crossed
with noisy vs noise-free sampling (generation).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import NormalizationSpec, hour_conditions
from .nets import (
    AdamState,
    LayerSpec,
    NetworkParams,
    adam_step,
    backward,
    forward,
    init_params,
)

LOGVAR_FLOOR = -20.0

SIGMA_MODES = ("auto", "fixed")
NOISE_MODES = ("noisy", "noise-free")


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the last finite-loss model."""

    def __init__(self, iteration, last_good):
        super().__init__(f"non-finite loss at iteration {iteration}")
        self.iteration = iteration
        self.last_good = last_good


@dataclass(frozen=True)
class StrategyConfig:
    """Output-noise strategy: sigma head mode, generation noise, KL weight."""

    sigma_mode: str = "auto"
    fixed_sigma: float | None = None
    noise: str = "noisy"
    beta: float = 1.0

    def __post_init__(self):
        if self.sigma_mode not in SIGMA_MODES:
            raise ValueError(f"sigma_mode must be one of {SIGMA_MODES}")
        if self.noise not in NOISE_MODES:
            raise ValueError(f"noise must be one of {NOISE_MODES}")
        if self.sigma_mode == "fixed":
            if self.fixed_sigma is None or self.fixed_sigma <= 0:
                raise ValueError("fixed sigma_mode requires fixed_sigma > 0")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "sigma_mode": self.sigma_mode,
            "fixed_sigma": self.fixed_sigma,
            "noise": self.noise,
            "beta": self.beta,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "StrategyConfig":
        return cls(**obj)


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and training hyperparameters.

    The decoder hidden widths always mirror the encoder widths reversed.
    ``cond_dim`` is 2 for the hour-conditioned CVAE and 0 for a plain VAE.
    """

    input_dim: int
    cond_dim: int = 2
    encoder_hidden: tuple[int, ...] = (24, 16)
    latent_dim: int = 8
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    batch_size: int = 64
    iterations: int = 20_000
    learning_rate: float = 1e-4

    def __post_init__(self):
        if self.input_dim < 1 or self.latent_dim < 1:
            raise ValueError("input_dim and latent_dim must be >= 1")
        if self.cond_dim not in (0, 2):
            raise ValueError("cond_dim must be 0 (VAE) or 2 (hour-conditioned)")
        object.__setattr__(self, "encoder_hidden", tuple(self.encoder_hidden))

    @property
    def decoder_hidden(self) -> tuple[int, ...]:
        return tuple(reversed(self.encoder_hidden))

    def encoder_specs(self) -> tuple[LayerSpec, ...]:
        widths = [self.input_dim + self.cond_dim, *self.encoder_hidden]
        hidden = [
            LayerSpec(a, b, "relu") for a, b in zip(widths, widths[1:])
        ]
        head = LayerSpec(widths[-1], 2 * self.latent_dim, "identity")
        return (*hidden, head)

    def decoder_specs(self) -> tuple[LayerSpec, ...]:
        widths = [self.latent_dim + self.cond_dim, *self.decoder_hidden]
        hidden = [
            LayerSpec(a, b, "relu") for a, b in zip(widths, widths[1:])
        ]
        head = LayerSpec(widths[-1], 2 * self.input_dim, "identity")
        return (*hidden, head)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "cond_dim": self.cond_dim,
            "encoder_hidden": list(self.encoder_hidden),
            "latent_dim": self.latent_dim,
            "strategy": self.strategy.to_dict(),
            "batch_size": self.batch_size,
            "iterations": self.iterations,
            "learning_rate": self.learning_rate,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        obj = dict(obj)
        obj["strategy"] = StrategyConfig.from_dict(obj["strategy"])
        obj["encoder_hidden"] = tuple(obj["encoder_hidden"])
        return cls(**obj)


@dataclass
class LatentCode:
    """One latent draw: posterior parameters plus the recorded noise."""

    mu: np.ndarray
    sigma: np.ndarray
    epsilon: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        if np.any(self.sigma <= 0):
            raise ValueError("sigma must be strictly positive")


@dataclass
class TrainedModel:
    encoder: NetworkParams
    decoder: NetworkParams
    config: ModelConfig
    norm_spec: NormalizationSpec | None = None
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0))
    hour_histogram: np.ndarray | None = None  # training hour counts, len 24
    seed: int | None = None
    areas: list[str] | None = None            # column labels of the training data


def _with_cond(a: np.ndarray, c: np.ndarray | None, cond_dim: int) -> np.ndarray:
    if cond_dim == 0:
        if c is not None and np.size(c):
            raise ValueError("model is unconditional but a condition was given")
        return a
    if c is None:
        raise ValueError("conditional model requires a condition")
    c = np.atleast_2d(np.asarray(c, dtype=float))
    if c.shape != (a.shape[0], cond_dim):
        raise ValueError(f"condition shape {c.shape} != ({a.shape[0]}, {cond_dim})")
    return np.hstack([a, c])


def _split_heads(out: np.ndarray, width: int):
    """Final affine layer stacks (mu, log-variance); split and floor."""
    mu = out[:, :width]
    logvar = np.maximum(out[:, width:], LOGVAR_FLOOR)
    return mu, logvar


def encode(model: TrainedModel, x: np.ndarray, c: np.ndarray | None = None):
    """Map inputs to the posterior (mu, sigma) in latent space."""
    single = np.ndim(x) == 1
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.config.input_dim:
        raise ValueError(f"input dim {x.shape[1]} != {model.config.input_dim}")
    out = forward(model.encoder, _with_cond(x, c, model.config.cond_dim)).output
    mu, logvar = _split_heads(out, model.config.latent_dim)
    sigma = np.exp(0.5 * logvar)
    if single:
        return mu[0], sigma[0]
    return mu, sigma


def reparameterize(mu, sigma, epsilon) -> np.ndarray:
    """z = mu + epsilon (.) sigma."""
    mu, sigma, epsilon = (np.asarray(a, dtype=float) for a in (mu, sigma, epsilon))
    if not (mu.shape == sigma.shape == epsilon.shape):
        raise ValueError("mu, sigma and epsilon must have identical shapes")
    return mu + epsilon * sigma


def sample_latent(model: TrainedModel, x, c, rng: np.random.Generator) -> LatentCode:
    """Encode one input and draw its latent code, recording epsilon."""
    mu, sigma = encode(model, x, c)
    epsilon = rng.standard_normal(mu.shape)
    return LatentCode(mu, sigma, epsilon, reparameterize(mu, sigma, epsilon))


def decode(model: TrainedModel, z: np.ndarray, c: np.ndarray | None = None):
    """Map latent codes to output-space (mu', sigma').

    In fixed sigma mode the sigma head is bypassed and the configured
    constant is returned for every dimension.
    """
    single = np.ndim(z) == 1
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if z.shape[1] != model.config.latent_dim:
        raise ValueError(f"latent dim {z.shape[1]} != {model.config.latent_dim}")
    out = forward(model.decoder, _with_cond(z, c, model.config.cond_dim)).output
    mu_p, logvar_p = _split_heads(out, model.config.input_dim)
    strategy = model.config.strategy
    if strategy.sigma_mode == "fixed":
        sigma_p = np.full_like(mu_p, strategy.fixed_sigma)
    else:
        sigma_p = np.exp(0.5 * logvar_p)
    if single:
        return mu_p[0], sigma_p[0]
    return mu_p, sigma_p


# --- loss terms (sums over all elements; training divides by batch size) ---

def kl_loss(mu: np.ndarray, sigma: np.ndarray) -> float:
    """KL divergence of N(mu, sigma^2) from N(0, I), summed over the batch."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be strictly positive")
    var = sigma**2
    return 0.5 * float(np.sum(-1.0 + var + mu**2 - np.log(var)))


def recon_loss_auto(x, mu_p, sigma_p) -> float:
    """Gaussian negative log-likelihood with per-element sigma (constant dropped)."""
    x, mu_p, sigma_p = (np.asarray(a, dtype=float) for a in (x, mu_p, sigma_p))
    if np.any(sigma_p <= 0):
        raise ValueError("sigma_p must be strictly positive")
    var = sigma_p**2
    return 0.5 * float(np.sum((x - mu_p) ** 2 / var + np.log(var)))


def recon_loss_fixed(x, mu_p, s: float) -> float:
    """Scaled squared error: the auto loss with sigma pinned to s, log term dropped."""
    if s <= 0:
        raise ValueError("s must be strictly positive")
    x, mu_p = np.asarray(x, dtype=float), np.asarray(mu_p, dtype=float)
    return 0.5 * float(np.sum((x - mu_p) ** 2)) / s**2


def total_loss(strategy: StrategyConfig, kl: float, recon: float) -> float:
    """beta-weighted KL plus reconstruction."""
    return strategy.beta * kl + recon


def batch_loss_and_grads(
    encoder: NetworkParams,
    decoder: NetworkParams,
    config: ModelConfig,
    x: np.ndarray,
    c: np.ndarray | None,
    epsilon: np.ndarray,
):
    """One training-step loss (batch mean) and its exact parameter gradients.

    epsilon is the single per-sample reparameterization draw; holding it
    fixed makes the loss a deterministic function of the parameters,
    which is what the finite-difference checks rely on.
    """
    strategy = config.strategy
    k, d = config.latent_dim, config.input_dim
    B = x.shape[0]

    enc_cache = forward(encoder, _with_cond(x, c, config.cond_dim))
    enc_out = enc_cache.output
    mu = enc_out[:, :k]
    lv_raw = enc_out[:, k:]
    lv = np.maximum(lv_raw, LOGVAR_FLOOR)
    sigma = np.exp(0.5 * lv)
    z = mu + epsilon * sigma

    dec_cache = forward(decoder, _with_cond(z, c, config.cond_dim))
    dec_out = dec_cache.output
    mu_p = dec_out[:, :d]
    lvp_raw = dec_out[:, d:]
    lvp = np.maximum(lvp_raw, LOGVAR_FLOOR)

    resid = x - mu_p
    var = np.exp(lv)
    kl_sum = 0.5 * np.sum(-1.0 + var + mu**2 - lv)
    if strategy.sigma_mode == "auto":
        var_p = np.exp(lvp)
        recon_sum = 0.5 * np.sum(resid**2 / var_p + lvp)
        d_mu_p = -resid / var_p / B
        d_lvp = 0.5 * (1.0 - resid**2 / var_p) / B * (lvp_raw > LOGVAR_FLOOR)
    else:
        s2 = strategy.fixed_sigma**2
        recon_sum = 0.5 * np.sum(resid**2) / s2
        d_mu_p = -resid / s2 / B
        d_lvp = np.zeros_like(lvp)
    loss = (strategy.beta * kl_sum + recon_sum) / B

    dec_grads, d_dec_in = backward(decoder, dec_cache, np.hstack([d_mu_p, d_lvp]))
    d_z = d_dec_in[:, :k]

    d_mu = d_z + strategy.beta * mu / B
    d_lv = (
        d_z * epsilon * 0.5 * sigma
        + strategy.beta * 0.5 * (var - 1.0) / B
    ) * (lv_raw > LOGVAR_FLOOR)
    enc_grads, _ = backward(encoder, enc_cache, np.hstack([d_mu, d_lv]))
    return float(loss), enc_grads, dec_grads


def train(
    x: np.ndarray,
    conditions: np.ndarray | None,
    config: ModelConfig,
    seed: int,
    norm_spec: NormalizationSpec | None = None,
    hours: np.ndarray | None = None,
    areas: list[str] | None = None,
) -> TrainedModel:
    """Minibatch Adam training of the (C)VAE on normalized data.

    One epsilon draw per sample per step (single-point expectation
    approximation).  Deterministic per seed.  ``hours`` (when given) only
    records the training hour histogram for later scheduled generation.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if x.ndim != 2 or x.shape[1] != config.input_dim:
        raise ValueError(f"training data shape {x.shape} != (n, {config.input_dim})")
    if config.cond_dim and (conditions is None or conditions.shape != (n, config.cond_dim)):
        raise ValueError("conditional training requires an (n, cond_dim) condition matrix")
    if config.cond_dim == 0:
        conditions = None

    ss = np.random.SeedSequence(seed)
    s_enc, s_dec, s_loop = ss.spawn(3)
    encoder = init_params(config.encoder_specs(), s_enc)
    decoder = init_params(config.decoder_specs(), s_dec)
    st_enc = AdamState.for_params(encoder)
    st_dec = AdamState.for_params(decoder)
    rng = np.random.default_rng(s_loop)

    trace = np.empty(config.iterations)
    prev = None
    batch = min(config.batch_size, n)
    for it in range(config.iterations):
        idx = rng.choice(n, size=batch, replace=False)
        eps = rng.standard_normal((batch, config.latent_dim))
        xb = x[idx]
        cb = conditions[idx] if conditions is not None else None
        loss, g_enc, g_dec = batch_loss_and_grads(encoder, decoder, config, xb, cb, eps)
        if not np.isfinite(loss):
            last_good = TrainedModel(
                prev[0], prev[1], config, norm_spec, trace[:it].copy(), seed=seed
            ) if prev is not None else None
            raise TrainingDivergedError(it, last_good)
        trace[it] = loss
        prev = (encoder.copy(), decoder.copy())
        adam_step(encoder, g_enc, st_enc, config.learning_rate)
        adam_step(decoder, g_dec, st_dec, config.learning_rate)

    histogram = None
    if hours is not None:
        histogram = np.bincount(np.asarray(hours, dtype=int), minlength=24)
    return TrainedModel(
        encoder, decoder, config, norm_spec, trace, histogram, seed, areas
    )


def _condition_matrix(model: TrainedModel, count: int, condition) -> np.ndarray | None:
    if model.config.cond_dim == 0:
        if condition is not None:
            raise ValueError("model is unconditional; do not pass a condition")
        return None
    if condition is None:
        raise ValueError("conditional model requires an hour condition")
    hours = np.asarray(condition)
    if hours.ndim == 0:
        hours = np.full(count, int(hours))
    if hours.shape != (count,):
        raise ValueError(f"need one hour per sample, got shape {hours.shape}")
    return hour_conditions(hours)


def generate(
    model: TrainedModel,
    count: int,
    condition=None,
    seed: int = 0,
) -> np.ndarray:
    """Sample ``count`` normalized states from the trained generator.

    ``condition`` is None (VAE), a single hour, or an array of one hour
    per sample.  Noisy strategies sample from N(mu', sigma'); noise-free
    returns mu' directly.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    cfg = model.config
    c = _condition_matrix(model, count, condition)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, cfg.latent_dim))
    if count == 0:
        return np.empty((0, cfg.input_dim))
    mu_p, sigma_p = decode(model, z, c)
    if cfg.strategy.noise == "noisy":
        return mu_p + rng.standard_normal(mu_p.shape) * sigma_p
    return mu_p


def schedule_hours(histogram: np.ndarray, count: int) -> np.ndarray:
    """Hour assignments replaying a 24-bin histogram (largest remainder).

    With ``count`` equal to the histogram total this reproduces the
    training hour volumes exactly.
    """
    histogram = np.asarray(histogram, dtype=float)
    if histogram.shape != (24,) or histogram.sum() <= 0:
        raise ValueError("histogram must be 24 nonnegative counts")
    quota = histogram / histogram.sum() * count
    counts = np.floor(quota).astype(int)
    shortfall = count - counts.sum()
    if shortfall > 0:
        order = np.argsort(-(quota - counts), kind="stable")
        counts[order[:shortfall]] += 1
    return np.repeat(np.arange(24), counts)


# --- checkpoint serialization ---

CHECKPOINT_FORMAT = "loadgen-cvae-v1"


def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "config": model.config.to_dict(),
        "encoder": model.encoder.to_dict(),
        "decoder": model.decoder.to_dict(),
        "normalization": model.norm_spec.to_dict() if model.norm_spec else None,
        "hour_histogram": (
            model.hour_histogram.tolist() if model.hour_histogram is not None else None
        ),
        "loss_trace": model.loss_trace.tolist(),
        "seed": model.seed,
        "areas": model.areas,
    }


def model_from_dict(obj: dict) -> TrainedModel:
    if obj.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {obj.get('format')!r}")
    return TrainedModel(
        encoder=NetworkParams.from_dict(obj["encoder"]),
        decoder=NetworkParams.from_dict(obj["decoder"]),
        config=ModelConfig.from_dict(obj["config"]),
        norm_spec=(
            NormalizationSpec.from_dict(obj["normalization"])
            if obj.get("normalization")
            else None
        ),
        loss_trace=np.array(obj.get("loss_trace", []), dtype=float),
        hour_histogram=(
            np.array(obj["hour_histogram"], dtype=int)
            if obj.get("hour_histogram") is not None
            else None
        ),
        seed=obj.get("seed"),
        areas=obj.get("areas"),
    )


def save_checkpoint(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True)


def load_checkpoint(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
