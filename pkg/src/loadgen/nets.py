"""Dense feed-forward substrate: layers, exact backprop, Adam.

Everything is float64 and deterministic per seed.  Networks here are
small (tens of units per layer), so clarity wins over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTIVATIONS = ("relu", "identity")


@dataclass(frozen=True)
class LayerSpec:
    in_width: int
    out_width: int
    activation: str = "relu"

    def __post_init__(self):
        if self.in_width < 1 or self.out_width < 1:
            raise ValueError("layer widths must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class NetworkParams:
    """Weight matrices (out x in) and bias vectors for each layer."""

    specs: tuple[LayerSpec, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def n_layers(self) -> int:
        return len(self.specs)

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            self.specs,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def to_dict(self) -> dict:
        return {
            "layers": [
                {
                    "in": s.in_width,
                    "out": s.out_width,
                    "activation": s.activation,
                    "weight": w.tolist(),
                    "bias": b.tolist(),
                }
                for s, w, b in zip(self.specs, self.weights, self.biases)
            ]
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "NetworkParams":
        specs, weights, biases = [], [], []
        for layer in obj["layers"]:
            specs.append(LayerSpec(layer["in"], layer["out"], layer["activation"]))
            weights.append(np.array(layer["weight"], dtype=float))
            biases.append(np.array(layer["bias"], dtype=float))
        return cls(tuple(specs), weights, biases)


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


@dataclass
class ForwardCache:
    """All intermediate results of a forward pass, as needed by backward."""

    inputs: np.ndarray            # (batch, in)
    pre: list[np.ndarray]         # pre-activation per layer
    post: list[np.ndarray]        # post-activation per layer

    @property
    def output(self) -> np.ndarray:
        return self.post[-1]


@dataclass
class AdamState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params: NetworkParams) -> "AdamState":
        return cls(
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(w) for w in params.weights],
            [np.zeros_like(b) for b in params.biases],
            [np.zeros_like(b) for b in params.biases],
        )


def init_params(specs, seed) -> NetworkParams:
    """Weights ~ N(0, 1/in_width), biases zero; deterministic per seed."""
    specs = tuple(specs)
    for prev, nxt in zip(specs, specs[1:]):
        if prev.out_width != nxt.in_width:
            raise ValueError(
                f"layer widths do not chain: {prev.out_width} -> {nxt.in_width}"
            )
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for s in specs:
        scale = 1.0 / np.sqrt(s.in_width)
        weights.append(rng.standard_normal((s.out_width, s.in_width)) * scale)
        biases.append(np.zeros(s.out_width))
    return NetworkParams(specs, weights, biases)


def forward(params: NetworkParams, x: np.ndarray) -> ForwardCache:
    """Evaluate the network on a batch (rows = samples)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != params.specs[0].in_width:
        raise ValueError(
            f"input width {x.shape[1]} != first layer width "
            f"{params.specs[0].in_width}"
        )
    pre, post = [], []
    h = x
    for s, w, b in zip(params.specs, params.weights, params.biases):
        a = h @ w.T + b
        pre.append(a)
        h = np.maximum(a, 0.0) if s.activation == "relu" else a
        post.append(h)
    return ForwardCache(x, pre, post)


def backward(params: NetworkParams, cache: ForwardCache, grad_out: np.ndarray):
    """Exact gradients of the scalar loss whose output gradient is supplied.

    Returns (Gradients, gradient w.r.t. the network input).
    """
    g = np.atleast_2d(np.asarray(grad_out, dtype=float))
    if g.shape != cache.output.shape:
        raise ValueError(
            f"output gradient shape {g.shape} != output shape {cache.output.shape}"
        )
    n = params.n_layers
    dw = [None] * n
    db = [None] * n
    for l in range(n - 1, -1, -1):
        if params.specs[l].activation == "relu":
            g = g * (cache.pre[l] > 0.0)
        below = cache.post[l - 1] if l > 0 else cache.inputs
        dw[l] = g.T @ below
        db[l] = g.sum(axis=0)
        g = g @ params.weights[l]
    return Gradients(dw, db), g


def adam_step(
    params: NetworkParams,
    grads: Gradients,
    state: AdamState,
    alpha: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    """Standard Adam update with bias correction; mutates params and state."""
    for g in grads.weights + grads.biases:
        if not np.isfinite(g).all():
            raise FloatingPointError("non-finite gradient passed to adam_step")
    state.step += 1
    t = state.step
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for w, g, m, v in zip(params.weights, grads.weights, state.m_w, state.v_w):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        w -= alpha * (m / c1) / (np.sqrt(v / c2) + eps)
    for b, g, m, v in zip(params.biases, grads.biases, state.m_b, state.v_b):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        b -= alpha * (m / c1) / (np.sqrt(v / c2) + eps)
    return params, state


def pack(params: NetworkParams) -> np.ndarray:
    """Flatten all parameters into one vector (weights then biases per layer)."""
    parts = []
    for w, b in zip(params.weights, params.biases):
        parts.append(w.ravel())
        parts.append(b.ravel())
    return np.concatenate(parts)


def unpack(params: NetworkParams, vector: np.ndarray) -> NetworkParams:
    """Inverse of :func:`pack` onto a fresh NetworkParams of the same shape."""
    out = params.copy()
    pos = 0
    for i, (w, b) in enumerate(zip(out.weights, out.biases)):
        out.weights[i] = vector[pos:pos + w.size].reshape(w.shape).copy()
        pos += w.size
        out.biases[i] = vector[pos:pos + b.size].reshape(b.shape).copy()
        pos += b.size
    if pos != vector.size:
        raise ValueError("vector length does not match parameter count")
    return out
