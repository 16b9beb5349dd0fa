"""The trainable summarization network.

Per-frame spatial features feed a bi-directional gated recurrent encoder;
each frame's spatial vector and both temporal states are concatenated
into a spatio-temporal aggregate; three independent two-layer perceptrons
map the aggregate to a diversity feature vector (phi), a scalar quality
score in (0, 1) (q), and a four-way actionness distribution (p).

All forward paths are built on the autodiff tape so the training gradient
is exact reverse-mode differentiation of the joint loss; the public
numpy-facing functions simply evaluate the same graph on constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import NonFiniteValue, NotPositiveDefinite, ShapeMismatch, SingularSubset
from .validation import N_RANKS, check_features

__all__ = [
    "ModelConfig",
    "GruDirectionParams",
    "GruParams",
    "MlpParams",
    "HeadParams",
    "ModelParameters",
    "init_parameters",
    "gru_cell_forward",
    "bigru_forward",
    "aggregate",
    "heads_forward",
    "forward_all",
    "LossParts",
    "joint_loss_value",
    "loss_and_grad",
    "model_backward",
]


@dataclass(frozen=True)
class ModelConfig:
    """Architecture widths. Defaults follow the full-scale setup."""

    input_dim: int = 1024
    hidden_units: int = 256  # per direction
    phi_dim: int = 256
    head_hidden: int = 256

    @property
    def aggregate_dim(self) -> int:
        return self.input_dim + 2 * self.hidden_units


@dataclass
class GruDirectionParams:
    w_z: np.ndarray
    u_z: np.ndarray
    b_z: np.ndarray
    w_r: np.ndarray
    u_r: np.ndarray
    b_r: np.ndarray
    w_h: np.ndarray
    u_h: np.ndarray
    b_h: np.ndarray


@dataclass
class GruParams:
    fwd: GruDirectionParams
    bwd: GruDirectionParams


@dataclass
class MlpParams:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray


@dataclass
class HeadParams:
    phi: MlpParams
    quality: MlpParams
    actionness: MlpParams


_GATE_FIELDS = ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h")
_MLP_FIELDS = ("w1", "b1", "w2", "b2")


def _leaf_specs(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Canonical (name, shape) list defining the flat parameter layout."""
    d, h = config.input_dim, config.hidden_units
    agg, hh = config.aggregate_dim, config.head_hidden
    specs: list[tuple[str, tuple[int, ...]]] = []
    for direction in ("fwd", "bwd"):
        for gate in ("z", "r", "h"):
            specs.append((f"gru.{direction}.w_{gate}", (d, h)))
            specs.append((f"gru.{direction}.u_{gate}", (h, h)))
            specs.append((f"gru.{direction}.b_{gate}", (h,)))
    for head, out in (("phi", config.phi_dim), ("quality", 1), ("actionness", N_RANKS)):
        specs.append((f"heads.{head}.w1", (agg, hh)))
        specs.append((f"heads.{head}.b1", (hh,)))
        specs.append((f"heads.{head}.w2", (hh, out)))
        specs.append((f"heads.{head}.b2", (out,)))
    return specs


@dataclass
class ModelParameters:
    """All trainable weights plus the architecture they belong to."""

    config: ModelConfig
    gru: GruParams
    heads: HeadParams

    def _lookup(self, name: str) -> np.ndarray:
        obj = self
        for part in name.split("."):
            obj = getattr(obj, part)
        return obj

    def leaves(self) -> list[tuple[str, np.ndarray]]:
        return [(name, self._lookup(name)) for name, _ in _leaf_specs(self.config)]

    @property
    def n_params(self) -> int:
        return sum(arr.size for _, arr in self.leaves())

    def flatten(self) -> np.ndarray:
        return np.concatenate([arr.ravel() for _, arr in self.leaves()])

    @classmethod
    def from_flat(cls, config: ModelConfig, vec: np.ndarray) -> "ModelParameters":
        specs = _leaf_specs(config)
        total = sum(int(np.prod(shape)) for _, shape in specs)
        vec = np.asarray(vec, dtype=np.float64).ravel()
        if vec.size != total:
            raise ShapeMismatch(f"flat vector has {vec.size} entries, expected {total}")
        arrays = {}
        offset = 0
        for name, shape in specs:
            size = int(np.prod(shape))
            arrays[name] = vec[offset : offset + size].reshape(shape).copy()
            offset += size

        def direction(prefix):
            return GruDirectionParams(
                **{f: arrays[f"{prefix}.{f}"] for f in _GATE_FIELDS}
            )

        def mlp(prefix):
            return MlpParams(**{f: arrays[f"{prefix}.{f}"] for f in _MLP_FIELDS})

        return cls(
            config=config,
            gru=GruParams(fwd=direction("gru.fwd"), bwd=direction("gru.bwd")),
            heads=HeadParams(
                phi=mlp("heads.phi"),
                quality=mlp("heads.quality"),
                actionness=mlp("heads.actionness"),
            ),
        )

    def copy(self) -> "ModelParameters":
        return ModelParameters.from_flat(self.config, self.flatten())


def init_parameters(config: ModelConfig, seed: int | np.random.Generator) -> ModelParameters:
    """Deterministic initialization: uniform(-a, a) with a^2 = 6 / (fan_in + fan_out)
    for every weight matrix, zeros for biases."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    chunks = []
    for name, shape in _leaf_specs(config):
        if len(shape) == 1:
            chunks.append(np.zeros(shape))
        else:
            a = math.sqrt(6.0 / (shape[0] + shape[1]))
            chunks.append(rng.uniform(-a, a, size=shape).ravel())
    return ModelParameters.from_flat(config, np.concatenate(chunks))


# graph construction ------------------------------------------------------


def _param_tensors(params: ModelParameters, requires_grad: bool):
    names = []
    tensors = {}
    for name, arr in params.leaves():
        names.append(name)
        tensors[name] = ad.Tensor(arr, requires_grad=requires_grad)
    return names, tensors


def _gru_cell(xz, xr, xh, h_prev, p, prefix):
    z = ad.sigmoid(xz + h_prev @ p[f"{prefix}.u_z"] + p[f"{prefix}.b_z"])
    r = ad.sigmoid(xr + h_prev @ p[f"{prefix}.u_r"] + p[f"{prefix}.b_r"])
    cand = ad.tanh(xh + (r * h_prev) @ p[f"{prefix}.u_h"] + p[f"{prefix}.b_h"])
    return (1.0 - z) * h_prev + z * cand


def _scan(x_const, p, prefix, hidden):
    """Run one direction over the rows of x_const; returns an (n, h) tensor."""
    n = x_const.value.shape[0]
    xw = {g: x_const @ p[f"{prefix}.w_{g}"] for g in ("z", "r", "h")}
    h = ad.constant(np.zeros((1, hidden)))
    rows = []
    for i in range(n):
        h = _gru_cell(
            ad.take_row(xw["z"], i), ad.take_row(xw["r"], i), ad.take_row(xw["h"], i),
            h, p, prefix,
        )
        rows.append(h)
    return rows


def _bigru_graph(x_const, p, config):
    fwd_rows = _scan(x_const, p, "gru.fwd", config.hidden_units)
    x_rev = ad.constant(np.ascontiguousarray(x_const.value[::-1]))
    bwd_rows = _scan(x_rev, p, "gru.bwd", config.hidden_units)
    h_fwd = ad.stack_rows(fwd_rows)
    h_bwd = ad.stack_rows(list(reversed(bwd_rows)))
    return ad.hconcat([h_fwd, h_bwd])


def _mlp_graph(f, p, prefix):
    hidden = ad.tanh(f @ p[f"{prefix}.w1"] + p[f"{prefix}.b1"])
    return hidden @ p[f"{prefix}.w2"] + p[f"{prefix}.b2"]


def _heads_graph(f, p):
    phi = _mlp_graph(f, p, "heads.phi")
    q = ad.sigmoid(_mlp_graph(f, p, "heads.quality"))
    act_logits = _mlp_graph(f, p, "heads.actionness")
    return phi, q, act_logits


def _forward_graph(params: ModelParameters, features: np.ndarray, requires_grad: bool):
    x = check_features(features)
    if x.shape[1] != params.config.input_dim:
        raise ShapeMismatch(
            f"features have dim {x.shape[1]}, model expects {params.config.input_dim}"
        )
    names, p = _param_tensors(params, requires_grad)
    x_const = ad.constant(x)
    h = _bigru_graph(x_const, p, params.config)
    f = ad.hconcat([x_const, h])
    phi, q, act_logits = _heads_graph(f, p)
    return names, p, h, f, phi, q, act_logits


# public forward surface ---------------------------------------------------


def gru_cell_forward(x, h_prev, direction: GruDirectionParams) -> np.ndarray:
    """One recurrent step: update/reset gates, candidate state, interpolation."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    h_prev = np.asarray(h_prev, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != direction.w_z.shape[0] or h_prev.shape[1] != direction.u_z.shape[0]:
        raise ShapeMismatch("input or state width does not match gate parameters")
    p = {f"d.{f}": ad.constant(getattr(direction, f)) for f in _GATE_FIELDS}
    xc = ad.constant(x)
    out = _gru_cell(
        xc @ p["d.w_z"], xc @ p["d.w_r"], xc @ p["d.w_h"],
        ad.constant(h_prev), p, "d",
    )
    return out.value.ravel()


def bigru_forward(features: np.ndarray, gru: GruParams) -> np.ndarray:
    """Both directions from zero state; row i is [h_fwd[i], h_bwd[i]]."""
    x = check_features(features)
    if x.shape[1] != gru.fwd.w_z.shape[0]:
        raise ShapeMismatch("feature dim does not match encoder input width")
    hidden = gru.fwd.u_z.shape[0]
    config = ModelConfig(input_dim=x.shape[1], hidden_units=hidden)
    p = {}
    for direction in ("fwd", "bwd"):
        src = getattr(gru, direction)
        for f in _GATE_FIELDS:
            p[f"gru.{direction}.{f}"] = ad.constant(getattr(src, f))
    return _bigru_graph(ad.constant(x), p, config).value


def aggregate(features: np.ndarray, temporal: np.ndarray) -> np.ndarray:
    """Row-wise concatenation [spatial | forward temporal | backward temporal]."""
    features = np.asarray(features, dtype=np.float64)
    temporal = np.asarray(temporal, dtype=np.float64)
    if features.ndim != 2 or temporal.ndim != 2 or features.shape[0] != temporal.shape[0]:
        raise ShapeMismatch(
            f"cannot aggregate shapes {features.shape} and {temporal.shape}"
        )
    return np.hstack([features, temporal])


def heads_forward(aggregate_features: np.ndarray, heads: HeadParams):
    """(phi, q, p) for every frame: diversity features, quality in (0, 1),
    and a row-stochastic rank distribution."""
    f = np.asarray(aggregate_features, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] != heads.phi.w1.shape[0]:
        raise ShapeMismatch("aggregate width does not match head parameters")
    p = {}
    for head in ("phi", "quality", "actionness"):
        src = getattr(heads, head)
        for fld in _MLP_FIELDS:
            p[f"heads.{head}.{fld}"] = ad.constant(getattr(src, fld))
    phi, q, act_logits = _heads_graph(ad.constant(f), p)
    probs = np.exp(ad.log_softmax_rows(act_logits).value)
    return phi.value, q.value.ravel(), probs


@dataclass(frozen=True)
class ForwardOutputs:
    temporal: np.ndarray  # (n, 2h)
    aggregate: np.ndarray  # (n, d + 2h)
    phi: np.ndarray  # (n, phi_dim)
    q: np.ndarray  # (n,)
    p: np.ndarray  # (n, 4)


def forward_all(params: ModelParameters, features: np.ndarray) -> ForwardOutputs:
    """Full deterministic forward pass on one video."""
    _, _, h, f, phi, q, act_logits = _forward_graph(params, features, requires_grad=False)
    probs = np.exp(ad.log_softmax_rows(act_logits).value)
    return ForwardOutputs(
        temporal=h.value,
        aggregate=f.value,
        phi=phi.value,
        q=q.value.ravel(),
        p=probs,
    )


# loss and gradient --------------------------------------------------------


@dataclass(frozen=True)
class LossParts:
    summarization: float
    actionness: float
    joint: float


def _loss_graph(params, features, subset, rank_onehot, lam):
    names, p, _, _, phi, q, act_logits = _forward_graph(params, features, requires_grad=True)
    n = phi.value.shape[0]
    subset = np.asarray(subset, dtype=np.intp)
    rank_onehot = np.asarray(rank_onehot, dtype=np.float64)
    if rank_onehot.shape != (n, N_RANKS):
        raise ShapeMismatch(f"rank targets must have shape ({n}, {N_RANKS})")

    kernel = ad.gram(phi * q)
    norm = ad.logdet_psd(kernel + np.eye(n))
    try:
        sub = ad.logdet_psd(ad.submatrix(kernel, subset))
    except NotPositiveDefinite as exc:
        raise SingularSubset(
            f"target subset of size {subset.size} has a singular kernel minor"
        ) from exc
    s_term = norm - sub
    ce = -ad.tsum(ad.constant(rank_onehot) * ad.log_softmax_rows(act_logits))
    total = s_term + float(lam) * ce
    return names, p, s_term, ce, total


def joint_loss_value(params, features, subset, rank_onehot, lam) -> LossParts:
    """Evaluate the joint loss without differentiating it."""
    _, _, s_term, ce, total = _loss_graph(params, features, subset, rank_onehot, lam)
    return LossParts(
        summarization=s_term.item(), actionness=ce.item(), joint=total.item()
    )


def loss_and_grad(params, features, subset, rank_onehot, lam):
    """Joint loss plus its gradient over the flat parameter vector."""
    names, p, s_term, ce, total = _loss_graph(params, features, subset, rank_onehot, lam)
    parts = LossParts(
        summarization=s_term.item(), actionness=ce.item(), joint=total.item()
    )
    if not math.isfinite(parts.joint):
        raise NonFiniteValue("joint loss is non-finite")
    ad.backward(total)
    grads = []
    for name in names:
        t = p[name]
        grads.append(
            t.grad.ravel() if t.grad is not None else np.zeros(t.value.size)
        )
    grad = np.concatenate(grads)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteValue("gradient contains non-finite values")
    return parts, grad


def model_backward(params, features, subset, rank_onehot, lam) -> np.ndarray:
    """Gradient of the joint loss with respect to the flat parameters."""
    return loss_and_grad(params, features, subset, rank_onehot, lam)[1]
