"""Trainable feature scorer and its minibatch training loop.

The scorer maps a per-(query, document) feature vector to a real score and
stands in for a fine-tuned encoder's output head. Two architectures are
supported: a plain linear model and a one-hidden-layer ReLU MLP with a
scalar output. Training is full-precision numpy with Adam and is bit-for-bit
deterministic given the same data stream, configuration and seed.

:class:`ListScorer` wraps the functional layer in a scikit-learn style
estimator (``fit`` / ``predict`` / ``get_params``) so the scorer composes
with the wider ecosystem.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .core import CheckpointError, RankedRun, TrainingDivergedError
from .losses import ListBatch, LossKind
from .validation import as_float_matrix, as_float_vector, check_feature_dim, check_positive_int

ARCHITECTURES = ("linear", "mlp")

_CKPT_MAGIC = b"LTRKCKPT"
_CKPT_VERSION = 1
_ARCH_CODES = {"linear": 0, "mlp": 1}
_ARCH_NAMES = {code: name for name, code in _ARCH_CODES.items()}

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass(frozen=True)
class ScorerParams:
    """Parameters of the scoring function: weight/bias pairs per layer.

    Layer i maps fan_in -> fan_out via ``x @ W + b``; ReLU is applied between
    layers but not after the last, which always has a single output unit.
    """

    architecture: str
    layers: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}; expected one of {ARCHITECTURES}")
        layers = tuple((np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64)) for w, b in self.layers)
        expected_layers = 1 if self.architecture == "linear" else 2
        if len(layers) != expected_layers:
            raise ValueError(f"{self.architecture} scorer needs {expected_layers} layers, got {len(layers)}")
        for w, b in layers:
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ValueError("layer weight must be (fan_in, fan_out) with a matching bias vector")
        if layers[-1][0].shape[1] != 1:
            raise ValueError("output layer must have a single unit")
        for (w_prev, _), (w_next, _) in zip(layers, layers[1:]):
            if w_prev.shape[1] != w_next.shape[0]:
                raise ValueError("consecutive layer dimensions disagree")
        object.__setattr__(self, "layers", layers)

    @property
    def num_features(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.layers[0][0].shape[1] if self.architecture == "mlp" else 0

    def arrays(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in self.layers:
            out.extend((w, b))
        return out

    def is_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())

    def copy(self) -> "ScorerParams":
        return ScorerParams(self.architecture, tuple((w.copy(), b.copy()) for w, b in self.layers))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScorerParams) or self.architecture != other.architecture:
            return False
        return len(self.layers) == len(other.layers) and all(
            np.array_equal(w1, w2) and np.array_equal(b1, b2)
            for (w1, b1), (w2, b2) in zip(self.layers, other.layers)
        )


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; batch_size * list_size examples per step."""

    loss: LossKind = LossKind.LISTWISE_SOFTMAX
    list_size: int = 12
    batch_size: int = 32
    steps: int = 1000
    learning_rate: float = 1e-3
    seed: int = 0
    checkpoint_every: int = 50_000

    def __post_init__(self):
        if isinstance(self.loss, str):
            object.__setattr__(self, "loss", LossKind.from_string(self.loss))
        check_positive_int(self.list_size, "list_size")
        check_positive_int(self.batch_size, "batch_size")
        check_positive_int(self.checkpoint_every, "checkpoint_every")
        if not isinstance(self.steps, (int, np.integer)) or self.steps < 0:
            raise ValueError(f"steps must be a non-negative integer, got {self.steps!r}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate!r}")


def init_params(architecture: str, num_features: int, hidden_dim: int = 64, seed: int = 0) -> ScorerParams:
    """Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases."""
    check_positive_int(num_features, "num_features")
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture!r}; expected one of {ARCHITECTURES}")
    rng = np.random.default_rng(seed)
    if architecture == "linear":
        dims = [(num_features, 1)]
    else:
        check_positive_int(hidden_dim, "hidden_dim")
        dims = [(num_features, hidden_dim), (hidden_dim, 1)]
    layers = []
    for fan_in, fan_out in dims:
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        layers.append((w, np.zeros(fan_out)))
    return ScorerParams(architecture, tuple(layers))


def score_matrix(params: ScorerParams, X) -> np.ndarray:
    """Forward pass over a (n, num_features) matrix; returns (n,) scores."""
    X = as_float_matrix(X)
    check_feature_dim(X.shape[1], params.num_features)
    h = X
    last = len(params.layers) - 1
    for i, (w, b) in enumerate(params.layers):
        h = h @ w + b
        if i != last:
            h = np.maximum(h, 0.0)
    return h[:, 0]


def score(params: ScorerParams, features) -> float:
    """Score a single feature vector."""
    x = as_float_vector(features, "features")
    return float(score_matrix(params, x.reshape(1, -1))[0])


def _forward_backward(params: ScorerParams, X: np.ndarray, grad_scores: np.ndarray):
    """Scores plus parameter gradients for a flat (n, d) batch."""
    activations = [X]
    pre_acts = []
    h = X
    last = len(params.layers) - 1
    for i, (w, b) in enumerate(params.layers):
        pre = h @ w + b
        pre_acts.append(pre)
        h = np.maximum(pre, 0.0) if i != last else pre
        activations.append(h)
    scores = activations[-1][:, 0]

    grads = []
    delta = grad_scores.reshape(-1, 1)
    for i in range(last, -1, -1):
        w, _ = params.layers[i]
        grads.append((activations[i].T @ delta, delta.sum(axis=0)))
        if i > 0:
            delta = (delta @ w.T) * (pre_acts[i - 1] > 0)
    grads.reverse()
    return scores, grads


class _AdamState:
    def __init__(self, params: ScorerParams):
        self.m = [np.zeros_like(a) for a in params.arrays()]
        self.v = [np.zeros_like(a) for a in params.arrays()]
        self.t = 0

    def update(self, params: ScorerParams, grads, learning_rate: float) -> ScorerParams:
        self.t += 1
        flat_grads = [g for pair in grads for g in pair]
        new_arrays = []
        for i, (a, g) in enumerate(zip(params.arrays(), flat_grads)):
            self.m[i] = _ADAM_BETA1 * self.m[i] + (1 - _ADAM_BETA1) * g
            self.v[i] = _ADAM_BETA2 * self.v[i] + (1 - _ADAM_BETA2) * g * g
            m_hat = self.m[i] / (1 - _ADAM_BETA1**self.t)
            v_hat = self.v[i] / (1 - _ADAM_BETA2**self.t)
            new_arrays.append(a - learning_rate * m_hat / (np.sqrt(v_hat) + _ADAM_EPS))
        layers = tuple((new_arrays[2 * i], new_arrays[2 * i + 1]) for i in range(len(params.layers)))
        return ScorerParams(params.architecture, layers)


def _stack_batch(lists: Sequence, list_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    features = np.stack([tl.features for tl in lists])
    labels = np.stack([tl.labels for tl in lists]).astype(np.float64)
    mask = np.stack([tl.mask for tl in lists])
    if features.shape[1] != list_size:
        raise ValueError(f"training lists have size {features.shape[1]}, config expects {list_size}")
    return features, labels, mask


def train(
    data: Iterable,
    config: TrainConfig,
    *,
    architecture: str = "linear",
    hidden_dim: int = 64,
    init: ScorerParams | None = None,
    checkpoint_dir: str | Path | None = None,
    on_step: Callable[[int, float], None] | None = None,
) -> ScorerParams:
    """Run ``config.steps`` Adam steps of the configured loss over the stream.

    ``data`` yields :class:`~ltrkit.data.TrainingList` items of exactly
    ``config.list_size`` entries; the stream is materialized and cycled so
    the step count is exact. Identical (data, config, seed) inputs produce
    bit-identical parameters. When ``checkpoint_dir`` is set, a checkpoint
    is written every ``config.checkpoint_every`` steps and at completion.

    Raises :class:`TrainingDivergedError` with the step number if the loss
    or any parameter becomes non-finite, and ``ValueError`` on an empty
    stream or inconsistent feature dimensions.
    """
    lists = list(data)
    if not lists:
        raise ValueError("empty training stream")
    num_features = lists[0].features.shape[1]
    for tl in lists:
        if tl.features.shape[1] != num_features:
            raise ValueError(
                f"inconsistent feature dimension in training stream: "
                f"{tl.features.shape[1]} vs {num_features}"
            )

    params = init if init is not None else init_params(architecture, num_features, hidden_dim, config.seed)
    check_feature_dim(num_features, params.num_features, "training data vs scorer")
    loss_fn = config.loss.function()
    adam = _AdamState(params)
    ckpt_dir = Path(checkpoint_dir) if checkpoint_dir is not None else None
    if ckpt_dir is not None:
        ckpt_dir.mkdir(parents=True, exist_ok=True)

    cursor = 0
    n_lists = len(lists)
    for step in range(1, config.steps + 1):
        batch_lists = [lists[(cursor + i) % n_lists] for i in range(config.batch_size)]
        cursor = (cursor + config.batch_size) % n_lists
        features, labels, mask = _stack_batch(batch_lists, config.list_size)

        flat = features.reshape(-1, num_features)
        scores = score_matrix(params, flat).reshape(labels.shape)
        loss, grad_scores = loss_fn(ListBatch(scores, labels, mask))
        if not np.isfinite(loss):
            raise TrainingDivergedError(step, f"non-finite loss {loss!r}")
        _, grads = _forward_backward(params, flat, grad_scores.reshape(-1))
        params = adam.update(params, grads, config.learning_rate)
        if not params.is_finite():
            raise TrainingDivergedError(step, "non-finite parameter after update")
        if on_step is not None:
            on_step(step, loss)
        if ckpt_dir is not None and step % config.checkpoint_every == 0:
            save_checkpoint(params, ckpt_dir / f"checkpoint-{step:08d}.bin")

    if ckpt_dir is not None:
        save_checkpoint(params, ckpt_dir / "checkpoint-final.bin")
    return params


def rerank(params: ScorerParams, groups: Iterable) -> RankedRun:
    """Score every document of every query group and build a ranked run."""
    per_query: dict[str, list[tuple[str, float]]] = {}
    for group in groups:
        if group.num_features != params.num_features:
            raise ValueError(
                f"query {group.query_id!r}: feature dimension {group.num_features} "
                f"does not match scorer dimension {params.num_features}"
            )
        if group.query_id in per_query:
            raise ValueError(f"duplicate query {group.query_id!r} in group stream")
        scores = score_matrix(params, group.features)
        per_query[group.query_id] = list(zip(group.doc_ids, scores.tolist()))
    return RankedRun(per_query)


def save_checkpoint(params: ScorerParams, path: str | Path) -> None:
    """Write a versioned binary checkpoint (little-endian float64 payload)."""
    parts = [_CKPT_MAGIC, struct.pack("<IBI", _CKPT_VERSION, _ARCH_CODES[params.architecture], len(params.layers))]
    for w, b in params.layers:
        parts.append(struct.pack("<II", w.shape[0], w.shape[1]))
    for arr in params.arrays():
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_checkpoint(path: str | Path) -> ScorerParams:
    """Read a checkpoint, refusing unknown versions or inconsistent layouts."""
    blob = Path(path).read_bytes()
    header = struct.calcsize("<IBI")
    if len(blob) < len(_CKPT_MAGIC) + header or blob[: len(_CKPT_MAGIC)] != _CKPT_MAGIC:
        raise CheckpointError(f"{path}: not a scorer checkpoint")
    offset = len(_CKPT_MAGIC)
    version, arch_code, n_layers = struct.unpack_from("<IBI", blob, offset)
    offset += header
    if version != _CKPT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    if arch_code not in _ARCH_NAMES or not 1 <= n_layers <= 8:
        raise CheckpointError(f"{path}: corrupt checkpoint header")
    dims = []
    for _ in range(n_layers):
        if offset + 8 > len(blob):
            raise CheckpointError(f"{path}: truncated checkpoint")
        fan_in, fan_out = struct.unpack_from("<II", blob, offset)
        offset += 8
        dims.append((fan_in, fan_out))
    layers = []
    for fan_in, fan_out in dims:
        w_bytes = fan_in * fan_out * 8
        b_bytes = fan_out * 8
        if offset + w_bytes + b_bytes > len(blob):
            raise CheckpointError(f"{path}: truncated checkpoint")
        w = np.frombuffer(blob, dtype="<f8", count=fan_in * fan_out, offset=offset).reshape(fan_in, fan_out)
        offset += w_bytes
        b = np.frombuffer(blob, dtype="<f8", count=fan_out, offset=offset)
        offset += b_bytes
        layers.append((w.copy(), b.copy()))
    if offset != len(blob):
        raise CheckpointError(f"{path}: trailing bytes in checkpoint")
    try:
        return ScorerParams(_ARCH_NAMES[arch_code], tuple(layers))
    except ValueError as exc:
        raise CheckpointError(f"{path}: {exc}") from exc


class ListScorer(BaseEstimator):
    """Scikit-learn style estimator around the trainable scorer.

    Parameters mirror :class:`TrainConfig` plus the architecture choice.
    After ``fit`` the learned parameters live in ``params_`` and the
    per-step training losses in ``loss_history_``.
    """

    def __init__(
        self,
        architecture: str = "linear",
        hidden_dim: int = 64,
        loss: str = "softmax",
        list_size: int = 12,
        batch_size: int = 32,
        steps: int = 1000,
        learning_rate: float = 1e-3,
        seed: int = 0,
        checkpoint_every: int = 50_000,
        checkpoint_dir: str | None = None,
    ):
        self.architecture = architecture
        self.hidden_dim = hidden_dim
        self.loss = loss
        self.list_size = list_size
        self.batch_size = batch_size
        self.steps = steps
        self.learning_rate = learning_rate
        self.seed = seed
        self.checkpoint_every = checkpoint_every
        self.checkpoint_dir = checkpoint_dir

    def _config(self) -> TrainConfig:
        return TrainConfig(
            loss=self.loss,
            list_size=self.list_size,
            batch_size=self.batch_size,
            steps=self.steps,
            learning_rate=self.learning_rate,
            seed=self.seed,
            checkpoint_every=self.checkpoint_every,
        )

    def fit(self, lists, y=None):
        """Train on an iterable of TrainingList items; returns self."""
        history: list[tuple[int, float]] = []
        self.params_ = train(
            lists,
            self._config(),
            architecture=self.architecture,
            hidden_dim=self.hidden_dim,
            checkpoint_dir=self.checkpoint_dir,
            on_step=lambda step, loss: history.append((step, loss)),
        )
        self.loss_history_ = history
        return self

    def _fitted_params(self) -> ScorerParams:
        params = getattr(self, "params_", None)
        if params is None:
            raise NotFittedError("this ListScorer is not fitted yet; call fit or from_checkpoint")
        return params

    def predict(self, X) -> np.ndarray:
        """Scores for a (n, num_features) matrix."""
        return score_matrix(self._fitted_params(), X)

    def rerank(self, groups) -> RankedRun:
        return rerank(self._fitted_params(), groups)

    def save(self, path: str | Path) -> None:
        save_checkpoint(self._fitted_params(), path)

    @classmethod
    def from_checkpoint(cls, path: str | Path) -> "ListScorer":
        params = load_checkpoint(path)
        est = cls(architecture=params.architecture, hidden_dim=params.hidden_dim or 64)
        est.params_ = params
        est.loss_history_ = []
        return est
