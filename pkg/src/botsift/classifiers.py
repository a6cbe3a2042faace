"""From-scratch classifiers: Gaussian naive Bayes, k-nearest-neighbour,
and a one-hidden-layer sigmoid MLP.

All three share one scoring convention: score(x) is the model's degree of
belief that x is botnet (label 1), in [0, 1]. predict_batch thresholds
scores at 0.5 (inclusive). Models are frozen dataclasses over read-only
arrays and serialize to JSON, reloading bit-exactly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from .errors import DivergenceError, LoadError, TrainingError
from .flows import Dataset

_LOG_2PI = float(np.log(2.0 * np.pi))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Gaussian naive Bayes


@dataclass(frozen=True)
class GnbModel:
    feature_names: tuple[str, ...]
    priors: np.ndarray      # (2,) class frequencies
    means: np.ndarray       # (2, d)
    variances: np.ndarray   # (2, d), already smoothed
    smoothing: float
    provenance: dict = field(default_factory=dict)


def gnb_fit(train: Dataset) -> GnbModel:
    """Fit per-class feature Gaussians with frequency priors.

    Variances are maximum-likelihood (divide by class count) plus a
    smoothing term of 1e-9 times the largest per-feature variance over the
    whole training set, so a within-class constant feature cannot produce
    a zero variance.
    """
    normal, botnet = train.class_counts
    if normal == 0 or botnet == 0:
        raise TrainingError(
            f"naive Bayes needs both classes, class counts are ({normal}, {botnet})")
    X, y = train.features, train.labels
    eps = 1e-9 * float(X.var(axis=0).max())
    if eps == 0.0:
        eps = 1e-12  # every feature constant over the whole set
    priors = np.array([normal, botnet], dtype=np.float64) / train.n_rows
    means = np.empty((2, train.n_features))
    variances = np.empty((2, train.n_features))
    for c in (0, 1):
        rows = X[y == c]
        means[c] = rows.mean(axis=0)
        variances[c] = rows.var(axis=0) + eps
    return GnbModel(
        feature_names=train.feature_names,
        priors=_frozen(priors),
        means=_frozen(means),
        variances=_frozen(variances),
        smoothing=eps,
    )


def gnb_log_joint(model: GnbModel, X: np.ndarray) -> np.ndarray:
    """log(prior * likelihood) per class, shape (n, 2). Log-space throughout."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    out = np.empty((X.shape[0], 2))
    for c in (0, 1):
        var = model.variances[c]
        gap = X - model.means[c]
        log_like = -0.5 * (_LOG_2PI + np.log(var) + gap * gap / var).sum(axis=1)
        out[:, c] = np.log(model.priors[c]) + log_like
    return out


def gnb_posteriors(model: GnbModel, X: np.ndarray) -> np.ndarray:
    """Class posteriors, shape (n, 2); each row sums to 1."""
    joint = gnb_log_joint(model, X)
    return np.exp(joint - logsumexp(joint, axis=1, keepdims=True))


def gnb_score_batch(model: GnbModel, X: np.ndarray) -> np.ndarray:
    return gnb_posteriors(model, X)[:, 1]


def gnb_score(model: GnbModel, row: np.ndarray) -> float:
    """Posterior probability that one row is botnet."""
    return float(gnb_score_batch(model, np.atleast_2d(row))[0])


# ---------------------------------------------------------------------------
# k-nearest-neighbour


@dataclass(frozen=True)
class KnnModel:
    feature_names: tuple[str, ...]
    points: np.ndarray
    labels: np.ndarray
    k: int
    provenance: dict = field(default_factory=dict)


def knn_fit(train: Dataset, k: int = 5) -> KnnModel:
    if k < 1:
        raise TrainingError(f"k must be >= 1, got {k}")
    if k > train.n_rows:
        raise TrainingError(f"k={k} exceeds the {train.n_rows} training rows")
    return KnnModel(
        feature_names=train.feature_names,
        points=_frozen(train.features),
        labels=_frozen(np.asarray(train.labels, dtype=np.float64)),
        k=k,
    )


def _knn_chunk(n_train: int) -> int:
    return int(np.clip(16_000_000 // max(n_train, 1), 1, 1024))


def _knn_votes(model: KnnModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(botnet votes among the k nearest, label of the single nearest).

    Exact brute-force Euclidean. Ties at the k-th rank admit the lower
    training row index; the nearest-neighbour label also resolves distance
    ties toward the lower index.
    """
    pts = model.points
    k = model.k
    train_sq = np.einsum("ij,ij->i", pts, pts)
    votes = np.empty(X.shape[0])
    nearest = np.empty(X.shape[0])
    chunk = _knn_chunk(pts.shape[0])
    for start in range(0, X.shape[0], chunk):
        q = X[start:start + chunk]
        d2 = np.einsum("ij,ij->i", q, q)[:, None] + train_sq[None, :] - 2.0 * (q @ pts.T)
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1:k]
        less = d2 < kth
        n_less = less.sum(axis=1, keepdims=True)
        equal = d2 == kth
        take_equal = equal & (np.cumsum(equal, axis=1) <= k - n_less)
        chosen = less | take_equal
        votes[start:start + chunk] = chosen @ model.labels
        nearest[start:start + chunk] = model.labels[np.argmin(d2, axis=1)]
    return votes, nearest


def _check_width(names: tuple[str, ...], X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != len(names):
        raise LoadError(
            f"model expects {len(names)} features, got {X.shape[1]}")
    return X


def knn_score_batch(model: KnnModel, X: np.ndarray) -> np.ndarray:
    """Fraction of the k nearest training rows labelled botnet."""
    X = _check_width(model.feature_names, X)
    if X.shape[0] == 0:
        return np.empty(0)
    votes, _ = _knn_votes(model, X)
    return votes / model.k


def knn_score(model: KnnModel, row: np.ndarray) -> float:
    return float(knn_score_batch(model, np.atleast_2d(row))[0])


def knn_predict_batch(model: KnnModel, X: np.ndarray) -> np.ndarray:
    """Majority vote of the k nearest; an even-k vote tie takes the label
    of the single nearest training row."""
    X = _check_width(model.feature_names, X)
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    votes, nearest = _knn_votes(model, X)
    out = np.where(votes * 2 == model.k, nearest, votes * 2 > model.k)
    return out.astype(np.int64)


def knn_predict(model: KnnModel, row: np.ndarray) -> int:
    return int(knn_predict_batch(model, np.atleast_2d(row))[0])


# ---------------------------------------------------------------------------
# Multi-layer perceptron (one hidden layer, sigmoid activations)


@dataclass(frozen=True)
class MlpConfig:
    hidden: int = 16
    learning_rate: float = 0.1
    epochs: int = 50
    batch_size: int = 32
    seed: int = 0


@dataclass(frozen=True)
class MlpModel:
    feature_names: tuple[str, ...]
    w_in: np.ndarray    # (d, hidden)
    b_in: np.ndarray    # (hidden,)
    w_out: np.ndarray   # (hidden,)
    b_out: float
    config: MlpConfig
    epoch_losses: tuple[float, ...] = ()
    provenance: dict = field(default_factory=dict)


def _mlp_forward(model: MlpModel, X: np.ndarray):
    z1 = X @ model.w_in + model.b_in
    a1 = expit(z1)
    z2 = a1 @ model.w_out + model.b_out
    return a1, z2


def mlp_loss_and_grads(model: MlpModel, X: np.ndarray, y: np.ndarray):
    """Mean binary cross-entropy over the batch and its exact gradients.

    Loss uses the softplus identity bce = softplus(z) - y*z on the output
    pre-activation, which stays finite for any finite z.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    a1, z2 = _mlp_forward(model, X)
    p = expit(z2)
    loss = float(np.mean(np.logaddexp(0.0, z2) - y * z2))
    delta2 = (p - y) / n
    grad_w_out = a1.T @ delta2
    grad_b_out = float(delta2.sum())
    delta1 = np.outer(delta2, model.w_out) * a1 * (1.0 - a1)
    grad_w_in = X.T @ delta1
    grad_b_in = delta1.sum(axis=0)
    grads = {
        "w_in": grad_w_in,
        "b_in": grad_b_in,
        "w_out": grad_w_out,
        "b_out": grad_b_out,
    }
    return loss, grads


def mlp_init(feature_count: int, config: MlpConfig,
             feature_names: tuple[str, ...] | None = None) -> MlpModel:
    """Seeded uniform [-0.5, 0.5] initialization (weights and biases)."""
    rng = np.random.default_rng(config.seed)
    names = feature_names or tuple(f"f{i}" for i in range(feature_count))
    return MlpModel(
        feature_names=names,
        w_in=_frozen(rng.uniform(-0.5, 0.5, (feature_count, config.hidden))),
        b_in=_frozen(rng.uniform(-0.5, 0.5, config.hidden)),
        w_out=_frozen(rng.uniform(-0.5, 0.5, config.hidden)),
        b_out=float(rng.uniform(-0.5, 0.5)),
        config=config,
    )


def mlp_fit(train: Dataset, config: MlpConfig = MlpConfig()) -> MlpModel:
    """Mini-batch gradient descent on mean binary cross-entropy.

    Rows are reshuffled every epoch from the model seed's stream. The
    recorded per-epoch loss is the size-weighted mean of the batch losses
    seen during that epoch. A non-finite epoch loss aborts training with
    a divergence error naming the epoch (1-based).
    """
    if config.epochs < 0 or config.batch_size < 1 or config.hidden < 1:
        raise TrainingError(f"invalid MLP configuration: {config}")
    X, y = train.features, np.asarray(train.labels, dtype=np.float64)
    n = train.n_rows
    if n == 0:
        raise TrainingError("cannot train on an empty dataset")
    rng = np.random.default_rng(config.seed)
    w_in = rng.uniform(-0.5, 0.5, (train.n_features, config.hidden))
    b_in = rng.uniform(-0.5, 0.5, config.hidden)
    w_out = rng.uniform(-0.5, 0.5, config.hidden)
    b_out = float(rng.uniform(-0.5, 0.5))
    lr = config.learning_rate

    losses: list[float] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            Xb, yb = X[idx], y[idx]
            b = len(idx)
            z1 = Xb @ w_in + b_in
            a1 = expit(z1)
            z2 = a1 @ w_out + b_out
            p = expit(z2)
            total += float(np.sum(np.logaddexp(0.0, z2) - yb * z2))
            delta2 = (p - yb) / b
            delta1 = np.outer(delta2, w_out) * a1 * (1.0 - a1)
            w_out = w_out - lr * (a1.T @ delta2)
            b_out = b_out - lr * float(delta2.sum())
            w_in = w_in - lr * (Xb.T @ delta1)
            b_in = b_in - lr * delta1.sum(axis=0)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise DivergenceError(epoch)
        losses.append(epoch_loss)

    return MlpModel(
        feature_names=train.feature_names,
        w_in=_frozen(w_in),
        b_in=_frozen(b_in),
        w_out=_frozen(w_out),
        b_out=b_out,
        config=config,
        epoch_losses=tuple(losses),
    )


def mlp_score_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    X = _check_width(model.feature_names, X)
    if X.shape[0] == 0:
        return np.empty(0)
    _, z2 = _mlp_forward(model, X)
    return expit(z2)


def mlp_score(model: MlpModel, row: np.ndarray) -> float:
    return float(mlp_score_batch(model, np.atleast_2d(row))[0])


# ---------------------------------------------------------------------------
# Shared prediction surface

Model = GnbModel | KnnModel | MlpModel

MODEL_NAMES = ("gnb", "knn", "mlp")


def fit_model(name: str, train: Dataset, params: dict | None = None) -> Model:
    """Fit a classifier by name. params are the model's hyperparameters:
    {"k": ...} for knn, MlpConfig fields for mlp, nothing for gnb."""
    params = dict(params or {})
    if name == "gnb":
        if params:
            raise TrainingError(f"gnb takes no hyperparameters, got {params}")
        return gnb_fit(train)
    if name == "knn":
        k = params.pop("k", 5)
        if params:
            raise TrainingError(f"unknown knn hyperparameters: {params}")
        return knn_fit(train, k=k)
    if name == "mlp":
        try:
            config = MlpConfig(**params)
        except TypeError:
            raise TrainingError(f"invalid mlp hyperparameters: {params}")
        return mlp_fit(train, config)
    raise TrainingError(f"unknown model {name!r}, expected one of {MODEL_NAMES}")


def score_batch(model: Model, data: Dataset | np.ndarray) -> np.ndarray:
    """Botnet scores in [0, 1] for every row."""
    X = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2:
        raise LoadError("score_batch expects a 2-d feature matrix")
    if X.shape[1] != len(model.feature_names):
        raise LoadError(
            f"model expects {len(model.feature_names)} features, got {X.shape[1]}")
    if X.shape[0] == 0:
        return np.empty(0)
    if isinstance(model, GnbModel):
        return gnb_score_batch(model, X)
    if isinstance(model, KnnModel):
        return knn_score_batch(model, X)
    if isinstance(model, MlpModel):
        return mlp_score_batch(model, X)
    raise TrainingError(f"unknown model type {type(model).__name__}")


def threshold_labels(scores: np.ndarray) -> np.ndarray:
    """Scores to labels: botnet (1) when score >= 0.5."""
    return (np.asarray(scores) >= 0.5).astype(np.int64)


def predict_batch(model: Model, data: Dataset | np.ndarray) -> np.ndarray:
    """Labels for every row; empty input yields an empty vector."""
    return threshold_labels(score_batch(model, data))


# ---------------------------------------------------------------------------
# Serialization


def _array_out(a: np.ndarray) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def save_model(model: Model, path: str) -> None:
    """Write a model to structured text (JSON). Floats keep full precision
    via repr, so load_model(save_model(m)) reproduces m bit-exactly."""
    if isinstance(model, GnbModel):
        payload = {
            "kind": "gnb",
            "feature_names": list(model.feature_names),
            "priors": _array_out(model.priors),
            "means": _array_out(model.means),
            "variances": _array_out(model.variances),
            "smoothing": model.smoothing,
            "provenance": model.provenance,
        }
    elif isinstance(model, KnnModel):
        payload = {
            "kind": "knn",
            "feature_names": list(model.feature_names),
            "points": _array_out(model.points),
            "labels": _array_out(model.labels),
            "k": model.k,
            "provenance": model.provenance,
        }
    elif isinstance(model, MlpModel):
        payload = {
            "kind": "mlp",
            "feature_names": list(model.feature_names),
            "w_in": _array_out(model.w_in),
            "b_in": _array_out(model.b_in),
            "w_out": _array_out(model.w_out),
            "b_out": model.b_out,
            "config": dataclasses.asdict(model.config),
            "epoch_losses": list(model.epoch_losses),
            "provenance": model.provenance,
        }
    else:
        raise TrainingError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    kind = payload.get("kind")
    names = tuple(payload["feature_names"])
    provenance = payload.get("provenance", {})
    if kind == "gnb":
        return GnbModel(
            feature_names=names,
            priors=_frozen(payload["priors"]),
            means=_frozen(payload["means"]),
            variances=_frozen(payload["variances"]),
            smoothing=float(payload["smoothing"]),
            provenance=provenance,
        )
    if kind == "knn":
        return KnnModel(
            feature_names=names,
            points=_frozen(payload["points"]),
            labels=_frozen(payload["labels"]),
            k=int(payload["k"]),
            provenance=provenance,
        )
    if kind == "mlp":
        return MlpModel(
            feature_names=names,
            w_in=_frozen(payload["w_in"]),
            b_in=_frozen(payload["b_in"]),
            w_out=_frozen(payload["w_out"]),
            b_out=float(payload["b_out"]),
            config=MlpConfig(**payload["config"]),
            epoch_losses=tuple(payload["epoch_losses"]),
            provenance=provenance,
        )
    raise LoadError(f"{path}: unknown model kind {kind!r}")
