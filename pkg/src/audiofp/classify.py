"""k-NN and Gaussian-mixture classifiers over feature vectors.

Both classifiers z-score inputs with statistics taken from the training data,
so features measured in Hz and unitless ratios can share one distance metric.
Trained models are immutable and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    KTooLarge,
    TooFewSamples,
)

VARIANCE_FLOOR = 1e-6
EM_MAX_ITER = 200
EM_TOL = 1e-6

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class NormStats:
    """Per-dimension mean and standard deviation; zero stds are set to 1."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "NormStats":
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        std = np.where(std == 0.0, 1.0, std)
        return cls(mean=mean, std=std)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


def _as_matrix(vectors) -> np.ndarray:
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return x


# ---------------------------------------------------------------------------
# k-nearest neighbors


@dataclass(frozen=True)
class KnnModel:
    exemplars: np.ndarray  # z-scored training vectors, (n, d)
    labels: tuple[str, ...]
    k: int
    norm: NormStats


def knn_train(vectors, labels, k: int) -> KnnModel:
    """Store z-scored training vectors for majority-vote lookup."""
    x = _as_matrix(vectors)
    labels = tuple(str(l) for l in labels)
    if x.shape[0] == 0:
        raise EmptyTrainingSet("no training vectors")
    if len(labels) != x.shape[0]:
        raise ValueError("label count does not match vector count")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > x.shape[0]:
        raise KTooLarge(f"k={k} exceeds {x.shape[0]} training vectors")
    norm = NormStats.fit(x)
    return KnnModel(exemplars=norm.apply(x), labels=labels, k=k, norm=norm)


def knn_classify(model: KnnModel, query) -> tuple[str, int]:
    """Majority label among the k nearest exemplars, with its vote count.

    Ties break toward the smaller summed distance, then the lexicographically
    smaller label.
    """
    q = np.asarray(query, dtype=np.float64).ravel()
    if q.size != model.exemplars.shape[1]:
        raise DimensionMismatch(
            f"query has {q.size} dimensions, model has {model.exemplars.shape[1]}"
        )
    dists = np.sqrt(np.sum((model.exemplars - model.norm.apply(q)) ** 2, axis=1))
    nearest = np.argsort(dists, kind="stable")[: model.k]

    votes: dict[str, int] = {}
    sums: dict[str, float] = {}
    for i in nearest:
        label = model.labels[i]
        votes[label] = votes.get(label, 0) + 1
        sums[label] = sums.get(label, 0.0) + float(dists[i])
    best = min(votes, key=lambda l: (-votes[l], sums[l], l))
    return best, votes[best]


# ---------------------------------------------------------------------------
# Gaussian mixtures


@dataclass(frozen=True)
class GaussianMixture:
    """Diagonal-covariance mixture for one class."""

    weights: np.ndarray  # (k,)
    means: np.ndarray  # (k, d)
    variances: np.ndarray  # (k, d), floored
    log_likelihood_trace: tuple[float, ...]


@dataclass(frozen=True)
class GmmModel:
    mixtures: dict[str, GaussianMixture]
    n_components: int
    norm: NormStats


def _kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k initial means from the data, spread by squared distance."""
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    for _ in range(k - 1):
        d2 = np.min(
            [np.sum((x - c) ** 2, axis=1) for c in centers], axis=0
        )
        total = d2.sum()
        if total > 0:
            probs = d2 / total
        else:
            probs = np.full(n, 1.0 / n)
        centers.append(x[rng.choice(n, p=probs)])
    return np.array(centers)


def _component_log_scores(x, weights, means, variances) -> np.ndarray:
    """(n, k) array of log w_j + log N(x | mu_j, diag var_j)."""
    diff = x[:, None, :] - means[None, :, :]
    comp = -0.5 * (
        np.sum(diff**2 / variances[None, :, :], axis=2)
        + np.sum(np.log(variances), axis=1)[None, :]
        + x.shape[1] * _LOG_2PI
    )
    return comp + np.log(weights)[None, :]


def _log_density(x, weights, means, variances) -> np.ndarray:
    """Per-sample mixture log-density via log-sum-exp, (n,)."""
    return logsumexp(_component_log_scores(x, weights, means, variances), axis=1)


def _responsibilities(x, weights, means, variances):
    comp = _component_log_scores(x, weights, means, variances)
    log_norm = logsumexp(comp, axis=1, keepdims=True)
    return np.exp(comp - log_norm), float(log_norm.sum())


def gmm_fit(vectors, n_components: int, seed: int) -> GaussianMixture:
    """EM fit of a diagonal-covariance mixture on one class's vectors.

    Initialization: k-means++ means, uniform weights, per-dimension data
    variance. Stops when the log-likelihood gain drops below 1e-6 or after
    200 iterations; variances are floored at 1e-6 every M-step.
    """
    x = _as_matrix(vectors)
    n, d = x.shape
    if n < n_components:
        raise TooFewSamples(f"{n} samples cannot support {n_components} components")

    rng = np.random.default_rng(seed)
    means = _kmeans_plusplus(x, n_components, rng)
    weights = np.full(n_components, 1.0 / n_components)
    data_var = np.maximum(x.var(axis=0), VARIANCE_FLOOR)
    variances = np.tile(data_var, (n_components, 1))

    trace = []
    prev_ll = -np.inf
    for _ in range(EM_MAX_ITER):
        resp, ll = _responsibilities(x, weights, means, variances)
        trace.append(ll)
        if ll - prev_ll < EM_TOL and np.isfinite(prev_ll):
            break
        prev_ll = ll
        # M-step
        counts = resp.sum(axis=0)
        weights = counts / n
        safe = np.maximum(counts, 1e-300)[:, None]
        means = (resp.T @ x) / safe
        diff = x[:, None, :] - means[None, :, :]
        variances = np.einsum("nk,nkd->kd", resp, diff**2) / safe
        variances = np.maximum(variances, VARIANCE_FLOOR)

    return GaussianMixture(
        weights=weights,
        means=means,
        variances=variances,
        log_likelihood_trace=tuple(trace),
    )


def gmm_train(vectors, labels, n_components: int, seed: int) -> GmmModel:
    """Fit one mixture per class on z-scored data, deterministically seeded."""
    x = _as_matrix(vectors)
    labels = [str(l) for l in labels]
    if x.shape[0] == 0:
        raise EmptyTrainingSet("no training vectors")
    norm = NormStats.fit(x)
    z = norm.apply(x)
    classes = sorted(set(labels))
    child_seeds = np.random.SeedSequence(seed).spawn(len(classes))
    mixtures = {}
    for cls, child in zip(classes, child_seeds):
        rows = z[np.array([l == cls for l in labels])]
        mixtures[cls] = gmm_fit(rows, n_components, int(child.generate_state(1)[0]))
    return GmmModel(mixtures=mixtures, n_components=n_components, norm=norm)


def gmm_classify(model: GmmModel, query) -> tuple[str, dict[str, float]]:
    """Class with the highest mixture log-density; ties go lexicographic."""
    q = np.asarray(query, dtype=np.float64).ravel()
    dim = model.norm.mean.size
    if q.size != dim:
        raise DimensionMismatch(f"query has {q.size} dimensions, model has {dim}")
    z = model.norm.apply(q).reshape(1, -1)
    scores = {
        cls: float(_log_density(z, mix.weights, mix.means, mix.variances)[0])
        for cls, mix in model.mixtures.items()
    }
    best = None
    for cls in sorted(scores):
        if best is None or scores[cls] > scores[best]:
            best = cls
    return best, scores


# ---------------------------------------------------------------------------
# serialization

_FORMAT = "audiofp-model/1"


def model_to_doc(model) -> dict:
    """Lossless JSON-ready document (floats survive via repr round-trip)."""
    if isinstance(model, KnnModel):
        return {
            "format": _FORMAT,
            "kind": "knn",
            "k": model.k,
            "labels": list(model.labels),
            "exemplars": model.exemplars.tolist(),
            "norm_mean": model.norm.mean.tolist(),
            "norm_std": model.norm.std.tolist(),
        }
    if isinstance(model, GmmModel):
        return {
            "format": _FORMAT,
            "kind": "gmm",
            "n_components": model.n_components,
            "norm_mean": model.norm.mean.tolist(),
            "norm_std": model.norm.std.tolist(),
            "mixtures": {
                cls: {
                    "weights": mix.weights.tolist(),
                    "means": mix.means.tolist(),
                    "variances": mix.variances.tolist(),
                }
                for cls, mix in model.mixtures.items()
            },
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_doc(doc: dict):
    if doc.get("format") != _FORMAT:
        raise ValueError(f"unsupported model format {doc.get('format')!r}")
    norm = NormStats(
        mean=np.array(doc["norm_mean"]), std=np.array(doc["norm_std"])
    )
    if doc["kind"] == "knn":
        return KnnModel(
            exemplars=np.array(doc["exemplars"]),
            labels=tuple(doc["labels"]),
            k=int(doc["k"]),
            norm=norm,
        )
    if doc["kind"] == "gmm":
        mixtures = {
            cls: GaussianMixture(
                weights=np.array(m["weights"]),
                means=np.array(m["means"]),
                variances=np.array(m["variances"]),
                log_likelihood_trace=(),
            )
            for cls, m in doc["mixtures"].items()
        }
        return GmmModel(
            mixtures=mixtures,
            n_components=int(doc["n_components"]),
            norm=norm,
        )
    raise ValueError(f"unknown model kind {doc['kind']!r}")


def save_model(model, path, extra: dict | None = None) -> None:
    doc = model_to_doc(model)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    return model_from_doc(doc), doc
