"""Confusion accounting, macro precision/recall/F1, splits and experiments.

The experiment protocol mirrors the evaluation habit of the fingerprinting
setup: several recordings per device, a per-class train/test split, a sweep
over k (k-NN) or mixture size (GMM, averaged over 10 EM restarts), reporting
the sweep point with the best macro F1.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import classify, features
from .errors import InsufficientSamples

DEFAULT_SWEEP = (1, 2, 3, 4, 5)
GMM_RESTARTS = 10


def harmonic_f1(precision: float, recall: float) -> float:
    """2 P R / (P + R); zero when both are zero."""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted; entries are clip counts."""

    labels: tuple[str, ...]
    counts: np.ndarray

    @classmethod
    def from_predictions(cls, true_labels, predicted_labels) -> "ConfusionMatrix":
        labels = tuple(sorted(set(true_labels) | set(predicted_labels)))
        index = {l: i for i, l in enumerate(labels)}
        counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for t, p in zip(true_labels, predicted_labels):
            counts[index[t], index[p]] += 1
        return cls(labels=labels, counts=counts)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true\\predicted"] + list(self.labels))
            for label, row in zip(self.labels, self.counts):
                writer.writerow([label] + [int(x) for x in row])


def class_metrics(cm: ConfusionMatrix) -> list[tuple[str, float, float, float]]:
    """Per-class (label, precision, recall, F1); degenerate cases score 0."""
    tp = np.diag(cm.counts).astype(np.float64)
    fp = cm.counts.sum(axis=0) - tp
    fn = cm.counts.sum(axis=1) - tp
    out = []
    for i, label in enumerate(cm.labels):
        pr = tp[i] / (tp[i] + fp[i]) if tp[i] + fp[i] > 0 else 0.0
        re = tp[i] / (tp[i] + fn[i]) if tp[i] + fn[i] > 0 else 0.0
        out.append((label, float(pr), float(re), harmonic_f1(pr, re)))
    return out


def macro_average(per_class) -> tuple[float, float, float]:
    """Equal-weight class means of precision and recall, F1 their harmonic."""
    per_class = list(per_class)
    if not per_class:
        raise ValueError("no classes to average")
    avg_pr = float(np.mean([pr for _, pr, _, _ in per_class]))
    avg_re = float(np.mean([re for _, _, re, _ in per_class]))
    return avg_pr, avg_re, harmonic_f1(avg_pr, avg_re)


@dataclass
class EvaluationReport:
    per_class: list[dict]
    avg_pr: float
    avg_re: float
    avg_f1: float
    config: dict
    sweep_scores: list[dict] = field(default_factory=list)
    gmm_restart_f1_std: float | None = None
    confusion: ConfusionMatrix | None = None

    def to_json_obj(self) -> dict:
        obj = {
            "per_class": self.per_class,
            "avg_pr": self.avg_pr,
            "avg_re": self.avg_re,
            "avg_f1": self.avg_f1,
            "config": self.config,
            "sweep_scores": self.sweep_scores,
        }
        if self.gmm_restart_f1_std is not None:
            obj["gmm_restart_f1_std"] = self.gmm_restart_f1_std
        if self.confusion is not None:
            obj["confusion"] = {
                "labels": list(self.confusion.labels),
                "counts": self.confusion.counts.tolist(),
            }
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True)

    def to_csv_row(self) -> tuple[list[str], list[str]]:
        """(header, row) pair for a flat one-line summary."""
        cfg = self.config
        header = [
            "classifier",
            "features",
            "hyperparameter",
            "train_per_class",
            "seed",
            "avg_pr",
            "avg_re",
            "avg_f1",
        ]
        row = [
            str(cfg.get("classifier", "")),
            "+".join(str(c) for c in cfg.get("features", [])),
            str(cfg.get("best_hyperparameter", "")),
            str(cfg.get("train_per_class", "")),
            str(cfg.get("seed", "")),
            repr(self.avg_pr),
            repr(self.avg_re),
            repr(self.avg_f1),
        ]
        return header, row


def split(labels, train_per_class: int, seed: int) -> tuple[list[int], list[int]]:
    """Disjoint per-class train/test index lists from a seeded shuffle.

    Every class must have strictly more clips than train_per_class so the
    test side is never empty.
    """
    labels = [str(l) for l in labels]
    if train_per_class < 1:
        raise ValueError("train_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_class.setdefault(label, []).append(i)

    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_class):
        members = np.array(by_class[label])
        if members.size <= train_per_class:
            raise InsufficientSamples(
                f"class {label!r} has {members.size} clips, "
                f"needs more than {train_per_class}"
            )
        order = rng.permutation(members.size)
        train_idx.extend(int(i) for i in members[order[:train_per_class]])
        test_idx.extend(int(i) for i in members[order[train_per_class:]])
    return train_idx, test_idx


def _evaluate_split(x_train, y_train, x_test, y_test, classifier, param, seed):
    """One (classifier, hyperparameter) evaluation; returns per-class + cm."""
    if classifier == "knn":
        model = classify.knn_train(x_train, y_train, k=param)
        predictions = [classify.knn_classify(model, q)[0] for q in x_test]
    elif classifier == "gmm":
        model = classify.gmm_train(x_train, y_train, n_components=param, seed=seed)
        predictions = [classify.gmm_classify(model, q)[0] for q in x_test]
    else:
        raise ValueError(f"unknown classifier {classifier!r}")
    cm = ConfusionMatrix.from_predictions(y_test, predictions)
    return class_metrics(cm), cm


def run_experiment(
    corpus,
    feature_codes,
    classifier: str,
    seed: int,
    sweep=DEFAULT_SWEEP,
    train_per_class: int = 5,
    precomputed=None,
) -> EvaluationReport:
    """Full protocol: extract, split, sweep hyperparameters, report the best.

    ``sweep`` lists k values (k-NN) or component counts (GMM). GMM scores at
    each sweep point are averaged over 10 seeded EM restarts before the best
    point is chosen. ``precomputed`` short-circuits feature extraction with
    ready FeatureVectors.
    """
    feature_codes = tuple(sorted(set(int(c) for c in feature_codes)))
    if precomputed is None:
        vectors = features.extract_many(corpus, feature_codes)
    else:
        vectors = list(precomputed)
    x, labels = features.to_matrix(vectors)

    seq = np.random.SeedSequence(seed)
    split_seed, restart_root = seq.spawn(2)
    train_idx, test_idx = split(
        labels, train_per_class, int(split_seed.generate_state(1)[0])
    )
    x_train, y_train = x[train_idx], [labels[i] for i in train_idx]
    x_test, y_test = x[test_idx], [labels[i] for i in test_idx]

    restart_seeds = [
        int(s.generate_state(1)[0]) for s in restart_root.spawn(GMM_RESTARTS)
    ]

    best = None
    sweep_scores = []
    for param in sweep:
        if classifier == "gmm":
            if param > train_per_class:
                continue  # cannot fit more components than samples per class
            runs = [
                _evaluate_split(x_train, y_train, x_test, y_test, "gmm", param, s)
                for s in restart_seeds
            ]
            # average per-class precision/recall across restarts, then macro
            per_class = []
            for i, (label, *_rest) in enumerate(runs[0][0]):
                pr = float(np.mean([r[0][i][1] for r in runs]))
                re = float(np.mean([r[0][i][2] for r in runs]))
                per_class.append((label, pr, re, harmonic_f1(pr, re)))
            restart_f1s = [macro_average(r[0])[2] for r in runs]
            extra = {
                "restart_f1_std": float(np.std(restart_f1s)),
                "confusion": runs[0][1],
            }
        else:
            per_class, cm = _evaluate_split(
                x_train, y_train, x_test, y_test, classifier, param, 0
            )
            extra = {"restart_f1_std": None, "confusion": cm}

        avg_pr, avg_re, avg_f1 = macro_average(per_class)
        sweep_scores.append({"hyperparameter": param, "avg_f1": avg_f1})
        candidate = (avg_f1, -param)
        if best is None or candidate > best[0]:
            best = (candidate, param, per_class, avg_pr, avg_re, avg_f1, extra)

    if best is None:
        raise ValueError("sweep produced no valid configuration")

    _, param, per_class, avg_pr, avg_re, avg_f1, extra = best
    config = {
        "classifier": classifier,
        "features": list(feature_codes),
        "sweep": list(sweep),
        "best_hyperparameter": param,
        "train_per_class": train_per_class,
        "seed": seed,
        "n_clips": len(vectors),
    }
    return EvaluationReport(
        per_class=[
            {"label": l, "precision": p, "recall": r, "f1": f}
            for l, p, r, f in per_class
        ],
        avg_pr=avg_pr,
        avg_re=avg_re,
        avg_f1=avg_f1,
        config=config,
        sweep_scores=sweep_scores,
        gmm_restart_f1_std=extra["restart_f1_std"],
        confusion=extra["confusion"],
    )
