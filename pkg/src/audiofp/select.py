"""Greedy sequential forward feature selection.

Scores every feature alone, sorts descending, then walks the sorted list
keeping a feature only when adding it strictly improves the best score seen
so far. The evaluation oracle must be deterministic for the run.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import EmptyFeatureSet


@dataclass(frozen=True)
class SelectionResult:
    ranked_singletons: tuple[tuple[int, float], ...]
    chosen: tuple[int, ...]
    score_trace: tuple[tuple[tuple[int, ...], float], ...]
    final_score: float


def sfs(features, evaluate) -> SelectionResult:
    """Run forward selection over feature ids with an F1 oracle.

    ``evaluate`` maps a tuple of feature ids to a score in [0, 1]. Sort ties
    between equally scoring singletons resolve toward the lower feature code.
    Exactly 2 * len(features) oracle calls are made.
    """
    candidates = sorted(set(features))
    if not candidates:
        raise EmptyFeatureSet("no features to select from")

    trace: list[tuple[tuple[int, ...], float]] = []

    def scored(subset: tuple[int, ...]) -> float:
        score = float(evaluate(subset))
        trace.append((subset, score))
        return score

    singleton_scores = {f: scored((f,)) for f in candidates}
    ranked = sorted(candidates, key=lambda f: (-singleton_scores[f], f))

    max_score = 0.0
    chosen: list[int] = []
    for f in ranked:
        attempt = tuple(chosen + [f])
        score = scored(attempt)
        if score > max_score:
            max_score = score
            chosen.append(f)

    return SelectionResult(
        ranked_singletons=tuple((f, singleton_scores[f]) for f in ranked),
        chosen=tuple(chosen),
        score_trace=tuple(trace),
        final_score=max_score,
    )


def write_trace_csv(result: SelectionResult, path) -> None:
    """Audit CSV: singleton ranking, greedy trace, and the chosen subset."""
    n = len(result.ranked_singletons)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phase", "subset", "f1"])
        for i, (subset, score) in enumerate(result.score_trace):
            phase = "singleton" if i < n else "greedy"
            writer.writerow([phase, "+".join(str(f) for f in subset), repr(score)])
        writer.writerow(
            ["chosen", "+".join(str(f) for f in result.chosen), repr(result.final_score)]
        )
