"""Per-label precision / recall / F1 against a ground-truth labeling."""
from __future__ import annotations

from dataclasses import dataclass

from .grid import GridError, Labeling


@dataclass(frozen=True)
class SegMetrics:
    per_label: dict[int, dict[str, float]]  # label -> {precision, recall, f1}

    def f1(self, label: int) -> float:
        return self.per_label[label]["f1"]


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def compute_metrics(result: Labeling, truth: Labeling) -> SegMetrics:
    """Stats for every non-background label; empty result segments score P = 0."""
    if result.assignment.shape != truth.assignment.shape:
        raise GridError("result and truth cover different grids")
    labels = sorted((set(result.labels) | set(truth.labels))
                    - {result.background, truth.background})
    out: dict[int, dict[str, float]] = {}
    for k in labels:
        rmask = result.assignment == k
        tmask = truth.assignment == k
        inter = int((rmask & tmask).sum())
        nr = int(rmask.sum())
        nt = int(tmask.sum())
        p = inter / nr if nr else 0.0
        r = inter / nt if nt else 0.0
        out[k] = {"precision": p, "recall": r, "f1": f1_score(p, r)}
    return SegMetrics(per_label=out)
