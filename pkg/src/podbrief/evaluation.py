"""ROUGE-1/2/L scoring and k-fold cross-validation reporting.

Scores use lowercase alphanumeric tokens, no stemming, no stopword
removal; ROUGE-L is computed over the full concatenated summary texts.
"""

from __future__ import annotations

import csv
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .datastore import Annotation
from .segmenter import SentenceDoc
from .summarizer import Selection

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class RougeScore:
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0


@dataclass(frozen=True)
class RougeReport:
    rouge1: RougeScore = RougeScore()
    rouge2: RougeScore = RougeScore()
    rougeL: RougeScore = RougeScore()


@dataclass
class CrossValReport:
    per_fold: list[RougeReport] = field(default_factory=list)
    mean: RougeReport = RougeReport()
    std: RougeReport = RougeReport()

    @property
    def k(self) -> int:
        return len(self.per_fold)


def _score(overlap: float, candidate_total: int, reference_total: int) -> RougeScore:
    precision = overlap / candidate_total if candidate_total else 0.0
    recall = overlap / reference_total if reference_total else 0.0
    if precision + recall == 0.0:
        return RougeScore(precision, recall, 0.0)
    return RougeScore(precision, recall, 2 * precision * recall / (precision + recall))


def rouge_tokenize(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs; everything else separates."""
    return _TOKEN_RE.findall(text.lower())


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: list[str], reference: list[str], n: int) -> RougeScore:
    """Clipped n-gram overlap precision/recall/F between token lists."""
    if n < 1:
        raise ValueError("n must be at least 1")
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    return _score(overlap, sum(cand.values()), sum(ref.values()))


def _lcs_len(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> RougeScore:
    """Longest-common-subsequence precision/recall/F between token lists."""
    lcs = _lcs_len(candidate, reference)
    return _score(lcs, len(candidate), len(reference))


def rouge_all(candidate_text: str, reference_text: str) -> RougeReport:
    cand = rouge_tokenize(candidate_text)
    ref = rouge_tokenize(reference_text)
    return RougeReport(
        rouge1=rouge_n(cand, ref, 1),
        rouge2=rouge_n(cand, ref, 2),
        rougeL=rouge_l(cand, ref),
    )


def selection_text(doc: SentenceDoc, indices: list[int]) -> str:
    """Selected sentence texts joined with single spaces, in index order."""
    for index in indices:
        if not 0 <= index < len(doc):
            raise IndexError(
                f"sentence index {index} out of range for {doc.episode_id!r}"
            )
    return " ".join(doc.sentences[i].text for i in sorted(indices))


def evaluate(doc: SentenceDoc, predicted: Selection, reference: Annotation) -> RougeReport:
    """ROUGE-(1, 2, L) of the predicted selection against the annotation."""
    return rouge_all(
        selection_text(doc, predicted.indices),
        selection_text(doc, reference.selected_indices),
    )


def kfold_split(
    episode_ids: list[str], k: int = 5, seed: int = 0
) -> list[tuple[list[str], list[str]]]:
    """Seeded k-fold partition: disjoint test folds covering all ids,
    sizes differing by at most one; train is the complement."""
    ids = sorted(set(episode_ids))
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(ids) < k:
        raise ValueError(f"need at least {k} episodes for {k} folds, have {len(ids)}")
    rng = random.Random(seed)
    rng.shuffle(ids)
    base, extra = divmod(len(ids), k)
    folds = []
    offset = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test = sorted(ids[offset : offset + size])
        train = sorted(set(ids) - set(test))
        folds.append((train, test))
        offset += size
    return folds


def mean_report(reports: list[RougeReport]) -> RougeReport:
    """Component-wise arithmetic mean of several reports."""
    if not reports:
        raise ValueError("no reports to average")

    def avg(metric: str, component: str) -> float:
        return sum(getattr(getattr(r, metric), component) for r in reports) / len(reports)

    return RougeReport(
        *(
            RougeScore(avg(m, "precision"), avg(m, "recall"), avg(m, "f1"))
            for m in ("rouge1", "rouge2", "rougeL")
        )
    )


def aggregate(per_fold: list[RougeReport]) -> CrossValReport:
    """Fold-wise mean and sample standard deviation (n-1 denominator);
    a single fold reports std 0."""
    if not per_fold:
        raise ValueError("no fold reports to aggregate")

    def std(metric: str, component: str) -> float:
        values = [getattr(getattr(r, metric), component) for r in per_fold]
        if len(values) < 2:
            return 0.0
        mu = sum(values) / len(values)
        return math.sqrt(sum((v - mu) ** 2 for v in values) / (len(values) - 1))

    stds = RougeReport(
        *(
            RougeScore(std(m, "precision"), std(m, "recall"), std(m, "f1"))
            for m in ("rouge1", "rouge2", "rougeL")
        )
    )
    return CrossValReport(per_fold=list(per_fold), mean=mean_report(per_fold), std=stds)


def rouge_score_to_dict(score: RougeScore) -> dict:
    return {"precision": score.precision, "recall": score.recall, "f1": score.f1}


def rouge_report_to_dict(report: RougeReport) -> dict:
    return {
        "rouge1": rouge_score_to_dict(report.rouge1),
        "rouge2": rouge_score_to_dict(report.rouge2),
        "rougeL": rouge_score_to_dict(report.rougeL),
    }


def crossval_report_to_dict(report: CrossValReport) -> dict:
    return {
        "k": report.k,
        "per_fold": [rouge_report_to_dict(r) for r in report.per_fold],
        "mean": rouge_report_to_dict(report.mean),
        "std": rouge_report_to_dict(report.std),
    }


def results_table_dict(systems: dict[str, CrossValReport]) -> dict:
    """Results as rows = systems, columns = ROUGE-(1, 2, L) mean and std
    of the F-measure."""
    rows = {}
    for name in sorted(systems):
        report = systems[name]
        rows[name] = {
            metric: {
                "mean": getattr(report.mean, metric).f1,
                "std": getattr(report.std, metric).f1,
            }
            for metric in ("rouge1", "rouge2", "rougeL")
        }
    return {"systems": rows}


def format_results_table(systems: dict[str, CrossValReport]) -> str:
    """Plain-text table of F-measure mean +/- std per system and metric."""
    width = max([len(name) for name in systems] + [6])
    lines = [
        f"{'system'.ljust(width)}  {'ROUGE-1':>17}  {'ROUGE-2':>17}  {'ROUGE-L':>17}"
    ]
    for name in sorted(systems):
        report = systems[name]
        cells = [
            f"{getattr(report.mean, metric).f1:.3f} +/- {getattr(report.std, metric).f1:.3f}"
            for metric in ("rouge1", "rouge2", "rougeL")
        ]
        lines.append(f"{name.ljust(width)}  " + "  ".join(f"{c:>17}" for c in cells))
    return "\n".join(lines)


def selection_histogram(selections: list[Selection]) -> list[tuple[int, float]]:
    """Distribution of selected sentence indices, normalized by the total
    number of selections."""
    counts: Counter = Counter()
    for selection in selections:
        counts.update(selection.indices)
    total = sum(counts.values())
    if total == 0:
        return []
    return [(index, counts[index] / total) for index in sorted(counts)]


def write_histogram_csv(histogram: list[tuple[int, float]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "normalized_count"])
        for index, value in histogram:
            writer.writerow([index, f"{value:.6f}"])
