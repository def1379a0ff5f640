"""B3 agreement scoring, pairwise inter-annotator agreement, screening.

B3 (Bagga & Baldwin) scores one clustering against another per mention:
precision averages, over the response side, the fraction of each mention's
response cluster that also shares its key cluster; recall averages the
mirror quantity over the key side. F1 is their harmonic mean.

Singletons can be excluded first, following the CoNLL-2012 scorer
convention: size-1 clusters are dropped from key and response
independently, and a mention surviving on only one side scores 0 on the
pass where it remains. A side left empty after dropping contributes 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import CorefkitError, MentionUniverseError
from .model import Clustering

logger = logging.getLogger(__name__)

INCLUDE_SINGLETONS = "include"
EXCLUDE_SINGLETONS = "exclude"


@dataclass(frozen=True)
class B3Score:
    precision: float
    recall: float
    f1: float
    singleton_mode: str

    def to_json_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "singleton_mode": self.singleton_mode,
        }


@dataclass(frozen=True)
class ScreeningResult:
    annotator_id: str
    b3_f1: float
    passed: bool
    threshold: float = 0.90


@dataclass
class IAAReport:
    group: str
    singleton_mode: str
    mean_f1: float
    per_passage: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "group": self.group,
            "singleton_mode": self.singleton_mode,
            "mean_f1": self.mean_f1,
            "per_passage": dict(sorted(self.per_passage.items())),
        }


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _drop_singletons(clusters: list[set[str]]) -> list[set[str]]:
    return [c for c in clusters if len(c) > 1]


def _membership(clusters: list[set[str]]) -> dict[str, frozenset[str]]:
    out: dict[str, frozenset[str]] = {}
    for c in clusters:
        fc = frozenset(c)
        for m in c:
            out[m] = fc
    return out


def _one_sided(score_side: dict[str, frozenset[str]],
               other_side: dict[str, frozenset[str]]) -> float:
    """Mean over score_side mentions of |own cluster ∩ other cluster| / |own|."""
    if not score_side:
        return 0.0
    total = 0.0
    for m, own in score_side.items():
        other = other_side.get(m)
        if other:
            total += len(own & other) / len(own)
    return total / len(score_side)


def b3(key: Clustering, response: Clustering,
       mode: str = INCLUDE_SINGLETONS) -> B3Score:
    """Score ``response`` against ``key``."""
    if mode not in (INCLUDE_SINGLETONS, EXCLUDE_SINGLETONS):
        raise ValueError(f"unknown singleton mode {mode!r}")
    key_ids = key.mention_ids()
    resp_ids = response.mention_ids()
    if not key_ids and not resp_ids:
        raise CorefkitError("cannot score an empty mention universe")
    if key_ids != resp_ids:
        raise MentionUniverseError(
            "key and response cover different mentions"
            f" (missing {sorted(key_ids - resp_ids)},"
            f" extra {sorted(resp_ids - key_ids)})")

    key_clusters = key.clusters
    resp_clusters = response.clusters
    if mode == EXCLUDE_SINGLETONS:
        key_clusters = _drop_singletons(key_clusters)
        resp_clusters = _drop_singletons(resp_clusters)

    key_side = _membership(key_clusters)
    resp_side = _membership(resp_clusters)
    precision = _one_sided(resp_side, key_side)
    recall = _one_sided(key_side, resp_side)
    return B3Score(precision=precision, recall=recall,
                   f1=_f1(precision, recall), singleton_mode=mode)


def pairwise_iaa(annotations: list[Clustering], mode: str = EXCLUDE_SINGLETONS,
                 groups: dict[str, str] | None = None) -> list[IAAReport]:
    """Mean pairwise B3 F1 per passage, averaged within groups.

    ``groups`` maps passage_id to a grouping key (domain or dataset);
    ungrouped passages fall under "all". Passages with fewer than two
    annotations are skipped with a warning. Group means weight every
    passage equally.
    """
    by_passage: dict[str, list[Clustering]] = {}
    for ann in annotations:
        by_passage.setdefault(ann.passage_id, []).append(ann)

    passage_f1: dict[str, float] = {}
    for pid, anns in sorted(by_passage.items()):
        if len(anns) < 2:
            logger.warning("passage %s has %d annotation(s); skipped from IAA",
                           pid, len(anns))
            continue
        f1s = []
        for i in range(len(anns)):
            for j in range(i + 1, len(anns)):
                f1s.append(b3(anns[i], anns[j], mode).f1)
        passage_f1[pid] = sum(f1s) / len(f1s)

    grouped: dict[str, dict[str, float]] = {}
    for pid, f1 in passage_f1.items():
        group = (groups or {}).get(pid, "all")
        grouped.setdefault(group, {})[pid] = f1

    return [
        IAAReport(
            group=group,
            singleton_mode=mode,
            mean_f1=sum(vals.values()) / len(vals),
            per_passage=vals,
        )
        for group, vals in sorted(grouped.items())
    ]


def screening_pass(candidate: Clustering, gold: Clustering,
                   threshold: float = 0.90) -> ScreeningResult:
    """Quality gate: candidate passes at B3 F1 >= threshold against gold.

    Scored with singletons included; the boundary is inclusive ("0.90 or
    higher").
    """
    score = b3(gold, candidate, mode=INCLUDE_SINGLETONS)
    return ScreeningResult(
        annotator_id=candidate.annotator_id,
        b3_f1=score.f1,
        passed=score.f1 >= threshold,
        threshold=threshold,
    )
