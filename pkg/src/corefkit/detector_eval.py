"""Headword-based comparison of a detected mention set against gold.

Datasets draw mention boundaries differently, so spans are compared by
their headword positions: two mentions match when their heads sit on the
same document offset. Matching is one-to-one over multisets, so duplicated
heads never double-match.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .mentions import head_of
from .model import Document, Mention, MentionSet


@dataclass(frozen=True)
class DetectorEval:
    recall: float
    precision: float
    density_pred: float
    density_gold: float
    matched: int
    pred_total: int
    gold_total: int
    recall_undefined: bool = False
    precision_undefined: bool = False

    def to_json_dict(self) -> dict:
        return {
            "recall": self.recall,
            "precision": self.precision,
            "density_pred": self.density_pred,
            "density_gold": self.density_gold,
            "matched": self.matched,
            "pred_total": self.pred_total,
            "gold_total": self.gold_total,
            "recall_undefined": self.recall_undefined,
            "precision_undefined": self.precision_undefined,
        }


def eval_detector(pred: MentionSet, gold: MentionSet, doc: Document) -> DetectorEval:
    """Recall/precision of ``pred`` against ``gold`` plus mention densities.

    Gold sets loaded from bare spans get their heads filled first (see
    gold_mentions_with_heads).
    """
    pred_heads = Counter(m.head for m in pred)
    gold_heads = Counter(m.head for m in gold)
    matched = sum(min(pred_heads[h], gold_heads[h]) for h in pred_heads)

    pred_total = len(pred)
    gold_total = len(gold)
    recall_undefined = gold_total == 0
    precision_undefined = pred_total == 0
    recall = 1.0 if recall_undefined else matched / gold_total
    precision = 1.0 if precision_undefined else matched / pred_total

    tokens = doc.token_count
    return DetectorEval(
        recall=recall,
        precision=precision,
        density_pred=pred_total / tokens if tokens else 0.0,
        density_gold=gold_total / tokens if tokens else 0.0,
        matched=matched,
        pred_total=pred_total,
        gold_total=gold_total,
        recall_undefined=recall_undefined,
        precision_undefined=precision_undefined,
    )


def gold_mentions_with_heads(spans: list[tuple[int, int]], doc: Document,
                             scope: str = "gold") -> MentionSet:
    """Build a gold MentionSet from bare spans, computing headwords."""
    mentions = []
    for start, end in spans:
        sent = doc.sentences[doc.sentence_containing(start)]
        mentions.append(Mention(
            mention_id=f"{scope}:{start}-{end}",
            passage_id=scope,
            span=(start, end),
            head=head_of((start, end), sent),
        ))
    return MentionSet(mentions)
