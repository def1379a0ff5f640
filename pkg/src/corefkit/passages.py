"""Splitting documents into annotation passages.

A passage is a run of complete sentences. The greedy rule: accumulate
whole sentences and close the passage at the first sentence boundary where
the cumulative token count reaches the target; a final leftover shorter
than ``min_tail_tokens`` is merged back into the previous passage.
Sentences are never split.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .errors import CorefkitError
from .model import Document, Passage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitConfig:
    target_tokens: int = 175
    min_tail_tokens: int = 50

    def __post_init__(self):
        if not self.target_tokens > self.min_tail_tokens > 0:
            raise ValueError(
                "require target_tokens > min_tail_tokens > 0, got "
                f"{self.target_tokens} / {self.min_tail_tokens}")


def passage_id_for(doc_id: str, index: int) -> str:
    return f"{doc_id}-p{index:03d}"


def split_passages(doc: Document, cfg: SplitConfig | None = None) -> list[Passage]:
    """Tile a document's sentences into passages of ~target_tokens tokens."""
    cfg = cfg or SplitConfig()
    if not doc.sentences:
        raise CorefkitError(f"document {doc.doc_id} has no sentences")

    for sent in doc.sentences:
        if len(sent) > 4 * cfg.target_tokens:
            logger.warning(
                "sentence %s has %d tokens (> 4x target %d); passage emitted anyway",
                sent.sent_id, len(sent), cfg.target_tokens)

    # Ranges of sentence indices, in document order.
    ranges: list[tuple[int, int, int]] = []  # (first, last, token_count)
    first = 0
    acc = 0
    for i, sent in enumerate(doc.sentences):
        acc += len(sent)
        if acc >= cfg.target_tokens:
            ranges.append((first, i, acc))
            first = i + 1
            acc = 0
    if first < len(doc.sentences):
        if acc < cfg.min_tail_tokens and ranges:
            f, _, count = ranges.pop()
            ranges.append((f, len(doc.sentences) - 1, count + acc))
        else:
            ranges.append((first, len(doc.sentences) - 1, acc))

    return [
        Passage(
            passage_id=passage_id_for(doc.doc_id, k),
            doc_id=doc.doc_id,
            sentence_range=(f, l),
            token_count=count,
        )
        for k, (f, l, count) in enumerate(ranges)
    ]
