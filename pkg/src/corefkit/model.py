"""Core document and annotation data model.

Documents are dependency-parsed text: sentences of tokens with head links
forming a tree. Mentions are token spans with a computed headword; a
clustering is one annotator's partition of a passage's mentions into
entities. All downstream modules (detection, aggregation, scoring, the
service) operate on these types.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PartitionError, TreeValidationError

# The Universal POS inventory (v2). "X" is the catch-all member.
UPOS_TAGS = frozenset({
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
})


@dataclass(frozen=True)
class Token:
    """One syntactic word.

    ``index`` and ``head`` are 1-based within the sentence (head 0 means
    root); ``doc_offset`` is the 0-based position within the whole document.
    """

    index: int
    surface: str
    upos: str
    head: int
    deprel: str
    doc_offset: int
    lemma: str | None = None

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"token index must be >= 1, got {self.index}")
        if self.head < 0:
            raise ValueError(f"token head must be >= 0, got {self.head}")
        if self.head == self.index:
            raise ValueError(f"token {self.index} has itself as head")
        if self.upos not in UPOS_TAGS:
            raise ValueError(f"unknown upos {self.upos!r}")

    @property
    def deprel_base(self) -> str:
        """Relation label with any subtype stripped (``compound:prt`` -> ``compound``)."""
        return self.deprel.split(":", 1)[0]


@dataclass
class Sentence:
    sent_id: str
    tokens: list[Token]

    def __len__(self) -> int:
        return len(self.tokens)

    def token_at(self, doc_offset: int) -> Token:
        first = self.tokens[0].doc_offset
        return self.tokens[doc_offset - first]

    def children_of(self, token: Token) -> list[Token]:
        return [t for t in self.tokens if t.head == token.index]

    def parent_of(self, token: Token) -> Token | None:
        if token.head == 0:
            return None
        return self.tokens[token.head - 1]

    def validate_tree(self) -> None:
        """Check the single-root tree invariants, raising TreeValidationError."""
        n = len(self.tokens)
        if n == 0:
            raise TreeValidationError("empty sentence", self.sent_id)
        roots = [t for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise TreeValidationError(
                f"expected exactly one root, found {len(roots)}", self.sent_id)
        for t in self.tokens:
            if t.head > n:
                raise TreeValidationError(
                    f"token {t.index} head {t.head} out of range", self.sent_id)
        # Walk up from every token; a tree reaches the root in <= n steps.
        for t in self.tokens:
            seen = set()
            cur = t
            while cur.head != 0:
                if cur.index in seen:
                    raise TreeValidationError(
                        f"cycle through token {t.index}", self.sent_id)
                seen.add(cur.index)
                cur = self.tokens[cur.head - 1]


@dataclass
class Document:
    doc_id: str
    domain: str
    sentences: list[Sentence]

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def validate(self) -> None:
        offset = 0
        for sent in self.sentences:
            sent.validate_tree()
            for tok in sent.tokens:
                if tok.doc_offset != offset:
                    raise TreeValidationError(
                        f"doc_offset {tok.doc_offset} != expected {offset}",
                        sent.sent_id)
                offset += 1

    def sentence_containing(self, doc_offset: int) -> int:
        """Index of the sentence holding the given document offset."""
        for i, sent in enumerate(self.sentences):
            first = sent.tokens[0].doc_offset
            if first <= doc_offset <= sent.tokens[-1].doc_offset:
                return i
        raise IndexError(f"doc_offset {doc_offset} outside document {self.doc_id}")


@dataclass(frozen=True)
class Mention:
    """A token span (inclusive doc_offsets) with its headword position."""

    mention_id: str
    passage_id: str
    span: tuple[int, int]
    head: int

    def __post_init__(self):
        start, end = self.span
        if not start <= self.head <= end:
            raise ValueError(
                f"head {self.head} outside span [{start}, {end}]")

    @property
    def start(self) -> int:
        return self.span[0]

    @property
    def end(self) -> int:
        return self.span[1]

    def length(self) -> int:
        return self.end - self.start + 1


def mention_sort_key(m: Mention) -> tuple[int, int]:
    # Wider spans first at equal start.
    return (m.start, -(m.end - m.start))


def mention_id_for(passage_id: str, start: int, end: int) -> str:
    return f"{passage_id}:{start}-{end}"


def span_from_mention_id(mention_id: str) -> tuple[int, int] | None:
    """Recover the (start, end) encoded in a stable mention id, if any."""
    _, _, tail = mention_id.rpartition(":")
    start, sep, end = tail.partition("-")
    if sep and start.isdigit() and end.isdigit():
        return int(start), int(end)
    return None


@dataclass
class MentionSet:
    """Mentions of one scope, sorted by (start, widest-first).

    After dedupe/merge, spans are pairwise disjoint or strictly nested,
    and no mention is a strict sub-span of another with the same head.
    """

    mentions: list[Mention] = field(default_factory=list)

    def __post_init__(self):
        self.mentions = sorted(self.mentions, key=mention_sort_key)

    def __len__(self) -> int:
        return len(self.mentions)

    def __iter__(self):
        return iter(self.mentions)

    def ids(self) -> list[str]:
        return [m.mention_id for m in self.mentions]

    def validate(self) -> None:
        seen_spans = set()
        for m in self.mentions:
            if m.span in seen_spans:
                raise ValueError(f"duplicate mention span {m.span}")
            seen_spans.add(m.span)
        for a in self.mentions:
            for b in self.mentions:
                if a is b:
                    continue
                if spans_cross(a.span, b.span):
                    raise ValueError(f"crossing spans {a.span} and {b.span}")


def spans_cross(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """True when spans partially overlap (intersect without nesting)."""
    (a0, a1), (b0, b1) = a, b
    if a1 < b0 or b1 < a0:
        return False
    return not (a0 <= b0 and b1 <= a1) and not (b0 <= a0 and a1 <= b1)


@dataclass
class Clustering:
    """One annotator's partition of a passage's mentions into entities."""

    passage_id: str
    annotator_id: str
    clusters: list[set[str]]

    def mention_ids(self) -> set[str]:
        out: set[str] = set()
        for c in self.clusters:
            out |= c
        return out

    def cluster_of(self, mention_id: str) -> set[str]:
        for c in self.clusters:
            if mention_id in c:
                return c
        raise KeyError(mention_id)

    def validate_partition(self, expected_ids: set[str]) -> None:
        """Every expected mention in exactly one cluster; nothing else."""
        seen: set[str] = set()
        for c in self.clusters:
            dup = seen & c
            if dup:
                raise PartitionError(
                    f"mentions assigned to multiple clusters: {sorted(dup)}",
                    extra=dup)
            seen |= c
        missing = expected_ids - seen
        extra = seen - expected_ids
        if missing or extra:
            raise PartitionError(
                "clustering does not partition the mention set"
                f" (missing {sorted(missing)}, extra {sorted(extra)})",
                missing=missing, extra=extra)

    def to_json_dict(self) -> dict:
        return {
            "passage_id": self.passage_id,
            "annotator_id": self.annotator_id,
            "clusters": [sorted(c) for c in self.clusters],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Clustering":
        return cls(
            passage_id=obj["passage_id"],
            annotator_id=obj["annotator_id"],
            clusters=[set(c) for c in obj["clusters"]],
        )


@dataclass
class Passage:
    """A contiguous run of complete sentences, the unit of annotation."""

    passage_id: str
    doc_id: str
    sentence_range: tuple[int, int]
    token_count: int
    mentions: MentionSet = field(default_factory=MentionSet)
