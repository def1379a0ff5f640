"""The corpus file: documents plus passages, the interchange unit.

One JSON document ``{"documents": [...], "passages": [...]}`` carries the
parsed text, the passage tiling and the detected mentions between the CLI
stages and into the annotation store. Serialization is deterministic:
same corpus, same bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorefkitError
from .mentions import detect_mentions
from .model import (
    Document, Mention, MentionSet, Passage, Sentence, Token, mention_id_for,
)
from .passages import SplitConfig, split_passages


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)
    passages: list[Passage] = field(default_factory=list)

    def document(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.doc_id == doc_id:
                return d
        raise KeyError(doc_id)

    def passage(self, passage_id: str) -> Passage:
        for p in self.passages:
            if p.passage_id == passage_id:
                return p
        raise KeyError(passage_id)

    def split(self, cfg: SplitConfig | None = None) -> None:
        """(Re)tile all documents into passages, re-homing any detected mentions."""
        had_mentions = any(len(p.mentions) for p in self.passages)
        self.passages = [p for d in self.documents
                         for p in split_passages(d, cfg)]
        if had_mentions:
            self.detect()

    def detect(self) -> None:
        """Run mention detection for every passage."""
        if not self.passages:
            self.split()
        for p in self.passages:
            doc = self.document(p.doc_id)
            first, last = p.sentence_range
            mentions: list[Mention] = []
            for sent in doc.sentences[first:last + 1]:
                mentions.extend(detect_mentions(sent, passage_id=p.passage_id))
            p.mentions = MentionSet(mentions)

    def validate(self) -> None:
        for d in self.documents:
            d.validate()
        self._validate_tiling()
        for p in self.passages:
            p.mentions.validate()

    def _validate_tiling(self) -> None:
        by_doc: dict[str, list[Passage]] = {}
        for p in self.passages:
            by_doc.setdefault(p.doc_id, []).append(p)
        for d in self.documents:
            ranges = [p.sentence_range for p in by_doc.get(d.doc_id, [])]
            if not ranges:
                continue
            ranges.sort()
            expected = 0
            for first, last in ranges:
                if first != expected or last < first:
                    raise CorefkitError(
                        f"passages of {d.doc_id} do not tile its sentences")
                expected = last + 1
            if expected != len(d.sentences):
                raise CorefkitError(
                    f"passages of {d.doc_id} do not cover all sentences")

    def passage_tokens(self, passage_id: str) -> list[Token]:
        p = self.passage(passage_id)
        doc = self.document(p.doc_id)
        first, last = p.sentence_range
        return [t for s in doc.sentences[first:last + 1] for t in s.tokens]

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "documents": [_document_to_dict(d) for d in self.documents],
            "passages": [_passage_to_dict(p) for p in self.passages],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Corpus":
        documents = [_document_from_dict(d) for d in obj.get("documents", [])]
        passages = [_passage_from_dict(p) for p in obj.get("passages", [])]
        return cls(documents=documents, passages=passages)

    @classmethod
    def from_json(cls, text: str) -> "Corpus":
        return cls.from_json_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Corpus":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _token_to_dict(t: Token) -> dict:
    return {
        "index": t.index,
        "surface": t.surface,
        "lemma": t.lemma,
        "upos": t.upos,
        "head": t.head,
        "deprel": t.deprel,
        "doc_offset": t.doc_offset,
    }


def _document_to_dict(d: Document) -> dict:
    return {
        "doc_id": d.doc_id,
        "domain": d.domain,
        "sentences": [
            {"sent_id": s.sent_id,
             "tokens": [_token_to_dict(t) for t in s.tokens]}
            for s in d.sentences
        ],
    }


def _passage_to_dict(p: Passage) -> dict:
    return {
        "passage_id": p.passage_id,
        "doc_id": p.doc_id,
        "sentence_range": list(p.sentence_range),
        "token_count": p.token_count,
        "mentions": [
            {"mention_id": m.mention_id,
             "passage_id": m.passage_id,
             "span": list(m.span),
             "head": m.head}
            for m in p.mentions
        ],
    }


def _document_from_dict(obj: dict) -> Document:
    sentences = []
    for s in obj["sentences"]:
        tokens = [Token(
            index=t["index"], surface=t["surface"], lemma=t.get("lemma"),
            upos=t["upos"], head=t["head"], deprel=t["deprel"],
            doc_offset=t["doc_offset"],
        ) for t in s["tokens"]]
        sentences.append(Sentence(sent_id=s["sent_id"], tokens=tokens))
    return Document(doc_id=obj["doc_id"], domain=obj.get("domain", "unknown"),
                    sentences=sentences)


def _passage_from_dict(obj: dict) -> Passage:
    mentions = [Mention(
        mention_id=m.get("mention_id",
                         mention_id_for(obj["passage_id"], *m["span"])),
        passage_id=m.get("passage_id", obj["passage_id"]),
        span=tuple(m["span"]),
        head=m["head"],
    ) for m in obj.get("mentions", [])]
    return Passage(
        passage_id=obj["passage_id"],
        doc_id=obj["doc_id"],
        sentence_range=tuple(obj["sentence_range"]),
        token_count=obj["token_count"],
        mentions=MentionSet(mentions),
    )
