from __future__ import annotations

import random
from pathlib import Path

import pytest

from corefkit.conllu import parse_conllu
from corefkit.model import Clustering, Document, Mention, Sentence, Token

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def examples_conllu() -> str:
    return (FIXTURES / "examples.conllu").read_text(encoding="utf-8")


@pytest.fixture()
def example_docs(examples_conllu):
    return parse_conllu(examples_conllu)


def mention_text(doc: Document, mention: Mention) -> str:
    tokens = [t for s in doc.sentences for t in s.tokens]
    return " ".join(t.surface for t in tokens[mention.start:mention.end + 1])


def clustering(passage_id: str, annotator_id: str, *clusters) -> Clustering:
    return Clustering(passage_id=passage_id, annotator_id=annotator_id,
                      clusters=[set(c) for c in clusters])


# Fixture F1: five annotators over mentions {a, b, c} producing pair votes
# ab=4, bc=2, ac=1 (annotator 1 groups all three; 2-4 pair a+b; 5 pairs b+c).
def fixture_f1() -> list[Clustering]:
    return [
        clustering("p1", "ann1", {"a", "b", "c"}),
        clustering("p1", "ann2", {"a", "b"}, {"c"}),
        clustering("p1", "ann3", {"a", "b"}, {"c"}),
        clustering("p1", "ann4", {"a", "b"}, {"c"}),
        clustering("p1", "ann5", {"b", "c"}, {"a"}),
    ]


_UPOS_POOL = ["NOUN", "NOUN", "PROPN", "PRON", "NUM", "VERB", "VERB",
              "ADJ", "DET", "ADP", "AUX", "ADV", "PUNCT", "CCONJ"]
_DEPREL_POOL = ["nsubj", "obj", "obl", "det", "amod", "nmod", "nmod:poss",
                "compound", "flat", "fixed", "nummod", "conj", "cc", "case",
                "punct", "advmod", "mark", "appos"]


def random_sentence(rng: random.Random, n_tokens: int, sent_id: str = "rnd",
                    start_offset: int = 0) -> Sentence:
    """A structurally valid random parse (single root, acyclic), with
    arbitrary POS/relation labels to stress the detector."""
    indices = list(range(1, n_tokens + 1))
    order = indices[:]
    rng.shuffle(order)
    heads = {order[0]: 0}
    attached = [order[0]]
    for idx in order[1:]:
        heads[idx] = rng.choice(attached)
        attached.append(idx)
    tokens = []
    for i in indices:
        tokens.append(Token(
            index=i,
            surface=f"w{i}",
            lemma=None,
            upos=rng.choice(_UPOS_POOL),
            head=heads[i],
            deprel="root" if heads[i] == 0 else rng.choice(_DEPREL_POOL),
            doc_offset=start_offset + i - 1,
        ))
    sent = Sentence(sent_id=sent_id, tokens=tokens)
    sent.validate_tree()
    return sent
