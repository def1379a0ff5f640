"""Automatic mention detection over dependency trees.

Candidate mentions are built around noun-like tokens (nouns, proper nouns,
pronouns, numbers) by expanding each through a whitelist of dependency
relations: the multiword-expression relations (compound, flat, fixed) and
the modifier relations (det, amod, nummod, nmod including nmod:poss). The
span of a candidate is the contiguous token cover of everything collected,
which absorbs case markers and punctuation lying between collected tokens.

On top of the expansion rule:

* possessive nominal modifiers (``nmod:poss``) are emitted as mentions of
  their own ("Mary" inside "Mary's book");
* proper-noun premodifiers inside multiword expressions are kept as
  mentions ("U.S." inside "U.S. foreign policy"), while common-noun and
  bare-number premodifiers are not;
* in a coordinated noun phrase every conjunct is a mention and so is the
  full coordinated phrase ("John", "Bob", "Mary" and "John, Bob, and
  Mary");
* finally the candidate set is cleaned up: a mention strictly contained in
  a larger one with the same headword is dropped, and partially
  overlapping spans are merged into their union. Nested spans with
  distinct headwords survive ("[[my] hands]").

The headword of a span is the most-shared dependency ancestor of its
tokens, restricted to the span.
"""

from __future__ import annotations

from .model import Mention, MentionSet, Sentence, Token, mention_id_for, spans_cross

MARKABLE_UPOS = frozenset({"NOUN", "PROPN", "PRON", "NUM"})

MWE_RELATIONS = frozenset({"compound", "flat", "fixed"})
MODIFIER_RELATIONS = frozenset({"det", "amod", "nummod", "nmod"})
# Traversal matches on the base label, so nmod:poss descends via "nmod";
# the possessive rule below matches "nmod:poss" exactly.
WHITELIST_BASES = MWE_RELATIONS | MODIFIER_RELATIONS
POSSESSIVE_DEPREL = "nmod:poss"


def expand_span(head_token: Token, sentence: Sentence) -> tuple[int, int]:
    """Maximal span around a token: contiguous cover of all tokens
    reachable from it through whitelisted relations only."""
    collected = [head_token]
    frontier = [head_token]
    while frontier:
        node = frontier.pop()
        for child in sentence.children_of(node):
            if child.deprel_base in WHITELIST_BASES:
                collected.append(child)
                frontier.append(child)
    offsets = [t.doc_offset for t in collected]
    return (min(offsets), max(offsets))


def head_of(span: tuple[int, int], sentence: Sentence) -> int:
    """Headword position of a span: the most-shared ancestor of its tokens.

    Returns the unique span token that is an ancestor (or self) of every
    other span token. When that ancestor lies outside the span (possible
    on malformed phrases), falls back to the span token closest to it,
    leftmost on ties.
    """
    start, end = span
    if start > end:
        raise ValueError(f"empty span [{start}, {end}]")
    first = sentence.tokens[0].doc_offset
    in_span = sentence.tokens[start - first:end - first + 1]
    if not in_span:
        raise ValueError(f"span [{start}, {end}] outside sentence")

    # Ancestor chain token -> root, per span token.
    chains: list[list[Token]] = []
    for tok in in_span:
        chain = [tok]
        cur = tok
        while cur.head != 0:
            cur = sentence.tokens[cur.head - 1]
            chain.append(cur)
        chains.append(chain)

    common = set.intersection(*[{t.index for t in chain} for chain in chains])
    # Every common ancestor occurs in chain 0; the deepest one sits closest
    # to the chain's token.
    depth_in_first = {t.index: i for i, t in enumerate(chains[0])}
    lca_index = min(common, key=lambda idx: depth_in_first[idx])
    lca = sentence.tokens[lca_index - 1]
    if start <= lca.doc_offset <= end:
        return lca.doc_offset

    # LCA outside the span: nearest span token wins, leftmost on ties.
    best = None
    for tok, chain in zip(in_span, chains):
        dist = next(i for i, t in enumerate(chain) if t.index == lca_index)
        if best is None or dist < best[0]:
            best = (dist, tok.doc_offset)
    return best[1]


def _emits_own_mention(token: Token, span: tuple[int, int]) -> bool:
    rel = token.deprel_base
    if token.upos == "NUM":
        # Numbers only when they head a phrase or stand alone, never as
        # bare numeric modifiers already inside another span.
        return span[1] > span[0] or rel not in WHITELIST_BASES
    if token.upos == "NOUN":
        # Common-noun premodifiers in multiword expressions are not mentions.
        return rel not in MWE_RELATIONS
    return True  # PROPN premodifiers and pronouns always are


def detect_mentions(sentence: Sentence, passage_id: str | None = None) -> MentionSet:
    """Run the full detection pipeline over one sentence.

    Spans are document offsets; mention ids are minted under ``passage_id``
    (the sent_id when not given).
    """
    scope = passage_id if passage_id is not None else sentence.sent_id
    candidates: list[tuple[int, int]] = []

    for token in sentence.tokens:
        if token.upos not in MARKABLE_UPOS:
            continue
        span = expand_span(token, sentence)
        if _emits_own_mention(token, span):
            candidates.append(span)

    # Possessive nominal modifiers are mentions of their own.
    for token in sentence.tokens:
        if token.deprel == POSSESSIVE_DEPREL:
            candidates.append(expand_span(token, sentence))

    # Coordination: each conjunct plus the full coordinated phrase.
    for token in sentence.tokens:
        if token.upos not in MARKABLE_UPOS:
            continue
        conjuncts = [c for c in sentence.children_of(token)
                     if c.deprel_base == "conj"]
        if not conjuncts:
            continue
        covered = [expand_span(token, sentence)]
        for c in conjuncts:
            c_span = expand_span(c, sentence)
            candidates.append(c_span)
            covered.append(c_span)
        cc_offsets = [
            cc.doc_offset
            for node in [token, *conjuncts]
            for cc in sentence.children_of(node)
            if cc.deprel_base == "cc"
        ]
        lo = min(min(s for s, _ in covered), *cc_offsets) if cc_offsets \
            else min(s for s, _ in covered)
        hi = max(max(e for _, e in covered), *cc_offsets) if cc_offsets \
            else max(e for _, e in covered)
        candidates.append((lo, hi))

    mentions = [
        Mention(
            mention_id=mention_id_for(scope, s, e),
            passage_id=scope,
            span=(s, e),
            head=head_of((s, e), sentence),
        )
        for s, e in candidates
    ]
    return dedupe_and_merge(mentions, sentence, scope=scope)


def dedupe_and_merge(mentions: list[Mention], sentence: Sentence,
                     scope: str | None = None) -> MentionSet:
    """Normalize a candidate list into a valid mention set.

    Repeats until stable: drop duplicates, drop mentions strictly contained
    in a larger mention with the same headword, and replace any pair of
    partially overlapping (crossing) spans with their union, recomputing
    the union's headword. Nested spans with distinct headwords are kept.

    One carve-out: a first conjunct shares its headword with the full
    coordinated phrase ("John" and "John, Bob, and Mary" are both headed
    by "John"), and both must survive. Same-headword removal therefore
    skips mentions whose head token has conj children inside the
    containing span. Idempotent by construction.
    """
    if scope is None:
        scope = mentions[0].passage_id if mentions else sentence.sent_id
    spans: dict[tuple[int, int], int] = {}
    for m in mentions:
        spans[m.span] = m.head

    changed = True
    while changed:
        changed = False
        ordered = sorted(spans)
        # Same-headword containment (conjunct carve-out, see docstring).
        for a in ordered:
            for b in ordered:
                if (a != b and _strictly_contains(a, b) and spans[a] == spans[b]
                        and not _is_coordination_cover(a, spans[b], sentence)):
                    del spans[b]
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        # Crossing spans merge into their union.
        for i, a in enumerate(ordered):
            for b in ordered[i + 1:]:
                if spans_cross(a, b):
                    union = (min(a[0], b[0]), max(a[1], b[1]))
                    del spans[a]
                    del spans[b]
                    spans[union] = head_of(union, sentence)
                    changed = True
                    break
            if changed:
                break

    return MentionSet([
        Mention(
            mention_id=mention_id_for(scope, s, e),
            passage_id=scope,
            span=(s, e),
            head=head,
        )
        for (s, e), head in spans.items()
    ])


def _strictly_contains(outer: tuple[int, int], inner: tuple[int, int]) -> bool:
    return (outer[0] <= inner[0] and inner[1] <= outer[1]
            and outer != inner)


def _is_coordination_cover(container: tuple[int, int], head_offset: int,
                           sentence: Sentence) -> bool:
    """True when ``container`` spans a coordination headed at ``head_offset``."""
    first = sentence.tokens[0].doc_offset
    head_token = sentence.tokens[head_offset - first]
    return any(
        c.deprel_base == "conj" and container[0] <= c.doc_offset <= container[1]
        for c in sentence.children_of(head_token)
    )
