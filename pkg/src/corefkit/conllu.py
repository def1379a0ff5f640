"""CoNLL-U reading and writing.

Reads the 10-column tab-separated format into the document model and
serializes it back. Multiword-token ranges (``3-4``) and empty nodes
(``3.1``) are skipped: offsets and trees are built over syntactic words
only. ``# newdoc id``, ``# sent_id`` and ``# domain`` comments are honored.
"""

from __future__ import annotations

from .errors import ConlluParseError, TreeValidationError
from .model import Document, Sentence, Token

N_COLUMNS = 10


def parse_conllu(text: str, default_doc_id: str = "doc1") -> list[Document]:
    """Parse CoNLL-U content into validated documents.

    Raises ConlluParseError (with line number) on malformed token lines and
    TreeValidationError (naming the sent_id) on bad head structure.
    """
    documents: list[Document] = []
    cur_doc: Document | None = None
    pending_domain: str | None = None

    sent_lines: list[tuple[int, str]] = []
    sent_comments: dict[str, str] = {}
    doc_offset = 0
    n_unnamed_docs = 0

    def start_doc(doc_id: str | None) -> Document:
        nonlocal doc_offset, n_unnamed_docs
        if doc_id is None:
            n_unnamed_docs += 1
            doc_id = (default_doc_id if n_unnamed_docs == 1
                      else f"{default_doc_id}-{n_unnamed_docs}")
        doc = Document(doc_id=doc_id, domain="unknown", sentences=[])
        documents.append(doc)
        doc_offset = 0
        return doc

    def flush_sentence():
        nonlocal cur_doc, doc_offset, sent_lines, sent_comments, pending_domain
        if not sent_lines:
            sent_comments = {}
            return
        if cur_doc is None:
            cur_doc = start_doc(None)
        if pending_domain is not None:
            cur_doc.domain = pending_domain
            pending_domain = None
        sent_id = sent_comments.get(
            "sent_id", f"{cur_doc.doc_id}-s{len(cur_doc.sentences) + 1}")
        tokens = []
        for line_no, line in sent_lines:
            tokens.append(_parse_token_line(line, line_no, doc_offset, sent_id))
            doc_offset += 1
        sentence = Sentence(sent_id=sent_id, tokens=tokens)
        sentence.validate_tree()
        cur_doc.sentences.append(sentence)
        sent_lines = []
        sent_comments = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if line.strip() == "":
            flush_sentence()
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            key = key.strip()
            value = value.strip()
            if key == "newdoc id" or key == "newdoc":
                flush_sentence()
                cur_doc = start_doc(value or None)
            elif key == "sent_id":
                sent_comments["sent_id"] = value
            elif key == "domain":
                if cur_doc is None:
                    pending_domain = value
                else:
                    cur_doc.domain = value
            continue
        first_field = line.split("\t", 1)[0]
        if "-" in first_field or "." in first_field:
            continue  # multiword range or empty node: not a syntactic word
        sent_lines.append((line_no, line))
    flush_sentence()

    for doc in documents:
        doc.validate()
    return documents


def _parse_token_line(line: str, line_no: int, doc_offset: int,
                      sent_id: str) -> Token:
    fields = line.split("\t")
    if len(fields) != N_COLUMNS:
        raise ConlluParseError(
            f"expected {N_COLUMNS} tab-separated columns, got {len(fields)}",
            line_no)
    idx_s, form, lemma, upos, _xpos, _feats, head_s, deprel, _deps, _misc = fields
    try:
        index = int(idx_s)
        head = int(head_s)
    except ValueError:
        raise ConlluParseError(
            f"non-integer ID or HEAD ({idx_s!r}, {head_s!r})", line_no) from None
    if head == index:
        raise TreeValidationError(
            f"self-loop at sent_id {sent_id} token {index}")
    try:
        return Token(
            index=index,
            surface=form,
            lemma=None if lemma == "_" else lemma,
            upos=upos,
            head=head,
            deprel=deprel,
            doc_offset=doc_offset,
        )
    except ValueError as exc:
        raise ConlluParseError(str(exc), line_no) from None


def to_conllu(documents: list[Document]) -> str:
    """Serialize documents back to CoNLL-U (round-trips through parse_conllu)."""
    out: list[str] = []
    for doc in documents:
        out.append(f"# newdoc id = {doc.doc_id}")
        out.append(f"# domain = {doc.domain}")
        for sent in doc.sentences:
            out.append(f"# sent_id = {sent.sent_id}")
            for t in sent.tokens:
                out.append("\t".join([
                    str(t.index), t.surface,
                    t.lemma if t.lemma is not None else "_",
                    t.upos, "_", "_", str(t.head), t.deprel, "_", "_",
                ]))
            out.append("")
    return "\n".join(out) + "\n"
