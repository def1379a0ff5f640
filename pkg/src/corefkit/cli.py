"""Command line entry points for the whole pipeline.

Every subcommand is a thin shell over the module APIs: ingest (CoNLL-U ->
corpus file), detect (fill mentions), split (re-tile passages),
eval-detector, aggregate, score, iaa, tutorial-check, and serve (HTTP
service). Outputs are deterministic for identical inputs; ``--out -``
writes to stdout. A JSON config file can pre-set flags (explicit flags
win) and COREFKIT_STORE provides the default store path.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .aggregation import aggregate_annotations
from .conllu import parse_conllu
from .corpus import Corpus
from .detector_eval import eval_detector, gold_mentions_with_heads
from .errors import CorefkitError
from .model import Clustering, MentionSet
from .passages import SplitConfig
from .scoring import b3, pairwise_iaa
from .tutorial import TutorialScript, example_script

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage on stderr, exit 1 (not argparse's 2)
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corefkit",
                     description="coreference annotation toolkit")
    parser.add_argument("--config", help="JSON config merged under flags")
    parser.add_argument("--seed", type=int, default=None,
                        help="accepted for reproducibility hooks; ignored "
                             "unless a command generates randomized fixtures")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse CoNLL-U into a corpus file")
    p.add_argument("--conllu", required=True,
                   help="a .conllu file or a directory of them")
    p.add_argument("--out", required=True)
    p.add_argument("--target-tokens", type=int, default=175)
    p.add_argument("--min-tail-tokens", type=int, default=50)

    p = sub.add_parser("detect", help="fill mentions for every passage")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="defaults to rewriting --corpus in place")

    p = sub.add_parser("split", help="re-tile passages")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="defaults to rewriting --corpus in place")
    p.add_argument("--target-tokens", type=int, default=175)
    p.add_argument("--min-tail-tokens", type=int, default=50)

    p = sub.add_parser("eval-detector",
                       help="headword recall/precision vs gold mentions")
    p.add_argument("--corpus", required=True)
    p.add_argument("--gold", required=True,
                   help='JSON {"mentions": [{"doc_id", "span", "head"?}]}')
    p.add_argument("--out", default="-")

    p = sub.add_parser("aggregate", help="vote-threshold aggregation")
    p.add_argument("--annotations", required=True,
                   help="directory of clustering JSON files")
    p.add_argument("--tau", type=int, default=3)
    p.add_argument("--out", default="-")

    p = sub.add_parser("score", help="B3 of response vs key clusterings")
    p.add_argument("--key", required=True,
                   help='JSON {"clusterings": [...]} (the gold side)')
    p.add_argument("--response", required=True,
                   help="aggregate file or clusterings file")
    p.add_argument("--singletons", choices=["include", "exclude"],
                   default="include")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--out", default="-")

    p = sub.add_parser("iaa", help="mean pairwise B3 agreement")
    p.add_argument("--annotations", required=True)
    p.add_argument("--singletons", choices=["include", "exclude"],
                   default="exclude")
    p.add_argument("--corpus", help="corpus file for domain grouping")
    p.add_argument("--group-by", choices=["domain", "dataset"],
                   default="domain")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--out", default="-")

    p = sub.add_parser("tutorial-check", help="validate a tutorial script")
    p.add_argument("--tutorial")
    p.add_argument("--write-example",
                   help="write the built-in example script to this path")

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--store", default=os.environ.get("COREFKIT_STORE"),
                   help="store directory (default: $COREFKIT_STORE)")
    p.add_argument("--corpus", help="initialize the store from this corpus")
    p.add_argument("--tutorial", help="tutorial script for initialization")
    p.add_argument("--target-annotations", type=int, default=5)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8009)
    p.add_argument("--frontend", help="static frontend bundle to mount")

    return parser


def _apply_config(args, argv) -> None:
    if not args.config:
        return
    overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
    explicit = {a[2:].split("=", 1)[0].replace("-", "_")
                for a in argv if a.startswith("--")}
    for key, value in overrides.items():
        attr = key.replace("-", "_")
        if hasattr(args, attr) and attr not in explicit:
            setattr(args, attr, value)


def _write_out(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _dump(obj, out: str) -> None:
    _write_out(json.dumps(obj, ensure_ascii=False, indent=2) + "\n", out)


def _load_clusterings_dir(path: str) -> list[Clustering]:
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"not a directory: {path}")
    out = []
    for file in sorted(root.rglob("*.json")):
        obj = json.loads(file.read_text(encoding="utf-8"))
        if "clusterings" in obj:
            out.extend(Clustering.from_json_dict(c) for c in obj["clusterings"])
        else:
            out.append(Clustering.from_json_dict(obj))
    if not out:
        raise CorefkitError(f"no clustering files under {path}")
    return out


def _load_clusterings_file(path: str) -> list[Clustering]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if "clusterings" in obj:
        return [Clustering.from_json_dict(c) for c in obj["clusterings"]]
    if "aggregates" in obj:
        return [
            Clustering(passage_id=a["passage_id"],
                       annotator_id=f"aggregate-tau{a['tau']}",
                       clusters=[set(c) for c in a["clusters"]])
            for a in obj["aggregates"]
        ]
    return [Clustering.from_json_dict(obj)]


def cmd_ingest(args) -> int:
    src = Path(args.conllu)
    files = sorted(src.glob("*.conllu")) if src.is_dir() else [src]
    if not files:
        raise FileNotFoundError(f"no .conllu files under {src}")
    documents = []
    for file in files:
        documents.extend(parse_conllu(file.read_text(encoding="utf-8"),
                                      default_doc_id=file.stem))
    corpus = Corpus(documents=documents)
    corpus.split(SplitConfig(args.target_tokens, args.min_tail_tokens))
    corpus.validate()
    _write_out(corpus.to_json(), args.out)
    return EXIT_OK


def cmd_detect(args) -> int:
    corpus = Corpus.load(args.corpus)
    corpus.detect()
    corpus.validate()
    _write_out(corpus.to_json(), args.out or args.corpus)
    return EXIT_OK


def cmd_split(args) -> int:
    corpus = Corpus.load(args.corpus)
    corpus.split(SplitConfig(args.target_tokens, args.min_tail_tokens))
    corpus.validate()
    _write_out(corpus.to_json(), args.out or args.corpus)
    return EXIT_OK


def cmd_eval_detector(args) -> int:
    corpus = Corpus.load(args.corpus)
    gold_obj = json.loads(Path(args.gold).read_text(encoding="utf-8"))
    per_document = []
    totals = {"matched": 0, "pred_total": 0, "gold_total": 0, "tokens": 0}
    for doc in corpus.documents:
        spans = [tuple(m["span"]) for m in gold_obj["mentions"]
                 if m["doc_id"] == doc.doc_id]
        gold_set = gold_mentions_with_heads(spans, doc)
        pred = MentionSet([m for p in corpus.passages
                           if p.doc_id == doc.doc_id for m in p.mentions])
        result = eval_detector(pred, gold_set, doc)
        row = result.to_json_dict()
        row["doc_id"] = doc.doc_id
        per_document.append(row)
        totals["matched"] += result.matched
        totals["pred_total"] += result.pred_total
        totals["gold_total"] += result.gold_total
        totals["tokens"] += doc.token_count
    overall = {
        "recall": (totals["matched"] / totals["gold_total"]
                   if totals["gold_total"] else 1.0),
        "precision": (totals["matched"] / totals["pred_total"]
                      if totals["pred_total"] else 1.0),
        "density_pred": (totals["pred_total"] / totals["tokens"]
                         if totals["tokens"] else 0.0),
        "density_gold": (totals["gold_total"] / totals["tokens"]
                         if totals["tokens"] else 0.0),
        "matched": totals["matched"],
        "pred_total": totals["pred_total"],
        "gold_total": totals["gold_total"],
        "recall_undefined": totals["gold_total"] == 0,
        "precision_undefined": totals["pred_total"] == 0,
    }
    _dump({"overall": overall, "per_document": per_document}, args.out)
    return EXIT_OK


def cmd_aggregate(args) -> int:
    clusterings = _load_clusterings_dir(args.annotations)
    by_passage: dict[str, list[Clustering]] = {}
    for c in clusterings:
        by_passage.setdefault(c.passage_id, []).append(c)
    aggregates = []
    for pid in sorted(by_passage):
        agg = aggregate_annotations(by_passage[pid], tau=args.tau)
        aggregates.append(agg.to_json_dict())
    _dump({"tau": args.tau, "aggregates": aggregates}, args.out)
    return EXIT_OK


def _score_table(rows, overall) -> str:
    header = f"{'passage':<24} {'P':>7} {'R':>7} {'F1':>7}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(f"{r['passage_id']:<24} {r['precision']:>7.3f} "
                     f"{r['recall']:>7.3f} {r['f1']:>7.3f}")
    lines.append("-" * len(header))
    lines.append(f"{'mean':<24} {overall['precision']:>7.3f} "
                 f"{overall['recall']:>7.3f} {overall['f1']:>7.3f}")
    return "\n".join(lines) + "\n"


def cmd_score(args) -> int:
    key_by_passage = {c.passage_id: c
                      for c in _load_clusterings_file(args.key)}
    responses = _load_clusterings_file(args.response)
    rows = []
    for response in sorted(responses, key=lambda c: c.passage_id):
        key = key_by_passage.get(response.passage_id)
        if key is None:
            raise CorefkitError(
                f"no key clustering for passage {response.passage_id}")
        score = b3(key, response, mode=args.singletons)
        row = score.to_json_dict()
        row["passage_id"] = response.passage_id
        tau = _tau_of(response.annotator_id)
        if tau is not None:
            row["tau"] = tau
        rows.append(row)
    if not rows:
        raise CorefkitError("nothing to score")
    overall = {
        "precision": sum(r["precision"] for r in rows) / len(rows),
        "recall": sum(r["recall"] for r in rows) / len(rows),
        "f1": sum(r["f1"] for r in rows) / len(rows),
    }
    if args.format == "table":
        _write_out(_score_table(rows, overall), args.out)
    else:
        _dump({"singleton_mode": args.singletons, "rows": rows,
               "overall": overall}, args.out)
    return EXIT_OK


def _tau_of(annotator_id: str) -> int | None:
    prefix = "aggregate-tau"
    if annotator_id.startswith(prefix) and annotator_id[len(prefix):].isdigit():
        return int(annotator_id[len(prefix):])
    return None


def cmd_iaa(args) -> int:
    clusterings = _load_clusterings_dir(args.annotations)
    groups = None
    if args.corpus:
        corpus = Corpus.load(args.corpus)
        groups = {}
        for p in corpus.passages:
            doc = corpus.document(p.doc_id)
            groups[p.passage_id] = (doc.domain if args.group_by == "domain"
                                    else doc.doc_id)
    reports = pairwise_iaa(clusterings, mode=args.singletons, groups=groups)
    if args.format == "table":
        header = f"{'group':<16} {'passages':>8} {'mean B3 F1':>11}"
        lines = [header, "-" * len(header)]
        for r in reports:
            lines.append(f"{r.group:<16} {len(r.per_passage):>8} "
                         f"{r.mean_f1:>11.3f}")
        _write_out("\n".join(lines) + "\n", args.out)
    else:
        _dump({"singleton_mode": args.singletons,
               "groups": [r.to_json_dict() for r in reports]}, args.out)
    return EXIT_OK


def cmd_tutorial_check(args) -> int:
    if args.write_example:
        example_script().save(args.write_example)
        print(f"wrote example tutorial to {args.write_example}")
        return EXIT_OK
    if not args.tutorial:
        raise CorefkitError("pass --tutorial <path> or --write-example <path>")
    script = TutorialScript.load(args.tutorial)
    screening = script.steps[-1]
    print(f"{args.tutorial}: {len(script.steps)} steps, "
          f"screening threshold {screening.threshold}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .store import AnnotationStore

    if not args.store:
        raise CorefkitError("pass --store or set COREFKIT_STORE")
    store_dir = Path(args.store)
    if not (store_dir / "corpus.json").exists():
        if not args.corpus:
            raise CorefkitError(
                f"{store_dir} has no corpus.json; pass --corpus to initialize")
        corpus = Corpus.load(args.corpus)
        tutorial = (TutorialScript.load(args.tutorial) if args.tutorial
                    else example_script())
        AnnotationStore.initialize(store_dir, corpus, tutorial,
                                   target_annotations=args.target_annotations)
    store = AnnotationStore(store_dir)
    app = create_app(store, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "detect": cmd_detect,
    "split": cmd_split,
    "eval-detector": cmd_eval_detector,
    "aggregate": cmd_aggregate,
    "score": cmd_score,
    "iaa": cmd_iaa,
    "tutorial-check": cmd_tutorial_check,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0, bad flags exit 1
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
    try:
        _apply_config(args, argv)
        return _COMMANDS[args.command](args)
    except CorefkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
