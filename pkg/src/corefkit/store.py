"""File-backed annotation store.

Layout, all JSON under one root directory (no database; everything is
diff-able and digestible offline):

    config.json                        store settings
    corpus.json                        documents + passages + mentions
    tutorial.json                      tutorial script
    annotators/<annotator_id>.json     registration, tutorial progress,
                                       screening outcome
    annotations/<passage_id>/<annotator_id>.json
                                       one submitted clustering each
    reports/<kind>-<digest>.json       cached report documents

Every write goes through an atomic temp-file-plus-rename, so a crash mid
submission leaves either the old record or the new one, never a partial
file. All state mutations are serialized through one lock; assignment
leases are kept in memory (a restart simply drops them and the TTL would
have reclaimed them anyway).
"""

from __future__ import annotations

import hashlib
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .aggregation import AggregationConfig, aggregate, count_votes
from .corpus import Corpus
from .detector_eval import eval_detector, gold_mentions_with_heads
from .errors import (
    AuthorizationError, CorefkitError, LeaseError, StoreError,
)
from .model import Clustering, MentionSet
from .scoring import ScreeningResult, b3, pairwise_iaa, screening_pass
from .tutorial import StepFeedback, TutorialScript, step_feedback

DEFAULT_TARGET_ANNOTATIONS = 5
DEFAULT_LEASE_TTL_MINUTES = 60


def atomic_write_json(path: Path, obj) -> None:
    """Write JSON so readers see either the old file or the new one."""
    path.parent.mkdir(parents=True, exist_ok=True)
    data = json.dumps(obj, ensure_ascii=False, indent=2) + "\n"
    tmp = path.parent / f".{path.name}.{os.getpid()}.{secrets.token_hex(4)}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


@dataclass
class Lease:
    annotator_id: str
    passage_id: str
    expires_at: float


class AnnotationStore:
    def __init__(self, root, now_fn=time.time):
        self.root = Path(root)
        if not (self.root / "corpus.json").exists():
            raise StoreError(f"no corpus.json under {self.root}")
        self._now = now_fn
        self._lock = threading.RLock()
        self._leases: dict[str, Lease] = {}  # annotator_id -> lease
        self._token_index: dict[str, str] = {}  # token -> annotator_id
        self.config = self._load_config()
        self.corpus = Corpus.load(self.root / "corpus.json")
        self.corpus.validate()
        tutorial_path = self.root / "tutorial.json"
        self.tutorial: TutorialScript | None = (
            TutorialScript.load(tutorial_path) if tutorial_path.exists() else None)

    # -- setup -------------------------------------------------------------

    @classmethod
    def initialize(cls, root, corpus: Corpus,
                   tutorial: TutorialScript | None = None,
                   target_annotations: int = DEFAULT_TARGET_ANNOTATIONS,
                   lease_ttl_minutes: float = DEFAULT_LEASE_TTL_MINUTES,
                   screening_threshold: float = 0.90,
                   allow_resubmission: bool = True,
                   now_fn=time.time) -> "AnnotationStore":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        atomic_write_json(root / "config.json", {
            "target_annotations": target_annotations,
            "lease_ttl_minutes": lease_ttl_minutes,
            "screening_threshold": screening_threshold,
            "allow_resubmission": allow_resubmission,
        })
        corpus.save(root / "corpus.json")
        if tutorial is not None:
            tutorial.save(root / "tutorial.json")
        return cls(root, now_fn=now_fn)

    def _load_config(self) -> dict:
        path = self.root / "config.json"
        cfg = _read_json(path) if path.exists() else {}
        cfg.setdefault("target_annotations", DEFAULT_TARGET_ANNOTATIONS)
        cfg.setdefault("lease_ttl_minutes", DEFAULT_LEASE_TTL_MINUTES)
        cfg.setdefault("screening_threshold", 0.90)
        cfg.setdefault("allow_resubmission", True)
        return cfg

    # -- annotators ----------------------------------------------------------

    def _annotator_path(self, annotator_id: str) -> Path:
        return self.root / "annotators" / f"{annotator_id}.json"

    def register_annotator(self, name: str | None = None) -> dict:
        with self._lock:
            annotators_dir = self.root / "annotators"
            taken = [int(p.stem.split("-")[1])
                     for p in annotators_dir.glob("ann-*.json")] \
                if annotators_dir.exists() else []
            annotator_id = f"ann-{max(taken, default=0) + 1:04d}"
            record = {
                "annotator_id": annotator_id,
                "token": secrets.token_hex(16),
                "name": name,
                "next_tutorial_step": 0,
                "screening": None,
            }
            atomic_write_json(self._annotator_path(annotator_id), record)
            self._token_index[record["token"]] = annotator_id
            return record

    def annotator(self, annotator_id: str) -> dict:
        path = self._annotator_path(annotator_id)
        if not path.exists():
            raise AuthorizationError(f"unknown annotator {annotator_id}")
        return _read_json(path)

    def annotator_by_token(self, token: str) -> dict:
        cached = self._token_index.get(token)
        if cached is not None:
            return self.annotator(cached)
        annotators_dir = self.root / "annotators"
        if annotators_dir.exists():
            for path in sorted(annotators_dir.glob("ann-*.json")):
                record = _read_json(path)
                if secrets.compare_digest(record.get("token", ""), token):
                    self._token_index[record["token"]] = record["annotator_id"]
                    return record
        raise AuthorizationError("unknown token")

    def _require_screened(self, annotator_id: str) -> dict:
        record = self.annotator(annotator_id)
        screening = record.get("screening")
        if not screening or not screening.get("passed"):
            raise AuthorizationError(
                f"annotator {annotator_id} has not passed screening")
        return record

    # -- tutorial ------------------------------------------------------------

    def run_tutorial_step(self, annotator_id: str, step_index: int,
                          clusters: list[list[str]]):
        """Feedback for a training step, or the ScreeningResult for the last."""
        if self.tutorial is None:
            raise StoreError("store has no tutorial script")
        with self._lock:
            record = self.annotator(annotator_id)
            expected = record.get("next_tutorial_step", 0)
            if step_index != expected:
                raise CorefkitError(
                    f"tutorial steps must be taken in order: expected step "
                    f"{expected}, got {step_index}")
            if step_index >= len(self.tutorial.steps):
                raise CorefkitError("tutorial already finished")
            step = self.tutorial.steps[step_index]
            submitted = Clustering(
                passage_id=step.step_id, annotator_id=annotator_id,
                clusters=[set(c) for c in clusters])

            if step.is_screening:
                result = screening_pass(submitted, step.gold_clustering(),
                                        threshold=self.config["screening_threshold"])
                record["screening"] = {
                    "b3_f1": result.b3_f1,
                    "passed": result.passed,
                    "threshold": result.threshold,
                }
                record["next_tutorial_step"] = step_index + 1
                atomic_write_json(self._annotator_path(annotator_id), record)
                return result

            feedback = step_feedback(step, submitted)
            if feedback.correct:
                record["next_tutorial_step"] = step_index + 1
                atomic_write_json(self._annotator_path(annotator_id), record)
            return feedback

    # -- assignment ------------------------------------------------------------

    def _completed_by_passage(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {p.passage_id: set()
                                    for p in self.corpus.passages}
        ann_dir = self.root / "annotations"
        if ann_dir.exists():
            for pdir in ann_dir.iterdir():
                if pdir.is_dir() and pdir.name in out:
                    out[pdir.name] = {f.stem for f in pdir.glob("*.json")}
        return out

    def _purge_expired_leases(self) -> None:
        now = self._now()
        for aid in [a for a, l in self._leases.items() if l.expires_at <= now]:
            del self._leases[aid]

    def assign_next(self, annotator_id: str) -> dict | None:
        """Least-annotated passage this annotator hasn't done, or None.

        Ties break on passage_id; a live lease for this annotator is simply
        returned again (one lease per annotator).
        """
        with self._lock:
            self._require_screened(annotator_id)
            self._purge_expired_leases()
            held = self._leases.get(annotator_id)
            if held is not None:
                return {"passage_id": held.passage_id,
                        "expires_at": held.expires_at}

            completed = self._completed_by_passage()
            leased: dict[str, int] = {}
            for lease in self._leases.values():
                leased[lease.passage_id] = leased.get(lease.passage_id, 0) + 1

            target = self.config["target_annotations"]
            best = None
            for p in self.corpus.passages:
                pid = p.passage_id
                done = completed[pid]
                if annotator_id in done:
                    continue
                load = len(done) + leased.get(pid, 0)
                if load >= target:
                    continue
                if best is None or (load, pid) < best:
                    best = (load, pid)
            if best is None:
                return None
            pid = best[1]
            expires = self._now() + self.config["lease_ttl_minutes"] * 60
            self._leases[annotator_id] = Lease(annotator_id, pid, expires)
            return {"passage_id": pid, "expires_at": expires}

    def release_lease(self, annotator_id: str) -> None:
        with self._lock:
            self._leases.pop(annotator_id, None)

    # -- submissions ------------------------------------------------------------

    def _annotation_path(self, passage_id: str, annotator_id: str) -> Path:
        return self.root / "annotations" / passage_id / f"{annotator_id}.json"

    def submit_annotation(self, clustering: Clustering) -> dict:
        """Persist one annotator's clustering for a leased passage.

        Resubmission replaces the prior record (last-write-wins) when the
        store allows it; otherwise a valid lease is required.
        """
        with self._lock:
            self._require_screened(clustering.annotator_id)
            passage = self.corpus.passage(clustering.passage_id)
            clustering.validate_partition(set(passage.mentions.ids()))

            path = self._annotation_path(clustering.passage_id,
                                         clustering.annotator_id)
            replacing = path.exists()
            self._purge_expired_leases()
            lease = self._leases.get(clustering.annotator_id)
            has_lease = (lease is not None
                         and lease.passage_id == clustering.passage_id)
            if not has_lease and not (replacing
                                      and self.config["allow_resubmission"]):
                raise LeaseError(
                    f"no lease held for passage {clustering.passage_id}")

            if not replacing:
                done = self._completed_by_passage()[clustering.passage_id]
                if len(done) >= self.config["target_annotations"]:
                    raise LeaseError(
                        f"passage {clustering.passage_id} is fully annotated")

            atomic_write_json(path, clustering.to_json_dict())
            if has_lease:
                del self._leases[clustering.annotator_id]
            return {"status": "accepted", "replaced": replacing}

    def annotation(self, passage_id: str, annotator_id: str) -> Clustering | None:
        path = self._annotation_path(passage_id, annotator_id)
        if not path.exists():
            return None
        return self._load_clustering(path)

    def _load_clustering(self, path: Path) -> Clustering:
        clustering = Clustering.from_json_dict(_read_json(path))
        passage = self.corpus.passage(clustering.passage_id)
        clustering.validate_partition(set(passage.mentions.ids()))
        return clustering

    def annotations_for(self, passage_id: str) -> list[Clustering]:
        pdir = self.root / "annotations" / passage_id
        if not pdir.exists():
            return []
        return [self._load_clustering(p) for p in sorted(pdir.glob("*.json"))]

    def all_annotations(self) -> dict[str, list[Clustering]]:
        out = {}
        for p in self.corpus.passages:
            anns = self.annotations_for(p.passage_id)
            if anns:
                out[p.passage_id] = anns
        return out

    # -- reports ------------------------------------------------------------

    def report(self, kind: str, **params) -> dict:
        """Recompute (or serve from cache) one of the analysis reports."""
        builders = {
            "aggregate": self._report_aggregate,
            "iaa": self._report_iaa,
            "scores": self._report_scores,
            "detector-eval": self._report_detector_eval,
        }
        if kind not in builders:
            raise CorefkitError(f"unknown report kind {kind!r}")
        digest = self._report_digest(kind, params)
        cache = self.root / "reports" / f"{kind}-{digest}.json"
        if cache.exists():
            return _read_json(cache)
        report = builders[kind](**params)
        atomic_write_json(cache, report)
        return report

    def _report_digest(self, kind: str, params: dict) -> str:
        h = hashlib.sha256()
        h.update(json.dumps({"kind": kind, "params": params},
                            sort_keys=True).encode())
        h.update((self.root / "corpus.json").read_bytes())
        ann_dir = self.root / "annotations"
        if ann_dir.exists():
            for path in sorted(ann_dir.rglob("*.json")):
                h.update(str(path.relative_to(ann_dir)).encode())
                h.update(path.read_bytes())
        for key in ("gold", "gold_mentions"):
            value = params.get(key)
            if value and Path(value).exists():
                h.update(Path(value).read_bytes())
        return h.hexdigest()[:16]

    def _report_aggregate(self, tau: int = 3) -> dict:
        aggregates = []
        skipped = []
        for pid, anns in sorted(self.all_annotations().items()):
            if len(anns) < tau:
                skipped.append({"passage_id": pid, "n_annotators": len(anns)})
                continue
            votes = count_votes(anns)
            agg = aggregate(votes, AggregationConfig(tau),
                            anns[0].mention_ids())
            out = agg.to_json_dict()
            out["n_annotators"] = len(anns)
            aggregates.append(out)
        return {"kind": "aggregate", "tau": tau, "aggregates": aggregates,
                "skipped": skipped}

    def _passage_groups(self, group_by: str = "domain") -> dict[str, str]:
        groups = {}
        for p in self.corpus.passages:
            doc = self.corpus.document(p.doc_id)
            groups[p.passage_id] = (doc.domain if group_by == "domain"
                                    else doc.doc_id)
        return groups

    def _report_iaa(self, singletons: str = "exclude",
                    group_by: str = "domain") -> dict:
        anns = [a for group in self.all_annotations().values() for a in group]
        reports = pairwise_iaa(anns, mode=singletons,
                               groups=self._passage_groups(group_by))
        return {"kind": "iaa", "singleton_mode": singletons,
                "group_by": group_by,
                "groups": [r.to_json_dict() for r in reports]}

    def _report_scores(self, gold: str, tau: int | None = None,
                       singletons: str = "include") -> dict:
        """B3 of aggregated annotations against gold clusterings.

        ``gold`` is a JSON file {"clusterings": [...]}; when ``tau`` is None
        the full 1..N sweep is reported per passage.
        """
        gold_path = Path(gold)
        if not gold_path.exists():
            raise StoreError(f"gold clusterings not found: {gold}")
        gold_by_passage = {
            c["passage_id"]: Clustering.from_json_dict(c)
            for c in _read_json(gold_path)["clusterings"]
        }
        rows = []
        for pid, anns in sorted(self.all_annotations().items()):
            if pid not in gold_by_passage:
                continue
            gold_clustering = gold_by_passage[pid]
            taus = [tau] if tau is not None else \
                list(range(1, len(anns) + 1))
            votes = count_votes(anns)
            for t in taus:
                if not 1 <= t <= len(anns):
                    continue
                agg = aggregate(votes, AggregationConfig(t),
                                anns[0].mention_ids())
                response = Clustering(pid, f"aggregate-tau{t}",
                                      [set(c) for c in agg.clusters])
                score = b3(gold_clustering, response, mode=singletons)
                rows.append({
                    "passage_id": pid,
                    "tau": t,
                    "precision": score.precision,
                    "recall": score.recall,
                    "f1": score.f1,
                    "singleton_mode": singletons,
                })
        return {"kind": "scores", "singleton_mode": singletons, "rows": rows}

    def _report_detector_eval(self, gold_mentions: str) -> dict:
        """Headword recall/precision of the corpus mentions against a gold
        span file {"mentions": [{"doc_id", "span", "head"?}]}."""
        gold_path = Path(gold_mentions)
        if not gold_path.exists():
            raise StoreError(f"gold mentions not found: {gold_mentions}")
        gold_obj = _read_json(gold_path)
        per_document = []
        for doc in self.corpus.documents:
            spans = [tuple(m["span"]) for m in gold_obj["mentions"]
                     if m["doc_id"] == doc.doc_id]
            gold_set = gold_mentions_with_heads(spans, doc)
            pred = MentionSet([
                m for p in self.corpus.passages if p.doc_id == doc.doc_id
                for m in p.mentions])
            result = eval_detector(pred, gold_set, doc)
            row = result.to_json_dict()
            row["doc_id"] = doc.doc_id
            per_document.append(row)
        matched = sum(r["matched"] for r in per_document)
        pred_total = sum(r["pred_total"] for r in per_document)
        gold_total = sum(r["gold_total"] for r in per_document)
        tokens = sum(d.token_count for d in self.corpus.documents)
        overall = {
            "recall": matched / gold_total if gold_total else 1.0,
            "precision": matched / pred_total if pred_total else 1.0,
            "density_pred": pred_total / tokens if tokens else 0.0,
            "density_gold": gold_total / tokens if tokens else 0.0,
            "matched": matched,
            "pred_total": pred_total,
            "gold_total": gold_total,
            "recall_undefined": gold_total == 0,
            "precision_undefined": pred_total == 0,
        }
        return {"kind": "detector-eval", "overall": overall,
                "per_document": per_document}
