import json
import threading

import pytest

from corefkit.conllu import parse_conllu
from corefkit.corpus import Corpus
from corefkit.errors import (
    AuthorizationError, CorefkitError, LeaseError, PartitionError,
)
from corefkit.model import Clustering
from corefkit.passages import SplitConfig
from corefkit.scoring import ScreeningResult
from corefkit.store import AnnotationStore, atomic_write_json
from corefkit.tutorial import StepFeedback, example_script


def small_corpus(examples_conllu) -> Corpus:
    c = Corpus(documents=parse_conllu(examples_conllu))
    c.split(SplitConfig(target_tokens=20, min_tail_tokens=5))
    c.detect()
    return c


@pytest.fixture()
def store(tmp_path, examples_conllu):
    return AnnotationStore.initialize(
        tmp_path / "store", small_corpus(examples_conllu), example_script(),
        target_annotations=2)


def screen(store, name=None) -> dict:
    """Register and fast-forward an annotator through the tutorial."""
    record = store.register_annotator(name)
    aid = record["annotator_id"]
    for i, step in enumerate(store.tutorial.steps):
        out = store.run_tutorial_step(aid, i, step.gold_clusters)
    assert isinstance(out, ScreeningResult) and out.passed
    return store.annotator(aid)


def full_clusters(store, passage_id):
    ids = store.corpus.passage(passage_id).mentions.ids()
    return [[m] for m in ids]


class TestTutorialFlow:
    def test_wrong_link_flagged(self, store):
        record = store.register_annotator()
        aid = record["annotator_id"]
        step = store.tutorial.steps[0]
        # merge all of John/Fred/he/him plus the party singleton
        merged = [[m["mention_id"] for m in step.mentions[:4]],
                  [step.mentions[4]["mention_id"]]]
        feedback = store.run_tutorial_step(aid, 0, merged)
        assert isinstance(feedback, StepFeedback)
        assert not feedback.correct
        john, fred = step.mentions[0]["mention_id"], step.mentions[1]["mention_id"]
        assert (john, fred) in feedback.wrong_links
        assert any("John and Fred" in m for m in feedback.messages)
        # incorrect answer does not advance
        assert store.annotator(aid)["next_tutorial_step"] == 0

    def test_gold_answers_advance_and_pass(self, store):
        record = screen(store)
        assert record["screening"]["passed"]
        assert record["screening"]["b3_f1"] == 1.0

    def test_out_of_order_rejected(self, store):
        record = store.register_annotator()
        with pytest.raises(CorefkitError, match="order"):
            store.run_tutorial_step(record["annotator_id"], 2,
                                    store.tutorial.steps[2].gold_clusters)

    def test_failed_screening_blocks_assignment(self, store):
        record = store.register_annotator()
        aid = record["annotator_id"]
        for i, step in enumerate(store.tutorial.steps[:-1]):
            store.run_tutorial_step(aid, i, step.gold_clusters)
        screening = store.tutorial.steps[-1]
        all_ids = [m["mention_id"] for m in screening.mentions]
        result = store.run_tutorial_step(aid, len(store.tutorial.steps) - 1,
                                         [all_ids])  # everything one cluster
        assert isinstance(result, ScreeningResult) and not result.passed
        with pytest.raises(AuthorizationError):
            store.assign_next(aid)


class TestAssignment:
    def test_unscreened_rejected(self, store):
        record = store.register_annotator()
        with pytest.raises(AuthorizationError):
            store.assign_next(record["annotator_id"])

    def test_first_assignment_is_lowest_passage(self, store):
        record = screen(store)
        out = store.assign_next(record["annotator_id"])
        assert out["passage_id"] == store.corpus.passages[0].passage_id

    def test_prefers_least_annotated(self, store):
        a1 = screen(store)["annotator_id"]
        first = store.assign_next(a1)["passage_id"]
        store.submit_annotation(Clustering(
            first, a1, [set(c) for c in full_clusters(store, first)]))
        a2 = screen(store)["annotator_id"]
        # a2 should get a passage with zero annotations, not `first`
        got = store.assign_next(a2)["passage_id"]
        assert got != first

    def test_lease_is_idempotent_per_annotator(self, store):
        aid = screen(store)["annotator_id"]
        one = store.assign_next(aid)
        two = store.assign_next(aid)
        assert one == two

    def test_never_same_passage_twice(self, store):
        aid = screen(store)["annotator_id"]
        seen = set()
        while True:
            out = store.assign_next(aid)
            if out is None:
                break
            pid = out["passage_id"]
            assert pid not in seen
            seen.add(pid)
            store.submit_annotation(Clustering(
                pid, aid, [set(c) for c in full_clusters(store, pid)]))
        assert seen == {p.passage_id for p in store.corpus.passages}

    def test_expired_lease_reassignable(self, tmp_path, examples_conllu):
        clock = [0.0]
        store = AnnotationStore.initialize(
            tmp_path / "store", small_corpus(examples_conllu),
            example_script(), target_annotations=1,
            lease_ttl_minutes=1, now_fn=lambda: clock[0])
        a1 = screen(store)["annotator_id"]
        a2 = screen(store)["annotator_id"]
        first = store.assign_next(a1)["passage_id"]
        # target is 1, so a2 cannot get the leased passage...
        assert store.assign_next(a2)["passage_id"] != first
        store.release_lease(a2)
        clock[0] += 61  # ...until a1's lease expires
        assert store.assign_next(a2)["passage_id"] == first

    def test_saturation_returns_none(self, tmp_path, examples_conllu):
        store = AnnotationStore.initialize(
            tmp_path / "store", small_corpus(examples_conllu),
            example_script(), target_annotations=1)
        a1 = screen(store)["annotator_id"]
        while (out := store.assign_next(a1)) is not None:
            pid = out["passage_id"]
            store.submit_annotation(Clustering(
                pid, a1, [set(c) for c in full_clusters(store, pid)]))
        a2 = screen(store)["annotator_id"]
        assert store.assign_next(a2) is None


class TestSubmission:
    def test_accepts_complete_partition(self, store):
        aid = screen(store)["annotator_id"]
        pid = store.assign_next(aid)["passage_id"]
        ack = store.submit_annotation(Clustering(
            pid, aid, [set(c) for c in full_clusters(store, pid)]))
        assert ack == {"status": "accepted", "replaced": False}
        stored = store.annotation(pid, aid)
        assert stored is not None

    def test_missing_mention_rejected_by_name(self, store):
        aid = screen(store)["annotator_id"]
        pid = store.assign_next(aid)["passage_id"]
        clusters = full_clusters(store, pid)
        dropped = clusters.pop()
        with pytest.raises(PartitionError) as err:
            store.submit_annotation(Clustering(
                pid, aid, [set(c) for c in clusters]))
        assert err.value.missing == sorted(dropped)

    def test_submit_without_lease_conflicts(self, store):
        aid = screen(store)["annotator_id"]
        pid = store.corpus.passages[0].passage_id
        with pytest.raises(LeaseError):
            store.submit_annotation(Clustering(
                pid, aid, [set(c) for c in full_clusters(store, pid)]))

    def test_resubmission_last_write_wins(self, store):
        aid = screen(store)["annotator_id"]
        pid = store.assign_next(aid)["passage_id"]
        singles = [set(c) for c in full_clusters(store, pid)]
        store.submit_annotation(Clustering(pid, aid, singles))
        merged = [set().union(*singles)]
        ack = store.submit_annotation(Clustering(pid, aid, merged))
        assert ack["replaced"]
        stored = store.annotation(pid, aid)
        assert [sorted(c) for c in stored.clusters] == \
            [sorted(merged[0])]

    def test_crash_mid_submit_leaves_old_record(self, store, monkeypatch):
        aid = screen(store)["annotator_id"]
        pid = store.assign_next(aid)["passage_id"]
        singles = [set(c) for c in full_clusters(store, pid)]
        store.submit_annotation(Clustering(pid, aid, singles))
        before = store.annotation(pid, aid).to_json_dict()

        import corefkit.store as store_mod

        def boom(src, dst):
            raise OSError("simulated crash before rename")

        monkeypatch.setattr(store_mod.os, "replace", boom)
        with pytest.raises(OSError):
            store.submit_annotation(Clustering(pid, aid,
                                               [set().union(*singles)]))
        monkeypatch.undo()
        # old record intact, no temp litter
        assert store.annotation(pid, aid).to_json_dict() == before
        leftovers = [p for p in (store.root / "annotations").rglob("*.tmp")]
        assert leftovers == []

    def test_stored_files_validate_on_load(self, store):
        aid = screen(store)["annotator_id"]
        pid = store.assign_next(aid)["passage_id"]
        store.submit_annotation(Clustering(
            pid, aid, [set(c) for c in full_clusters(store, pid)]))
        path = store._annotation_path(pid, aid)
        obj = json.loads(path.read_text())
        obj["clusters"] = obj["clusters"][1:]  # corrupt: drop a cluster
        path.write_text(json.dumps(obj))
        with pytest.raises(PartitionError):
            store.annotations_for(pid)


class TestReports:
    def seed_annotations(self, store, n=2):
        aids = [screen(store)["annotator_id"] for _ in range(n)]
        for aid in aids:
            while (out := store.assign_next(aid)) is not None:
                pid = out["passage_id"]
                ids = store.corpus.passage(pid).mentions.ids()
                # everyone groups the first two mentions, rest singletons
                clusters = [set(ids[:2])] + [{m} for m in ids[2:]]
                store.submit_annotation(Clustering(pid, aid, clusters))
        return aids

    def test_aggregate_report(self, store):
        self.seed_annotations(store)
        report = store.report("aggregate", tau=2)
        assert report["aggregates"]
        for row in report["aggregates"]:
            ids = store.corpus.passage(row["passage_id"]).mentions.ids()
            first_two = set(ids[:2])
            assert any(set(c) == first_two for c in row["clusters"])

    def test_iaa_report_identical_annotators(self, store):
        self.seed_annotations(store)
        report = store.report("iaa", singletons="include")
        assert all(g["mean_f1"] == 1.0 for g in report["groups"])

    def test_report_cache_hit_and_invalidation(self, store):
        self.seed_annotations(store)
        first = store.report("aggregate", tau=2)
        cache_files = list((store.root / "reports").glob("aggregate-*.json"))
        assert len(cache_files) == 1
        again = store.report("aggregate", tau=2)
        assert again == first
        assert len(list((store.root / "reports").glob("aggregate-*.json"))) == 1
        # different params -> different digest
        store.report("aggregate", tau=1)
        assert len(list((store.root / "reports").glob("aggregate-*.json"))) == 2

    def test_scores_report_needs_gold(self, store):
        self.seed_annotations(store)
        with pytest.raises(Exception):
            store.report("scores", gold=str(store.root / "missing.json"))

    def test_scores_report_tau_sweep_recall_monotone(self, store, tmp_path):
        self.seed_annotations(store, n=3)
        gold = {"clusterings": []}
        for p in store.corpus.passages:
            ids = p.mentions.ids()
            gold["clusterings"].append({
                "passage_id": p.passage_id,
                "annotator_id": "gold",
                "clusters": [ids[:2]] + [[m] for m in ids[2:]],
            })
        gold_path = tmp_path / "gold.json"
        gold_path.write_text(json.dumps(gold))
        report = store.report("scores", gold=str(gold_path),
                              singletons="include")
        by_passage = {}
        for row in report["rows"]:
            by_passage.setdefault(row["passage_id"], []).append(row)
        for rows in by_passage.values():
            rows.sort(key=lambda r: r["tau"])
            recalls = [r["recall"] for r in rows]
            assert recalls == sorted(recalls, reverse=True)

    def test_detector_eval_report(self, store, tmp_path):
        gold = {"mentions": []}
        for p in store.corpus.passages:
            for m in p.mentions:
                gold["mentions"].append(
                    {"doc_id": p.doc_id, "span": list(m.span)})
        gold_path = tmp_path / "gold_mentions.json"
        gold_path.write_text(json.dumps(gold))
        report = store.report("detector-eval", gold_mentions=str(gold_path))
        assert report["overall"]["recall"] == 1.0
        assert report["overall"]["precision"] == 1.0


class TestConcurrencySmoke:
    def test_parallel_submissions_serialize(self, tmp_path, examples_conllu):
        store = AnnotationStore.initialize(
            tmp_path / "store", small_corpus(examples_conllu),
            example_script(), target_annotations=3)
        aids = []
        for _ in range(6):
            record = store.register_annotator()
            aid = record["annotator_id"]
            for i, step in enumerate(store.tutorial.steps):
                store.run_tutorial_step(aid, i, step.gold_clusters)
            aids.append(aid)

        errors = []

        def work(aid):
            try:
                while (out := store.assign_next(aid)) is not None:
                    pid = out["passage_id"]
                    ids = store.corpus.passage(pid).mentions.ids()
                    store.submit_annotation(Clustering(
                        pid, aid, [{m} for m in ids]))
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=work, args=(aid,)) for aid in aids]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        for p in store.corpus.passages:
            done = store.annotations_for(p.passage_id)
            assert len(done) <= 3
            annotators = [c.annotator_id for c in done]
            assert len(annotators) == len(set(annotators))


def test_atomic_write_helper(tmp_path):
    path = tmp_path / "x.json"
    atomic_write_json(path, {"a": 1})
    assert json.loads(path.read_text()) == {"a": 1}
    atomic_write_json(path, {"a": 2})
    assert json.loads(path.read_text()) == {"a": 2}
    assert list(tmp_path.glob("*.tmp")) == []
