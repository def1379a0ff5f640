import random

import pytest

from corefkit.aggregation import (
    AggregationConfig, UnionFind, aggregate, aggregate_annotations, count_votes,
)
from corefkit.errors import MentionUniverseError

from conftest import clustering, fixture_f1
from oracles import closure_clusters


def as_sets(agg):
    return {frozenset(c) for c in agg.clusters}


class TestCountVotes:
    def test_single_annotator_triangle(self):
        votes = count_votes([clustering("p1", "a1", {"a", "b", "c"})])
        assert votes.count("a", "b") == 1
        assert votes.count("a", "c") == 1
        assert votes.count("b", "c") == 1
        assert votes.n_annotators == 1

    def test_unanimous_five(self):
        anns = [clustering("p1", f"a{i}", {"x", "y"}, {"z"}) for i in range(5)]
        votes = count_votes(anns)
        assert votes.count("x", "y") == 5
        assert votes.count("x", "z") == 0

    def test_fixture_f1_counts(self):
        votes = count_votes(fixture_f1())
        assert votes.count("a", "b") == 4
        assert votes.count("b", "c") == 2
        assert votes.count("a", "c") == 1

    def test_mismatched_universe_rejected(self):
        anns = [
            clustering("p1", "a1", {"a", "b"}),
            clustering("p1", "a2", {"a", "c"}),
        ]
        with pytest.raises(MentionUniverseError, match="a2"):
            count_votes(anns)


class TestAggregate:
    def test_f1_tau3_majority(self):
        out = aggregate_annotations(fixture_f1(), tau=3)
        assert as_sets(out) == {frozenset({"a", "b"}), frozenset({"c"})}

    def test_f1_tau2_transitive(self):
        out = aggregate_annotations(fixture_f1(), tau=2)
        assert as_sets(out) == {frozenset({"a", "b", "c"})}

    def test_zero_votes_all_singletons(self):
        anns = [clustering("p1", f"a{i}", {"a"}, {"b"}, {"c"})
                for i in range(3)]
        out = aggregate_annotations(anns, tau=1)
        assert as_sets(out) == {frozenset({"a"}), frozenset({"b"}),
                                frozenset({"c"})}

    def test_tau_bounds_enforced(self):
        with pytest.raises(ValueError):
            aggregate_annotations(fixture_f1(), tau=0)
        with pytest.raises(ValueError):
            aggregate_annotations(fixture_f1(), tau=6)
        with pytest.raises(ValueError):
            AggregationConfig(tau=0)

    def test_tau_equal_n_means_unanimous(self):
        anns = [clustering("p1", f"a{i}", {"a", "b"}, {"c"}) for i in range(5)]
        out = aggregate_annotations(anns, tau=5)
        assert as_sets(out) == {frozenset({"a", "b"}), frozenset({"c"})}

    def test_output_is_partition(self):
        out = aggregate_annotations(fixture_f1(), tau=1)
        flat = [m for c in out.clusters for m in c]
        assert sorted(flat) == ["a", "b", "c"]


def random_votes(rng, mention_ids, n_annotators=5):
    from corefkit.aggregation import VoteMatrix
    votes = {}
    ids = sorted(mention_ids)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            c = rng.randint(0, n_annotators)
            if c:
                votes[(a, b)] = c
    return VoteMatrix(passage_id="p", n_annotators=n_annotators, votes=votes)


class TestProperties:
    def test_components_match_closure_oracle(self):
        rng = random.Random(41)
        for _ in range(300):
            ids = [f"m{i}" for i in range(rng.randint(1, 10))]
            votes = random_votes(rng, ids)
            for tau in range(1, 6):
                got = as_sets(aggregate(votes, AggregationConfig(tau), ids))
                edges = [pair for pair, c in votes.votes.items() if c >= tau]
                assert got == closure_clusters(ids, edges)

    def test_refinement_as_tau_grows(self):
        rng = random.Random(42)
        for _ in range(200):
            ids = [f"m{i}" for i in range(rng.randint(1, 12))]
            votes = random_votes(rng, ids)
            results = [as_sets(aggregate(votes, AggregationConfig(tau), ids))
                       for tau in range(1, 6)]
            for coarse, fine in zip(results, results[1:]):
                for cluster in fine:
                    assert any(cluster <= other for other in coarse)

    def test_deterministic_ordering(self):
        anns = fixture_f1()
        a = aggregate_annotations(anns, tau=2)
        b = aggregate_annotations(list(reversed(anns)), tau=2)
        assert a.clusters == b.clusters


class TestUnionFind:
    def test_basic(self):
        uf = UnionFind(["a", "b", "c", "d"])
        uf.union("a", "b")
        uf.union("c", "d")
        assert uf.find("a") == uf.find("b")
        assert uf.find("c") == uf.find("d")
        assert uf.find("a") != uf.find("c")
        groups = {frozenset(g) for g in uf.groups().values()}
        assert groups == {frozenset({"a", "b"}), frozenset({"c", "d"})}
