"""Combining multiple annotators' clusterings into one.

For every unordered mention pair we count how many annotators placed the
two mentions in the same cluster. Pairs with at least ``tau`` votes become
edges of an undirected graph over mentions; the aggregate clusters are its
connected components, so mentions with no surviving edge end up singletons.

With five annotators, tau=3 is majority voting; tau=1 keeps any link a
single annotator drew; tau=5 keeps only unanimous links.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MentionUniverseError
from .model import Clustering, span_from_mention_id


@dataclass(frozen=True)
class AggregationConfig:
    tau: int = 3

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")


@dataclass
class VoteMatrix:
    passage_id: str
    n_annotators: int
    votes: dict[tuple[str, str], int] = field(default_factory=dict)

    def count(self, a: str, b: str) -> int:
        return self.votes.get(_pair(a, b), 0)


@dataclass
class AggregateClustering:
    passage_id: str
    tau: int
    clusters: list[list[str]]

    def to_json_dict(self) -> dict:
        return {
            "passage_id": self.passage_id,
            "tau": self.tau,
            "clusters": self.clusters,
        }


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def count_votes(annotations: list[Clustering]) -> VoteMatrix:
    """Pairwise coreference votes across annotators of one passage."""
    if not annotations:
        raise ValueError("no annotations to count")
    passage_id = annotations[0].passage_id
    universe = annotations[0].mention_ids()
    for ann in annotations[1:]:
        if ann.passage_id != passage_id:
            raise MentionUniverseError(
                f"annotation for {ann.passage_id} mixed into {passage_id}")
        ids = ann.mention_ids()
        if ids != universe:
            raise MentionUniverseError(
                f"annotator {ann.annotator_id} covers a different mention set"
                f" (missing {sorted(universe - ids)}, extra {sorted(ids - universe)})")

    votes: dict[tuple[str, str], int] = {}
    for ann in annotations:
        for cluster in ann.clusters:
            members = sorted(cluster)
            for i, a in enumerate(members):
                for b in members[i + 1:]:
                    key = _pair(a, b)
                    votes[key] = votes.get(key, 0) + 1
    return VoteMatrix(passage_id=passage_id, n_annotators=len(annotations),
                      votes=votes)


class UnionFind:
    """Disjoint sets over hashable items, union by size with path compression."""

    def __init__(self, items):
        self._parent = {x: x for x in items}
        self._size = {x: 1 for x in items}

    def __contains__(self, x) -> bool:
        return x in self._parent

    def find(self, x):
        root = x
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[x] != root:
            self._parent[x], x = root, self._parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]

    def groups(self) -> dict:
        out: dict = {}
        for x in self._parent:
            out.setdefault(self.find(x), []).append(x)
        return out


def _member_key(mention_id: str):
    span = span_from_mention_id(mention_id)
    if span is not None:
        start, end = span
        return (start, -(end - start), mention_id)
    return (0, 0, mention_id)


def aggregate(votes: VoteMatrix, cfg: AggregationConfig,
              mention_ids) -> AggregateClustering:
    """Threshold the vote matrix at tau and take connected components.

    The comparison is >= tau, so tau equal to the annotator count keeps
    only unanimous links and tau=1 keeps any single vote.
    """
    if cfg.tau > votes.n_annotators:
        raise ValueError(
            f"tau {cfg.tau} exceeds annotator count {votes.n_annotators}")
    ids = sorted(set(mention_ids))
    uf = UnionFind(ids)
    for (a, b), count in votes.votes.items():
        if count >= cfg.tau and a in uf and b in uf:
            uf.union(a, b)

    clusters = [sorted(members, key=_member_key)
                for members in uf.groups().values()]
    clusters.sort(key=lambda c: _member_key(c[0]))
    return AggregateClustering(passage_id=votes.passage_id, tau=cfg.tau,
                               clusters=clusters)


def aggregate_annotations(annotations: list[Clustering],
                          tau: int) -> AggregateClustering:
    """count_votes + aggregate in one step."""
    votes = count_votes(annotations)
    if not 1 <= tau <= votes.n_annotators:
        raise ValueError(
            f"tau must lie in [1, {votes.n_annotators}], got {tau}")
    return aggregate(votes, AggregationConfig(tau=tau),
                     annotations[0].mention_ids())
