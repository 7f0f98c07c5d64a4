"""Directed graphs, cluster partitions and the structural counts built on them.

Node ids are 0-based everywhere in the library. Config files use 1-based
labels and are converted in :mod:`kuracluster.config`.

Adjacency convention: ``adjacency[i, j] == 1`` means the edge ``(i, j)``
exists and node ``j`` influences node ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed adjacency matrices or partitions."""


@dataclass(frozen=True, eq=False)
class Digraph:
    adjacency: np.ndarray

    def __post_init__(self):
        self.adjacency.setflags(write=False)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edge list in row-major order; coupling vectors are indexed by it."""
        rows, cols = np.nonzero(self.adjacency)
        return tuple(zip(rows.tolist(), cols.tolist()))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: idx for idx, e in enumerate(self.edges)}

    @cached_property
    def _edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        targets, sources = arr[:, 0].copy(), arr[:, 1].copy()
        targets.setflags(write=False)
        sources.setflags(write=False)
        return targets, sources

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(targets, sources)`` index arrays aligned with :attr:`edges` (read-only)."""
        return self._edge_arrays


def build_digraph(adjacency) -> Digraph:
    """Validate a 0/1 adjacency matrix and wrap it as a :class:`Digraph`."""
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphError(f"adjacency must be square, got shape {a.shape}")
    if a.size and not np.all((a == 0) | (a == 1)):
        raise GraphError("adjacency entries must be 0 or 1")
    a = a.astype(np.int64)
    loops = np.nonzero(np.diag(a))[0]
    if loops.size:
        raise GraphError(f"self-loop at node(s) {loops.tolist()}")
    return Digraph(a)


def complete_digraph(n: int) -> Digraph:
    return build_digraph(np.ones((n, n), dtype=np.int64) - np.eye(n, dtype=np.int64))


@dataclass(frozen=True)
class Partition:
    """Ordered clusters of node ids plus one representative node per cluster.

    The representative defaults to the last node listed in each cluster.
    """

    clusters: tuple[tuple[int, ...], ...]
    representatives: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.clusters)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.clusters)

    @cached_property
    def n(self) -> int:
        return sum(self.sizes)

    @cached_property
    def labels(self) -> np.ndarray:
        """Cluster index of every node."""
        lab = np.empty(self.n, dtype=np.int64)
        for s, members in enumerate(self.clusters):
            lab[list(members)] = s
        lab.setflags(write=False)
        return lab

    @cached_property
    def non_representatives(self) -> tuple[int, ...]:
        """Nodes carrying an error coordinate, cluster by cluster in listed order."""
        return tuple(
            i for s, members in enumerate(self.clusters)
            for i in members if i != self.representatives[s]
        )

    def with_representatives(self, representatives: Sequence[int]) -> "Partition":
        return make_partition(self.clusters, representatives)


def make_partition(clusters: Sequence[Sequence[int]],
                   representatives: Sequence[int] | None = None,
                   n: int | None = None) -> Partition:
    """Build a validated :class:`Partition`.

    ``n`` (when given) is the node count the clusters must cover exactly.
    A single cluster is accepted so that degenerate cases can be
    represented; the theory itself needs at least two.
    """
    cl = tuple(tuple(int(i) for i in c) for c in clusters)
    if not cl:
        raise GraphError("partition has no clusters")
    if any(len(c) == 0 for c in cl):
        raise GraphError("partition contains an empty cluster")
    flat = [i for c in cl for i in c]
    if len(set(flat)) != len(flat):
        raise GraphError("clusters overlap")
    total = len(flat) if n is None else n
    if sorted(flat) != list(range(total)):
        missing = sorted(set(range(total)) - set(flat))
        extra = sorted(set(flat) - set(range(total)))
        raise GraphError(f"clusters must cover nodes 0..{total - 1} "
                         f"(missing {missing}, unknown {extra})")
    if representatives is None:
        reps = tuple(c[-1] for c in cl)
    else:
        reps = tuple(int(r) for r in representatives)
        if len(reps) != len(cl):
            raise GraphError("need exactly one representative per cluster")
        for s, (r, c) in enumerate(zip(reps, cl)):
            if r not in c:
                raise GraphError(f"representative {r} is not a member of cluster {s}")
    return Partition(cl, reps)


@dataclass(frozen=True, eq=False)
class ClusterStructure:
    """Edge counts of a graph relative to a partition.

    ``c_sr[s, r]`` is the number of in-links a node of cluster ``s``
    receives from cluster ``r``. When that number differs between nodes
    of ``s`` the largest value is stored; ``indegree_sets`` keeps the full
    picture.
    """

    c_in: int
    c_out: int
    c_sr: np.ndarray
    c_max: int
    indegree_sets: dict[tuple[int, int], frozenset[int]] = field(repr=False)

    @property
    def c_sr_total(self) -> int:
        """Sum of ``c_sr`` over all ordered pairs ``s != r``."""
        off = self.c_sr.copy()
        np.fill_diagonal(off, 0)
        return int(off.sum())


def inter_cluster_indegrees(g: Digraph, p: Partition) -> np.ndarray:
    """``(n, m)`` matrix: in-links of each node coming from each cluster."""
    onehot = np.zeros((g.n, p.m), dtype=np.int64)
    onehot[np.arange(g.n), p.labels] = 1
    return g.adjacency @ onehot


def cluster_cardinalities(g: Digraph, p: Partition) -> ClusterStructure:
    if p.n != g.n:
        raise GraphError(f"partition covers {p.n} nodes, graph has {g.n}")
    labels = p.labels
    targets, sources = g.edge_arrays()
    same = labels[targets] == labels[sources]
    c_in = int(same.sum())
    c_out = int((~same).sum())

    deg = inter_cluster_indegrees(g, p)
    c_sr = np.zeros((p.m, p.m), dtype=np.int64)
    sets: dict[tuple[int, int], frozenset[int]] = {}
    for s, members in enumerate(p.clusters):
        for r in range(p.m):
            if r == s:
                continue
            vals = deg[list(members), r]
            sets[(s, r)] = frozenset(vals.tolist())
            c_sr[s, r] = vals.max()
    off = c_sr.copy()
    np.fill_diagonal(off, 0)
    c_max = int(off.sum(axis=1).max()) if p.m else 0
    return ClusterStructure(c_in, c_out, c_sr, c_max, sets)


@dataclass(frozen=True, eq=False)
class ResidualMatrices:
    A: np.ndarray           # adjacency of the intra-cluster subgraph
    A_minus: np.ndarray     # A with the representative's row/column removed
    A_tilde: np.ndarray     # residual adjacency w.r.t. the representative
    D_minus: np.ndarray     # degree matrix of A, representative removed

    @property
    def stability_matrix(self) -> np.ndarray:
        """``A_tilde - D_minus``, the matrix whose spectrum decides stability."""
        return self.A_tilde - self.D_minus


def residual_matrices(g: Digraph, p: Partition, s: int) -> ResidualMatrices:
    members = list(p.clusters[s])
    rep = p.representatives[s]
    if rep not in members:
        raise GraphError(f"representative {rep} is not a member of cluster {s}")
    k = members.index(rep)
    A = g.adjacency[np.ix_(members, members)].copy()
    keep = [idx for idx in range(len(members)) if idx != k]
    A_minus = A[np.ix_(keep, keep)]
    rep_row = A[k, keep]
    A_tilde = A_minus - np.tile(rep_row, (len(keep), 1))
    D_minus = np.diag(A.sum(axis=1)[keep])
    return ResidualMatrices(A, A_minus, A_tilde.astype(np.int64), D_minus)
