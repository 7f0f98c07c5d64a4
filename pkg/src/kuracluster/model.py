"""Adaptive Kuramoto network: parameters, states and right-hand sides.

Two equivalent formulations are provided. :func:`rhs_full` works on node
phases and per-edge couplings directly. :func:`rhs_error` works in cluster
coordinates: one phase per cluster (the representative's), phase errors of
the remaining nodes relative to their representative, and couplings split
into inter- and intra-cluster edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from kuracluster.graph import Digraph, Partition
from kuracluster.rules import LearningRule


def wrap_pi(x):
    """Map angles to (-π, π]."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, 2 * math.pi) - math.pi
    return np.where(y == -math.pi, math.pi, y)


def wrap_2pi(x):
    """Map angles to [0, 2π)."""
    y = np.mod(np.asarray(x, dtype=float), 2 * math.pi)
    return np.where(y >= 2 * math.pi, 0.0, y)


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    """Graph, natural frequencies and plasticity parameters.

    ``mu_intra`` applies to edges inside a cluster of ``partition``,
    ``mu_inter`` to every other edge. Without a partition all edges use
    ``mu_inter``. ``mu_inter = 0`` is allowed and decouples the learning
    on inter-cluster links.
    """

    graph: Digraph
    omega: np.ndarray
    gamma: float
    mu_inter: float
    mu_intra: float
    rule: LearningRule
    partition: Partition | None = None

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        object.__setattr__(self, "omega", omega)
        if omega.shape != (self.graph.n,):
            raise ValueError(f"omega must have {self.graph.n} entries, got shape {omega.shape}")
        if not np.all(np.isfinite(omega)):
            raise ValueError("omega must be finite")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.mu_inter >= 0:
            raise ValueError("mu_inter must be non-negative")
        if not self.mu_intra > 0:
            raise ValueError("mu_intra must be positive")
        if self.partition is not None and self.partition.n != self.graph.n:
            raise ValueError("partition does not cover the graph's nodes")

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def intra_mask(self) -> np.ndarray:
        """Per-edge flag: both endpoints in the same cluster."""
        targets, sources = self.graph.edge_arrays()
        if self.partition is None:
            return np.zeros(len(targets), dtype=bool)
        lab = self.partition.labels
        return lab[targets] == lab[sources]

    @cached_property
    def edge_mu(self) -> np.ndarray:
        return np.where(self.intra_mask, self.mu_intra, self.mu_inter)

    def replace(self, **changes) -> "NetworkSpec":
        fields = dict(graph=self.graph, omega=self.omega, gamma=self.gamma,
                      mu_inter=self.mu_inter, mu_intra=self.mu_intra,
                      rule=self.rule, partition=self.partition)
        fields.update(changes)
        return NetworkSpec(**fields)


@dataclass
class SimState:
    theta: np.ndarray   # unwrapped phases
    k: np.ndarray       # one coupling per edge, in graph.edges order

    def pack(self) -> np.ndarray:
        return np.concatenate([self.theta, self.k])

    @classmethod
    def unpack(cls, y: np.ndarray, n: int) -> "SimState":
        return cls(y[:n].copy(), y[n:].copy())


@dataclass
class ErrorState:
    phi: np.ndarray       # cluster phases, one per cluster
    e: np.ndarray         # errors of non-representative nodes (Partition.non_representatives order)
    k_inter: np.ndarray   # couplings on inter-cluster edges (edge-list order)
    k_intra: np.ndarray   # couplings on intra-cluster edges (edge-list order)

    def pack(self) -> np.ndarray:
        return np.concatenate([self.phi, self.e, self.k_inter, self.k_intra])

    @classmethod
    def unpack(cls, y: np.ndarray, m: int, n_err: int, c_out: int) -> "ErrorState":
        a, b, c = m, m + n_err, m + n_err + c_out
        return cls(y[:a].copy(), y[a:b].copy(), y[b:c].copy(), y[c:].copy())


def _require_partition(spec: NetworkSpec, p: Partition | None) -> Partition:
    p = p if p is not None else spec.partition
    if p is None:
        raise ValueError("a partition is required")
    return p


def rhs_full(spec: NetworkSpec, state: SimState) -> SimState:
    """Time derivative of phases and edge couplings."""
    targets, sources = spec.graph.edge_arrays()
    if state.theta.shape != (spec.n,) or state.k.shape != (len(targets),):
        raise ValueError("state dimensions do not match the network")
    diff = state.theta[sources] - state.theta[targets]
    dtheta = spec.omega + np.bincount(targets, weights=state.k * np.sin(diff), minlength=spec.n)
    dk = -spec.gamma * state.k + spec.edge_mu * spec.rule.value_at(diff)
    return SimState(dtheta, dk)


@dataclass(frozen=True, eq=False)
class ErrorLayout:
    """Index bookkeeping for the cluster-coordinate state."""

    partition: Partition
    err_nodes: np.ndarray     # node id of each error coordinate
    err_pos: np.ndarray       # per node: position in e, or -1 for representatives
    inter_edges: np.ndarray   # indices into graph.edges
    intra_edges: np.ndarray

    @property
    def m(self) -> int:
        return self.partition.m

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return self.m, len(self.err_nodes), len(self.inter_edges), len(self.intra_edges)


@lru_cache(maxsize=128)
def error_layout(graph: Digraph, p: Partition) -> ErrorLayout:
    err_nodes = np.array(p.non_representatives, dtype=np.int64)
    err_pos = np.full(graph.n, -1, dtype=np.int64)
    err_pos[err_nodes] = np.arange(len(err_nodes))
    targets, sources = graph.edge_arrays()
    intra = p.labels[targets] == p.labels[sources]
    return ErrorLayout(p, err_nodes, err_pos,
                       np.nonzero(~intra)[0], np.nonzero(intra)[0])


def to_error(state: SimState, graph: Digraph, p: Partition) -> ErrorState:
    """Cluster coordinates; errors are wrapped to (-π, π]."""
    lay = error_layout(graph, p)
    reps = np.array(p.representatives)
    phi = state.theta[reps].copy()
    e = wrap_pi(state.theta[lay.err_nodes] - state.theta[reps[p.labels[lay.err_nodes]]])
    return ErrorState(phi, np.atleast_1d(e).astype(float),
                      state.k[lay.inter_edges].copy(), state.k[lay.intra_edges].copy())


def from_error(es: ErrorState, graph: Digraph, p: Partition) -> SimState:
    lay = error_layout(graph, p)
    theta = es.phi[p.labels].astype(float)
    theta[lay.err_nodes] += es.e
    k = np.empty(graph.n_edges)
    k[lay.inter_edges] = es.k_inter
    k[lay.intra_edges] = es.k_intra
    return SimState(theta, k)


class ErrorSystem:
    """Cluster-coordinate right-hand side on a flat vector ``(phi, e, k_inter, k_intra)``.

    Representative phases follow their own node equation; each error obeys
    ``w_i - w_rep + drive_i - drive_rep`` where ``drive`` is the coupling
    input written with errors and cluster-phase differences. Couplings
    relax towards ``mu * Γ`` of the same differences: ``mu_inter`` across
    clusters, ``mu_intra`` inside them, where the difference reduces to
    ``e_j - e_i``.
    """

    def __init__(self, spec: NetworkSpec, p: Partition):
        g = spec.graph
        lay = error_layout(g, p)
        self.spec, self.partition, self.layout = spec, p, lay
        self.m, self.n_err, self.c_out, self.c_in = lay.sizes
        self.n = g.n
        targets, sources = g.edge_arrays()
        order = np.concatenate([lay.inter_edges, lay.intra_edges]).astype(np.int64)
        self.tgt, self.src = targets[order], sources[order]
        lab = p.labels
        self.lab_tgt, self.lab_src = lab[self.tgt], lab[self.src]
        self.reps = np.array(p.representatives, dtype=np.int64)
        self.err_nodes = lay.err_nodes
        self.owner = self.reps[lab[lay.err_nodes]]
        self.w_bar = spec.omega[self.reps]
        self.dw = spec.omega[lay.err_nodes] - spec.omega[self.owner]
        self.mu = np.concatenate([np.full(self.c_out, spec.mu_inter),
                                  np.full(self.c_in, spec.mu_intra)])

    def __call__(self, y: np.ndarray) -> np.ndarray:
        m, ne = self.m, self.n_err
        phi, e, k = y[:m], y[m:m + ne], y[m + ne:]
        e_node = np.zeros(self.n)
        e_node[self.err_nodes] = e
        # cluster-phase difference vanishes on intra edges, leaving e_j - e_i
        d = (e_node[self.src] - e_node[self.tgt]) + (phi[self.lab_src] - phi[self.lab_tgt])
        drive = np.bincount(self.tgt, weights=k * np.sin(d), minlength=self.n)
        out = np.empty_like(y)
        out[:m] = self.w_bar + drive[self.reps]
        out[m:m + ne] = self.dw + drive[self.err_nodes] - drive[self.owner]
        out[m + ne:] = -self.spec.gamma * k + self.mu * self.spec.rule.value_at(d)
        return out

    def unpack(self, y: np.ndarray) -> ErrorState:
        return ErrorState.unpack(y, self.m, self.n_err, self.c_out)


def rhs_error(spec: NetworkSpec, state: ErrorState, p: Partition | None = None) -> ErrorState:
    """Time derivative in cluster coordinates (see :class:`ErrorSystem`)."""
    sys_ = ErrorSystem(spec, _require_partition(spec, p))
    return sys_.unpack(sys_(state.pack()))
