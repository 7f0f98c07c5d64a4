"""Diagnostics around the cluster-synchronous manifold.

Target values and norm bounds of the manifold, the analytic Jacobian of the
intra-cluster error dynamics (with a finite-difference cross-check),
convergence metrics of simulated trajectories, an empirical scan over the
inter-cluster plasticity and a probe of the representative-node choice.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from kuracluster.conditions import ConditionReport, check_all
from kuracluster.graph import (ClusterStructure, Digraph, Partition, cluster_cardinalities,
                               residual_matrices)
from kuracluster.integrate import Trajectory, integrate
from kuracluster.model import (ErrorState, NetworkSpec, error_layout, from_error, rhs_error)
from kuracluster.spectral import Spectrum, eig


@dataclass(frozen=True)
class ManifoldTarget:
    k_intra_star: float     # constant value of every intra-cluster coupling
    intra_bound: float      # bound on the Euclidean norm of intra-cluster couplings
    inter_bound: float      # bound on the Euclidean norm of inter-cluster couplings


def manifold_target(spec: NetworkSpec, structure: ClusterStructure) -> ManifoldTarget:
    d = spec.rule.delta
    return ManifoldTarget(
        spec.mu_intra * spec.rule.at_zero / spec.gamma,
        spec.mu_intra / spec.gamma * d * math.sqrt(structure.c_in),
        spec.mu_inter / spec.gamma * d * math.sqrt(structure.c_out),
    )


def jacobian_scale(spec: NetworkSpec) -> float:
    return spec.mu_intra * spec.rule.at_zero / spec.gamma


def intra_jacobian_blocks(spec: NetworkSpec, p: Partition) -> list[np.ndarray]:
    """One ``(n_s - 1)``-square block per cluster (empty for singletons)."""
    scale = jacobian_scale(spec)
    return [scale * residual_matrices(spec.graph, p, s).stability_matrix.astype(float)
            for s in range(p.m)]


def intra_jacobian(spec: NetworkSpec, p: Partition) -> np.ndarray:
    """Block-diagonal derivative of the error dynamics w.r.t. the errors on the manifold."""
    blocks = [b for b in intra_jacobian_blocks(spec, p) if b.size]
    if not blocks:
        return np.zeros((0, 0))
    return scipy.linalg.block_diag(*blocks)


def manifold_point(spec: NetworkSpec, p: Partition, phi=None, k_inter=None) -> ErrorState:
    """Point with zero errors and intra couplings at their constant value."""
    lay = error_layout(spec.graph, p)
    m, n_err, c_out, c_in = lay.sizes
    phi = np.zeros(m) if phi is None else np.asarray(phi, dtype=float)
    k_inter = np.zeros(c_out) if k_inter is None else np.asarray(k_inter, dtype=float)
    return ErrorState(phi, np.zeros(n_err), k_inter, np.full(c_in, jacobian_scale(spec)))


def fd_error_jacobian(spec: NetworkSpec, p: Partition, point: ErrorState | None = None,
                      h: float = 1e-6) -> np.ndarray:
    """Central differences of the error derivative w.r.t. the errors.

    The default point has zero inter-cluster couplings, where the error
    dynamics reduce to their intra-cluster part.
    """
    point = manifold_point(spec, p) if point is None else point
    n_err = len(point.e)
    jac = np.empty((n_err, n_err))
    for col in range(n_err):
        plus = ErrorState(point.phi, point.e.copy(), point.k_inter, point.k_intra)
        minus = ErrorState(point.phi, point.e.copy(), point.k_inter, point.k_intra)
        plus.e[col] += h
        minus.e[col] -= h
        jac[:, col] = (rhs_error(spec, plus, p).e - rhs_error(spec, minus, p).e) / (2 * h)
    return jac


def constant_inter_residual(spec: NetworkSpec, p: Partition, k_inter_const: float,
                            phi) -> float:
    """``max |dk_inter/dt|`` on ``e = 0`` with every inter coupling held at one constant.

    Nonzero values show that constant inter-cluster couplings do not stay put.
    """
    lay = error_layout(spec.graph, p)
    pt = manifold_point(spec, p, phi, np.full(len(lay.inter_edges), float(k_inter_const)))
    d = rhs_error(spec, pt, p).k_inter
    return float(np.abs(d).max()) if d.size else 0.0


@dataclass
class ConvergenceMetrics:
    t: np.ndarray
    max_abs_error: np.ndarray
    intra_residual: np.ndarray
    inter_norm: np.ndarray
    intra_norm: np.ndarray

    def final(self) -> dict:
        return {"t": float(self.t[-1]), "max_abs_error": float(self.max_abs_error[-1]),
                "intra_residual": float(self.intra_residual[-1]),
                "inter_norm": float(self.inter_norm[-1]),
                "intra_norm": float(self.intra_norm[-1])}


def convergence_metrics(traj: Trajectory, target: ManifoldTarget) -> ConvergenceMetrics:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    p = traj.partition
    targets, sources = traj.graph.edge_arrays()
    intra = p.labels[targets] == p.labels[sources]
    e = traj.e
    max_err = np.abs(e).max(axis=1) if e.shape[1] else np.zeros(len(traj))
    k_in = traj.k[:, intra]
    k_out = traj.k[:, ~intra]
    resid = np.abs(k_in - target.k_intra_star).max(axis=1) if k_in.shape[1] else np.zeros(len(traj))
    return ConvergenceMetrics(traj.t.copy(), max_err, resid,
                              np.linalg.norm(k_out, axis=1), np.linalg.norm(k_in, axis=1))


def contraction_rate(spec: NetworkSpec, p: Partition) -> float:
    """Slowest linear decay rate of the errors on the manifold; <= 0 if not contracting."""
    rates = [-eig(b).max_real_part for b in intra_jacobian_blocks(spec, p) if b.size]
    if not rates:
        return math.inf
    return min(rates)


@dataclass
class SweepRow:
    mu: float
    conditions: ConditionReport
    convergent: bool
    final_max_abs_error: float
    t_end: float
    completed: bool

    @property
    def label(self) -> str:
        if not self.conditions.existence:
            return "existence-fail"
        if not self.conditions.stability:
            return "stability-fail"
        return "ok"


@dataclass
class SweepResult:
    rows: list[SweepRow]

    @property
    def largest_convergent(self) -> float | None:
        """Largest tested mu that converged; an empirical, non-rigorous bracket."""
        ok = [r.mu for r in self.rows if r.convergent]
        return max(ok) if ok else None


CONVERGENCE_TOL = 1e-2
PERTURBATION = 0.1


def _sweep_one(spec: NetworkSpec, p: Partition, mu: float, phi0: np.ndarray, seed: int,
               dt: float, horizon: float | None, a1_mode: str) -> SweepRow:
    s_mu = spec.replace(mu_inter=float(mu), partition=p)
    conds = check_all(s_mu, p, a1_mode)
    rate = contraction_rate(s_mu, p)
    if horizon is not None:
        t_end = horizon
    elif math.isinf(rate):
        t_end = 0.0
    elif rate > 0:
        t_end = 20.0 / rate
    else:
        t_end = 1000.0
    lay = error_layout(spec.graph, p)
    rng = np.random.default_rng(seed)
    e0 = rng.uniform(-PERTURBATION, PERTURBATION, len(lay.err_nodes))
    start = manifold_point(s_mu, p, phi0)
    start.e = e0
    traj = integrate(s_mu, p, from_error(start, spec.graph, p), t_end, dt,
                     sample_every=max(1, int(round(t_end / dt))))
    err = float(np.abs(traj.e[-1]).max()) if len(lay.err_nodes) else 0.0
    convergent = traj.completed and err < CONVERGENCE_TOL
    return SweepRow(float(mu), conds, convergent, err, float(traj.t[-1]), traj.completed)


def bracket_mu0(spec: NetworkSpec, p: Partition, mu_grid: Sequence[float], *, seed: int = 0,
                dt: float = 1e-2, phi0=None, horizon: float | None = None,
                a1_mode: str = "exact", threads: int | None = None) -> SweepResult:
    """Classify each inter-cluster plasticity value by simulation.

    Every run starts with errors uniform in [-0.1, 0.1] (seeded), intra
    couplings at their manifold value and inter couplings at zero, and is
    called convergent when all errors are below 1e-2 after ``20 / rate``
    time units, ``rate`` being the slowest linear contraction rate of the
    errors. No monotonicity in ``mu`` is assumed.
    """
    grid = [float(x) for x in mu_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("mu grid must be sorted ascending")
    if any(x < 0 for x in grid):
        raise ValueError("mu values must be non-negative")
    phi0 = (np.array([2 * math.pi * s / p.m for s in range(p.m)]) if phi0 is None
            else np.asarray(phi0, dtype=float))
    if threads is None:
        threads = int(os.environ.get("KC_THREADS", os.cpu_count() or 1))
    threads = max(1, threads)
    args = [(spec, p, mu, phi0, seed, dt, horizon, a1_mode) for mu in grid]
    if threads == 1 or len(grid) <= 1:
        rows = [_sweep_one(*a) for a in args]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda a: _sweep_one(*a), args))
    return SweepResult(rows)


@dataclass
class RepresentativeProbe:
    cluster: int
    spectra: dict[int, Spectrum]     # representative node -> spectrum of A_tilde - D_minus
    verdicts: dict[int, bool]

    @property
    def unanimous(self) -> bool:
        return len(set(self.verdicts.values())) <= 1


def representative_invariance_probe(g: Digraph, p: Partition,
                                    sign_at_zero: int = 1) -> list[RepresentativeProbe]:
    """Stability verdict of every cluster under every possible representative."""
    out = []
    for s, members in enumerate(p.clusters):
        spectra, verdicts = {}, {}
        for rep in members:
            reps = list(p.representatives)
            reps[s] = rep
            q = p.with_representatives(reps)
            if len(members) < 2:
                spectra[rep] = Spectrum(())
                verdicts[rep] = True
                continue
            sp = eig(residual_matrices(g, q, s).stability_matrix)
            spectra[rep] = sp
            verdicts[rep] = sign_at_zero != 0 and sign_at_zero * sp.max_real_part < 0
        out.append(RepresentativeProbe(s, spectra, verdicts))
    return out


def structure_of(spec: NetworkSpec, p: Partition | None = None) -> ClusterStructure:
    return cluster_cardinalities(spec.graph, p if p is not None else spec.partition)
