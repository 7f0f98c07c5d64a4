"""Fixed-step classical RK4 integration.

The full network is integrated by a compiled kernel (numba) that advances
``sample_every`` steps at a time and hands control back for sampling,
observer calls and finiteness checks. :func:`rk4` integrates any numpy
right-hand side and is used for the cluster-coordinate system.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from kuracluster.graph import Digraph, Partition
from kuracluster.model import (ErrorState, ErrorSystem, NetworkSpec, SimState, error_layout,
                               from_error, wrap_pi)

logger = logging.getLogger(__name__)

Observer = Callable[[float, SimState], None]


@numba.njit(cache=True, nogil=True)
def _deriv(theta, k, omega, targets, sources, edge_mu, gamma, a, b, dtheta, dk):
    n_edges = targets.shape[0]
    for i in range(theta.shape[0]):
        dtheta[i] = omega[i]
    order = a.shape[0]
    for q in range(n_edges):
        i = targets[q]
        d = theta[sources[q]] - theta[i]
        dtheta[i] += k[q] * math.sin(d)
        g = a[0]
        for h in range(1, order):
            g += a[h] * math.cos(h * d) + b[h] * math.sin(h * d)
        dk[q] = -gamma * k[q] + edge_mu[q] * g


@numba.njit(cache=True, nogil=True)
def _rk4_steps(theta, k, omega, targets, sources, edge_mu, gamma, a, b, dt, n_steps):
    n = theta.shape[0]
    ne = k.shape[0]
    t1 = np.empty(n); k1 = np.empty(ne)
    t2 = np.empty(n); k2 = np.empty(ne)
    t3 = np.empty(n); k3 = np.empty(ne)
    t4 = np.empty(n); k4 = np.empty(ne)
    tt = np.empty(n); kk = np.empty(ne)
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(n_steps):
        _deriv(theta, k, omega, targets, sources, edge_mu, gamma, a, b, t1, k1)
        for i in range(n):
            tt[i] = theta[i] + half * t1[i]
        for q in range(ne):
            kk[q] = k[q] + half * k1[q]
        _deriv(tt, kk, omega, targets, sources, edge_mu, gamma, a, b, t2, k2)
        for i in range(n):
            tt[i] = theta[i] + half * t2[i]
        for q in range(ne):
            kk[q] = k[q] + half * k2[q]
        _deriv(tt, kk, omega, targets, sources, edge_mu, gamma, a, b, t3, k3)
        for i in range(n):
            tt[i] = theta[i] + dt * t3[i]
        for q in range(ne):
            kk[q] = k[q] + dt * k3[q]
        _deriv(tt, kk, omega, targets, sources, edge_mu, gamma, a, b, t4, k4)
        for i in range(n):
            theta[i] += sixth * (t1[i] + 2.0 * t2[i] + 2.0 * t3[i] + t4[i])
        for q in range(ne):
            k[q] += sixth * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])


@dataclass
class Trajectory:
    """Sampled solution: ``theta`` is ``(samples, N)``, ``k`` is ``(samples, edges)``."""

    t: np.ndarray
    theta: np.ndarray
    k: np.ndarray
    graph: Digraph
    partition: Partition | None = None
    completed: bool = True
    message: str = ""
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    @property
    def e(self) -> np.ndarray:
        """Phase errors of non-representative nodes, wrapped to (-π, π]."""
        p = self.partition
        if p is None:
            raise ValueError("trajectory has no partition; errors are undefined")
        lay = error_layout(self.graph, p)
        reps = np.array(p.representatives)
        owner = reps[p.labels[lay.err_nodes]]
        return wrap_pi(self.theta[:, lay.err_nodes] - self.theta[:, owner]).reshape(len(self.t), -1)

    def state(self, idx: int) -> SimState:
        return SimState(self.theta[idx].copy(), self.k[idx].copy())


def _n_steps(t_end: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end >= 0:
        raise ValueError("t_end must be non-negative")
    return int(round(t_end / dt))


def integrate(spec: NetworkSpec, p: Partition | None, initial: SimState, t_end: float,
              dt: float = 1e-2, observer: Observer | None = None,
              sample_every: int = 1) -> Trajectory:
    """RK4 on the full network from ``initial`` up to ``t_end``.

    ``t_end`` is rounded to a whole number of steps. Samples are taken at
    the start, every ``sample_every`` steps, and at the final step. If the
    state becomes non-finite the run stops and the trajectory ends at the
    last finite sample with ``completed=False``.
    """
    if p is not None and p is not spec.partition:
        spec = spec.replace(partition=p)
    p = spec.partition
    n_steps = _n_steps(t_end, dt)
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    w_max = float(np.abs(spec.omega).max()) if spec.n else 0.0
    limit = 0.1 / max(spec.gamma, w_max, 1.0)
    if dt > limit:
        warnings.warn(f"dt={dt} exceeds the recommended {limit:.3g}", RuntimeWarning, stacklevel=2)

    targets, sources = spec.graph.edge_arrays()
    theta = np.array(initial.theta, dtype=float)
    k = np.array(initial.k, dtype=float)
    if theta.shape != (spec.n,) or k.shape != (len(targets),):
        raise ValueError("initial state dimensions do not match the network")
    args = (spec.omega, targets, sources, spec.edge_mu.astype(float), float(spec.gamma),
            spec.rule.cos_coeffs.astype(float), spec.rule.sin_coeffs.astype(float), float(dt))

    ts, thetas, ks = [0.0], [theta.copy()], [k.copy()]
    if observer is not None:
        observer(0.0, _view(theta, k))
    done = 0
    completed, message = True, ""
    while done < n_steps:
        chunk = min(sample_every, n_steps - done)
        _rk4_steps(theta, k, *args, chunk)
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(k))):
            completed = False
            message = f"non-finite state after t={ts[-1]:.6g}; aborted"
            logger.warning(message)
            break
        done += chunk
        t = done * dt
        ts.append(t)
        thetas.append(theta.copy())
        ks.append(k.copy())
        if observer is not None:
            observer(t, _view(theta, k))
    return Trajectory(np.array(ts), np.array(thetas).reshape(len(ts), spec.n),
                      np.array(ks).reshape(len(ts), len(targets)),
                      spec.graph, p, completed, message)


def _view(theta: np.ndarray, k: np.ndarray) -> SimState:
    tv, kv = theta.view(), k.view()
    tv.setflags(write=False)
    kv.setflags(write=False)
    return SimState(tv, kv)


def rk4(f: Callable[[np.ndarray], np.ndarray], y0: np.ndarray, dt: float, n_steps: int,
        sample_every: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 for an autonomous ``y' = f(y)``; returns ``(times, samples)``."""
    y = np.array(y0, dtype=float)
    ts, ys = [0.0], [y.copy()]
    h2, h6 = 0.5 * dt, dt / 6.0
    for step in range(1, n_steps + 1):
        k1 = f(y)
        k2 = f(y + h2 * k1)
        k3 = f(y + h2 * k2)
        k4 = f(y + dt * k3)
        y = y + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % sample_every == 0 or step == n_steps:
            ts.append(step * dt)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)


def integrate_error(spec: NetworkSpec, p: Partition, initial: ErrorState, t_end: float,
                    dt: float = 1e-2, sample_every: int = 1) -> Trajectory:
    """RK4 on the cluster-coordinate system; phases are reconstructed for the result."""
    system = ErrorSystem(spec, p)
    ts, ys = rk4(system, initial.pack(), dt, _n_steps(t_end, dt), sample_every)
    states = [from_error(system.unpack(y), spec.graph, p) for y in ys]
    return Trajectory(ts, np.array([s.theta for s in states]), np.array([s.k for s in states]),
                      spec.graph, p)
