"""Existence (A1-A3) and stability (A4) checks for a prescribed partition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from kuracluster.graph import (ClusterStructure, Digraph, Partition, cluster_cardinalities,
                               residual_matrices)
from kuracluster.model import NetworkSpec
from kuracluster.rules import LearningRule
from kuracluster.spectral import Spectrum, eig

RELAXED_RTOL = 1e-12


@dataclass
class A1Report:
    passed: bool
    violations: list[tuple[int, int, int]]    # (cluster, node i, node j), 0-based


@dataclass
class A2Report:
    passed: bool
    indegree_sets: dict[tuple[int, int], frozenset[int]]

    @property
    def violations(self) -> list[tuple[int, int]]:
        return sorted(k for k, v in self.indegree_sets.items() if len(v) != 1)


@dataclass
class A3Report:
    passed: bool
    frequency_margin: float          # w_min - mu * delta * c_max / gamma, must be > 0
    smallness: float | None          # second inequality's left side, must be < 1
    w_min: float
    w_max: float
    c_max: int
    c_out: int
    c_sr_total: int
    delta: float


@dataclass
class ClusterA4:
    cluster: int
    size: int
    passed: bool
    spectrum: Spectrum               # eigenvalues of A_tilde - D_minus
    signed_max_real_part: float      # sign(Γ(0)) * max Re λ; -inf for singletons


@dataclass
class A4Report:
    passed: bool
    clusters: list[ClusterA4]
    gamma_at_zero: float
    degenerate: bool = False         # Γ(0) == 0


@dataclass
class ConditionReport:
    a1: A1Report
    a2: A2Report
    a3: A3Report
    a4: A4Report
    structure: ClusterStructure = field(repr=False)

    @property
    def existence(self) -> bool:
        return self.a1.passed and self.a2.passed and self.a3.passed

    @property
    def stability(self) -> bool:
        return self.existence and self.a4.passed

    @property
    def exit_code(self) -> int:
        if self.stability:
            return 0
        return 2 if self.existence else 1


def check_A1(spec: NetworkSpec, p: Partition, mode: str = "exact") -> A1Report:
    """Equal natural frequencies inside every cluster.

    ``mode="exact"`` compares configured values bit for bit; ``"relaxed"``
    allows a relative difference of 1e-12.
    """
    if mode not in ("exact", "relaxed"):
        raise ValueError(f"unknown A1 mode {mode!r}")
    w = spec.omega
    bad = []
    for s, members in enumerate(p.clusters):
        for a_idx, i in enumerate(members):
            for j in members[a_idx + 1:]:
                if mode == "exact":
                    same = w[i] == w[j]
                else:
                    same = math.isclose(w[i], w[j], rel_tol=RELAXED_RTOL, abs_tol=0.0)
                if not same:
                    bad.append((s, i, j))
    return A1Report(not bad, bad)


def check_A2(g: Digraph, p: Partition) -> A2Report:
    """Every node of cluster s gets the same number of in-links from cluster r."""
    sets = cluster_cardinalities(g, p).indegree_sets
    return A2Report(all(len(v) == 1 for v in sets.values()), dict(sets))


def a3_values(w_min: float, w_max: float, mu: float, gamma: float, delta: float,
              c_max: int, c_out: int, c_sr_total: int) -> tuple[float, float | None]:
    """Left-hand sides of the two smallness inequalities.

    The second value is ``None`` when the first is not positive.
    """
    shift = mu / gamma * delta * c_max
    margin = w_min - shift
    if margin <= 0:
        return margin, None
    ratio = (w_max + shift) / margin
    return margin, 4.0 * mu / gamma ** 2 * delta * math.sqrt(c_out) * c_sr_total * ratio


def check_A3(spec: NetworkSpec, structure: ClusterStructure) -> A3Report:
    absw = np.abs(spec.omega)
    w_min, w_max = float(absw.min()), float(absw.max())
    delta = spec.rule.delta
    margin, small = a3_values(w_min, w_max, spec.mu_inter, spec.gamma, delta,
                              structure.c_max, structure.c_out, structure.c_sr_total)
    passed = margin > 0 and small is not None and small < 1
    return A3Report(passed, margin, small, w_min, w_max, structure.c_max, structure.c_out,
                    structure.c_sr_total, delta)


def cluster_spectrum(g: Digraph, p: Partition, s: int) -> Spectrum:
    if p.sizes[s] < 2:
        return Spectrum(())
    return eig(residual_matrices(g, p, s).stability_matrix)


def check_A4(g: Digraph, p: Partition, rule: LearningRule, margin: float = 0.0) -> A4Report:
    """Clusterwise spectral condition; each cluster's verdict is independent."""
    g0 = rule.at_zero
    sign = float(np.sign(g0))
    degenerate = g0 == 0.0
    clusters = []
    for s in range(p.m):
        spec_s = cluster_spectrum(g, p, s)
        if p.sizes[s] < 2:
            clusters.append(ClusterA4(s, 1, True, spec_s, -math.inf))
            continue
        signed = sign * spec_s.max_real_part
        ok = (not degenerate) and signed < -margin
        clusters.append(ClusterA4(s, p.sizes[s], ok, spec_s, signed))
    passed = (not degenerate) and all(c.passed for c in clusters)
    return A4Report(passed, clusters, g0, degenerate)


def check_all(spec: NetworkSpec, p: Partition | None = None, a1_mode: str = "exact",
              margin: float = 0.0) -> ConditionReport:
    p = p if p is not None else spec.partition
    if p is None:
        raise ValueError("a partition is required")
    structure = cluster_cardinalities(spec.graph, p)
    return ConditionReport(
        check_A1(spec, p, a1_mode),
        check_A2(spec.graph, p),
        check_A3(spec, structure),
        check_A4(spec.graph, p, spec.rule, margin),
        structure,
    )


def report_to_dict(rep: ConditionReport, one_based: bool = True) -> dict:
    """JSON-ready form; node and cluster ids are 1-based by default."""
    o = 1 if one_based else 0
    st = rep.structure

    def cplx(z: complex) -> list[float]:
        return [z.real, z.imag]

    return {
        "structure": {
            "c_in": st.c_in, "c_out": st.c_out, "c_max": st.c_max,
            "c_sr": st.c_sr.tolist(), "c_sr_total": st.c_sr_total,
        },
        "A1": {"passed": rep.a1.passed,
               "violations": [{"cluster": s + o, "nodes": [i + o, j + o]}
                              for s, i, j in rep.a1.violations]},
        "A2": {"passed": rep.a2.passed,
               "indegrees": [{"s": s + o, "r": r + o, "values": sorted(v)}
                             for (s, r), v in sorted(rep.a2.indegree_sets.items())]},
        "A3": {"passed": rep.a3.passed,
               "frequency_margin": rep.a3.frequency_margin,
               "smallness": rep.a3.smallness,
               "w_min": rep.a3.w_min, "w_max": rep.a3.w_max, "delta": rep.a3.delta},
        "A4": {"passed": rep.a4.passed, "gamma_at_zero": rep.a4.gamma_at_zero,
               "degenerate": rep.a4.degenerate,
               "clusters": [{"cluster": c.cluster + o, "size": c.size, "passed": c.passed,
                             "eigenvalues": [cplx(z) for z in c.spectrum.eigenvalues],
                             "signed_max_real_part": (None if math.isinf(c.signed_max_real_part)
                                                      else c.signed_max_real_part)}
                            for c in rep.a4.clusters]},
        "existence": rep.existence,
        "stability": rep.stability,
    }


def _fmt_z(z: complex) -> str:
    if abs(z.imag) < 1e-12:
        return f"{z.real:.6g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.6g}{sign}{abs(z.imag):.6g}i"


def report_to_text(rep: ConditionReport) -> str:
    def verdict(ok):
        return "PASS" if ok else "FAIL"

    st = rep.structure
    lines = [f"structure: c_in={st.c_in} c_out={st.c_out} c_max={st.c_max} "
             f"sum c_sr={st.c_sr_total}"]
    a1 = rep.a1
    extra = "" if a1.passed else "  violating: " + ", ".join(
        f"cluster {s + 1} nodes {i + 1}&{j + 1}" for s, i, j in a1.violations)
    lines.append(f"A1 equal frequencies within clusters: {verdict(a1.passed)}{extra}")
    a2 = rep.a2
    pairs = ", ".join(f"c_{s + 1}{r + 1}={sorted(v)[0] if len(v) == 1 else sorted(v)}"
                      for (s, r), v in sorted(a2.indegree_sets.items()))
    lines.append(f"A2 uniform inter-cluster in-degrees: {verdict(a2.passed)}  {pairs}")
    a3 = rep.a3
    small = "n/a" if a3.smallness is None else f"{a3.smallness:.6g}"
    lines.append(f"A3 smallness: {verdict(a3.passed)}  frequency margin={a3.frequency_margin:.6g} (>0)"
                 f"  smallness={small} (<1)")
    a4 = rep.a4
    lines.append(f"A4 clusterwise spectra: {verdict(a4.passed)}  Gamma(0)={a4.gamma_at_zero:.6g}"
                 + ("  [degenerate Gamma(0)=0]" if a4.degenerate else ""))
    for c in a4.clusters:
        eigs = ", ".join(_fmt_z(z) for z in c.spectrum.eigenvalues) or "(singleton)"
        lines.append(f"  cluster {c.cluster + 1} (n={c.size}): {verdict(c.passed)}  eig = {{{eigs}}}")
    lines.append(f"existence (A1-A3): {verdict(rep.existence)}")
    lines.append(f"stability (A1-A4): {verdict(rep.stability)}")
    return "\n".join(lines)
