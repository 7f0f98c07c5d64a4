"""Learning rules Γ for the coupling dynamics.

Every rule is stored as a truncated Fourier series

    Γ(s) = a0 + Σ_n (a_n cos(n s) + b_n sin(n s)),

which keeps evaluation uniform (including inside the compiled integrator)
and makes the C¹ bound ``delta = max(sup|Γ|, sup|Γ'|)`` computable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("hebbian-cos", "neg-cos", "shifted-cos", "custom-fourier")


@dataclass(frozen=True, eq=False)
class LearningRule:
    kind: str
    cos_coeffs: np.ndarray          # a0, a1, ..., aK
    sin_coeffs: np.ndarray          # b0 (unused, zero), b1, ..., bK
    delta: float
    params: dict = field(default_factory=dict, compare=False)

    def value_at(self, s):
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, self.cos_coeffs[0])
        for h in range(1, len(self.cos_coeffs)):
            a, b = self.cos_coeffs[h], self.sin_coeffs[h]
            hs = s if h == 1 else h * s
            if a:
                out += a * np.cos(hs)
            if b:
                out += b * np.sin(hs)
        return out

    def derivative_at(self, s):
        s = np.asarray(s, dtype=float)
        n = np.arange(len(self.cos_coeffs))
        ns = np.multiply.outer(s, n)
        return np.cos(ns) @ (n * self.sin_coeffs) - np.sin(ns) @ (n * self.cos_coeffs)

    def __call__(self, s):
        return self.value_at(s)

    @property
    def at_zero(self) -> float:
        """Γ(0)."""
        return float(self.cos_coeffs.sum())

    @property
    def sign_at_zero(self) -> int:
        return int(np.sign(self.at_zero))

    def negated(self) -> "LearningRule":
        kind = {"hebbian-cos": "neg-cos", "neg-cos": "hebbian-cos"}.get(self.kind, "custom-fourier")
        return LearningRule(kind, -self.cos_coeffs, -self.sin_coeffs, self.delta, dict(self.params))

    def to_dict(self) -> dict:
        if self.kind in ("hebbian-cos", "neg-cos"):
            return {"type": self.kind}
        if self.kind == "shifted-cos":
            return {"type": self.kind, "alpha": self.params["alpha"]}
        return {"type": self.kind, "a": self.cos_coeffs.tolist(), "b": self.sin_coeffs[1:].tolist()}


def hebbian_cos() -> LearningRule:
    return LearningRule("hebbian-cos", np.array([0.0, 1.0]), np.zeros(2), 1.0)


def neg_cos() -> LearningRule:
    """Anti-Hebbian rule Γ(s) = -cos(s)."""
    return LearningRule("neg-cos", np.array([0.0, -1.0]), np.zeros(2), 1.0)


def shifted_cos(alpha: float) -> LearningRule:
    """Γ(s) = cos(s + alpha)."""
    return LearningRule("shifted-cos",
                        np.array([0.0, math.cos(alpha)]),
                        np.array([0.0, -math.sin(alpha)]),
                        1.0, {"alpha": float(alpha)})


def _fourier_delta(a: np.ndarray, b: np.ndarray, grid: int = 4096) -> float:
    # sup|f| <= max over grid + (h/2) * sup|f'|; sup|f'| bounded by the
    # coefficient sum, so the result is a guaranteed upper bound.
    n = np.arange(len(a))
    amp = np.hypot(a, b)
    amp[0] = abs(a[0])
    crude0 = float(amp.sum())
    crude1 = float((n * amp).sum())
    crude2 = float((n * n * amp).sum())
    s = np.linspace(0.0, 2 * math.pi, grid, endpoint=False)
    ns = np.multiply.outer(s, n)
    f = np.cos(ns) @ a + np.sin(ns) @ b
    df = np.cos(ns) @ (n * b) - np.sin(ns) @ (n * a)
    half_h = math.pi / grid
    sup0 = min(crude0, float(np.abs(f).max()) + half_h * crude1)
    sup1 = min(crude1, float(np.abs(df).max()) + half_h * crude2)
    return max(sup0, sup1)


def custom_fourier(a, b=()) -> LearningRule:
    """Γ from cosine coefficients ``a = (a0, a1, ...)`` and sine coefficients ``b = (b1, ...)``."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise ValueError("Fourier coefficients must be finite")
    order = max(len(a), len(b) + 1, 2)
    cos_c = np.zeros(order)
    sin_c = np.zeros(order)
    cos_c[:len(a)] = a
    sin_c[1:len(b) + 1] = b
    return LearningRule("custom-fourier", cos_c, sin_c, _fourier_delta(cos_c, sin_c),
                        {"a": a.tolist(), "b": b.tolist()})


def rule_from_dict(d: dict) -> LearningRule:
    kind = d.get("type")
    if kind == "hebbian-cos":
        return hebbian_cos()
    if kind == "neg-cos":
        return neg_cos()
    if kind == "shifted-cos":
        return shifted_cos(float(d.get("alpha", 0.0)))
    if kind == "custom-fourier":
        return custom_fourier(d.get("a", []), d.get("b", []))
    raise ValueError(f"unknown learning rule type {kind!r}; expected one of {KINDS}")
