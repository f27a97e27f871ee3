"""Fourier-side and closed-form checks for the integer chain with unit weights."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import quad

from energy_space.graph_core import GraphError, GraphFunction, ZChain, laplacian

QUAD_TOL = 1e-10
ENERGY_CONSTANT = 2.0 / math.pi


def symbol(u: Mapping[int, complex]):
    """θ ↦ Σ u(x) e^{ixθ} as a vectorized callable."""
    xs = np.array(sorted(u), dtype=float)
    cs = np.array([u[int(x)] for x in xs], dtype=complex)

    def f(theta):
        return np.exp(1j * np.multiply.outer(theta, xs)) @ cs

    return f


def direct_energy(u: Mapping[int, complex]) -> float:
    """Σ_x |u(x) - u(x+1)|² for finitely supported u."""
    if not u:
        return 0.0
    xs = range(min(u) - 1, max(u) + 1)
    return math.fsum(abs(u.get(x, 0) - u.get(x + 1, 0)) ** 2 for x in xs)


def fourier_energy(u: Mapping[int, complex], constant: float = ENERGY_CONSTANT) -> float:
    """constant · ∫_{-π}^{π} sin²(θ/2) |ũ(θ)|² dθ by adaptive Gauss-Kronrod."""
    u = {int(k): v for k, v in u.items() if v != 0}
    if not u:
        return 0.0
    f = symbol(u)
    width = max(u) - min(u) + 1

    def integrand(t):
        return math.sin(t / 2) ** 2 * abs(f(np.array(t))) ** 2

    val, _err = quad(integrand, -math.pi, math.pi, epsabs=QUAD_TOL, epsrel=1e-13, limit=max(200, 20 * width))
    return constant * val


def calibrate_constant() -> float:
    """Constant making the δ₀ probe agree with the direct difference sum."""
    val, _ = quad(lambda t: math.sin(t / 2) ** 2, -math.pi, math.pi, epsabs=1e-14)
    return direct_energy({0: 1.0}) / val


def monopole_symbol_divergence(x: int, eps: Sequence[float]) -> list[float]:
    """∫_{ε≤|θ|≤π} sin²(θ/2) |e^{ixθ}/(4 sin²(θ/2))|² dθ for each ε."""
    out = []
    for e in eps:
        if not 0 < e <= math.pi:
            raise GraphError("ε must lie in (0, π]")

        def integrand(t):
            s2 = math.sin(t / 2) ** 2
            return s2 * abs(np.exp(1j * x * t)) ** 2 / (16 * s2 * s2)

        if e == math.pi:
            out.append(0.0)
            continue
        half, _ = quad(integrand, e, math.pi, epsabs=QUAD_TOL, epsrel=1e-12, limit=200)
        out.append(2 * half)
    return out


def fit_inverse(eps: Sequence[float], values: Sequence[float]) -> tuple[float, float]:
    """Least-squares c in values ≈ c/ε and the max relative residual."""
    e = np.asarray(eps, dtype=float)
    v = np.asarray(values, dtype=float)
    basis = 1.0 / e
    c = float(basis @ v / (basis @ basis))
    resid = float(np.max(np.abs(v - c * basis) / np.abs(v)))
    return c, resid


def ramp(x: int, support=None) -> GraphFunction:
    """One-sided ramp v_x(n) = clip(n·sign(x), 0, |x|) on ``support`` (default: a window)."""
    s = 1 if x > 0 else -1
    if support is None:
        support = range(-abs(x) - 2, abs(x) + 3)
    return GraphFunction({n: float(min(max(n * s, 0), abs(x))) for n in support}, None)


def printed_bipole(x: int, y: int, support) -> GraphFunction:
    """Symmetric-in-|n| formula: 0, |n| - y, x - y on the three ranges."""
    vals = {}
    for n in support:
        a = abs(n)
        vals[n] = 0.0 if a <= y else (float(a - y) if a <= x else float(x - y))
    return GraphFunction(vals, None)


def onesided_bipole(x: int, y: int, support) -> GraphFunction:
    return GraphFunction({n: float(min(max(n - y, 0), x - y)) for n in support}, None)


@dataclass
class ClosedForms:
    printed: GraphFunction
    corrected: GraphFunction
    printed_pairing: dict  # coefficients c_n with <w, f> = Σ c_n f(n)
    corrected_pairing: dict


def chain_closed_forms(x: int, y: int) -> ClosedForms:
    """Both bipole formulas for 0 <= y < x with their measured pairing patterns.

    On the unit chain <w, f>_E = Σ_n (Δw)(n) f(n) for finitely supported f,
    so the pairing pattern is read off from Δw.
    """
    if not (0 <= y < x):
        raise GraphError("closed forms need 0 <= y < x")
    g = ZChain()
    support = range(-x - 3, x + 4)
    inner = range(-x - 2, x + 3)
    printed = printed_bipole(x, y, support)
    corrected = onesided_bipole(x, y, support)

    def pattern(w):
        lap = laplacian(g, w, inner)
        return {n: v for n, v in lap.values.items() if v != 0}

    return ClosedForms(printed, corrected, pattern(printed), pattern(corrected))
