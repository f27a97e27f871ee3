"""Numerical indicators for the deficiency equation Δψ = λψ, λ < 0.

Finite sections cannot decide essential selfadjointness. Everything here is
evidence: a shooting diagnostic for two-sided chains and a spectral scan of
the Dirac-basis matrices of a filtration. On a Dirac-basis section the
harmonic-defect component is absent by construction, so the scan probes the
operator on finite combinations of Dirac masses and on dipoles at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from energy_space.boundary import Filtration
from energy_space.graph_core import GraphError, WeightedGraph, section_matrices
from energy_space.numerics import min_eigen_spd

CAUCHY_GAP = 1e-8


@dataclass
class DefectIndicator:
    lam: float
    records: list = field(default_factory=list)
    verdict: str = "undecided"
    extra: dict = field(default_factory=dict)


def _chain_weights(g: WeightedGraph, lo: int, hi: int) -> dict:
    """c(n, n+1) for lo <= n < hi; rejects anything that is not a two-sided chain."""
    out = {}
    for n in range(lo, hi + 1):
        if not g.has_vertex(n):
            raise GraphError("shooting requires chain")
        nb = g.neighbors(n)
        if set(nb) != {n - 1, n + 1}:
            raise GraphError("shooting requires chain")
        if n < hi:
            out[n] = nb[n + 1]
    return out


def _shoot(c: dict, lam: float, start: tuple, span: int, direction: int) -> list:
    """Integrate c_{n-1}(ψ_n - ψ_{n-1}) + c_n(ψ_n - ψ_{n+1}) = λ ψ_n from ψ(0), ψ(1).

    Returns ψ on 0..span (forward) or on 1, 0, -1, ..., 1-span (backward).
    """
    psi = {0: float(start[0]), 1: float(start[1])}
    if direction > 0:
        for n in range(1, span):
            psi[n + 1] = psi[n] + (c[n - 1] * (psi[n] - psi[n - 1]) - lam * psi[n]) / c[n]
    else:
        for n in range(0, -span + 1, -1):
            psi[n - 1] = psi[n] + (c[n] * (psi[n] - psi[n + 1]) - lam * psi[n]) / c[n - 1]
    return psi


def defect_shoot_chain(g: WeightedGraph, lam: float, span: int = 40) -> DefectIndicator:
    """Shoot the three-term recursion in both directions from two initial data.

    For each level n the 2x2 Gram matrices of the fundamental solutions
    under the partial ℓ² and energy sums over [-n, n] are recorded. Their
    smallest eigenvalue is the size of the least-growing solution. Verdict:
    ``defect-suspected`` if the energy minimum is Cauchy below 1e-8 at the
    end, ``no-defect-detected`` if it grows with ratio > 1 over the last
    quarter, otherwise ``undecided``.
    """
    if not lam < 0:
        raise GraphError("shooting is defined for λ < 0")
    c = _chain_weights(g, -span - 1, span + 1)
    sols = []
    for start in ((1.0, 0.0), (0.0, 1.0)):
        fwd = _shoot(c, lam, start, span, +1)
        bwd = _shoot(c, lam, start, span, -1)
        sols.append({**bwd, **fwd})
    records = []
    for n in range(2, span):
        verts = range(-n + 1, n + 1)
        M2 = np.zeros((2, 2))
        ME = np.zeros((2, 2))
        for a in range(2):
            for b in range(2):
                M2[a, b] = math.fsum(sols[a][k] * sols[b][k] for k in verts)
                ME[a, b] = math.fsum(
                    c[k] * (sols[a][k] - sols[a][k + 1]) * (sols[b][k] - sols[b][k + 1])
                    for k in range(-n + 1, n)
                )
        ratio = abs(sols[0][n] / sols[0][n - 1]) if sols[0][n - 1] else math.inf
        records.append(
            {
                "level": n,
                "l2_min": float(np.linalg.eigvalsh(M2)[0]),
                "energy_min": float(np.linalg.eigvalsh(ME)[0]),
                "growth_ratio": ratio,
            }
        )
    E = [r["energy_min"] for r in records]
    q = max(2, len(E) // 4)
    if abs(E[-1] - E[-2]) <= CAUCHY_GAP * max(1.0, abs(E[-1])):
        verdict = "defect-suspected"
    elif all(b > a for a, b in zip(E[-q:], E[-q + 1:])):
        verdict = "no-defect-detected"
    else:
        verdict = "undecided"
    return DefectIndicator(lam, records, verdict, {"growth_ratio": records[-1]["growth_ratio"]})


def dirac_matrix(g: WeightedGraph, F) -> np.ndarray:
    """Matrix of the Laplacian on the Dirac basis of F: entries <δ_x, δ_y>_E."""
    return section_matrices(g, F)[2]


def finite_section_scan(g: WeightedGraph, filtration: Filtration, lam: float) -> DefectIndicator:
    """Min singular value of A_k - λI per level, A_k the Dirac-basis matrix of F_k."""
    if not lam < 0:
        raise GraphError("scan defined for semibounded probe only")
    records = []
    for k, F in enumerate(filtration, 1):
        A = dirac_matrix(g, F)
        # A_k - λI is symmetric positive definite for λ < 0
        smin = min_eigen_spd(A) - lam
        records.append({"level": k, "size": len(F), "min_singular": smin})
    vals = [r["min_singular"] for r in records]
    flat = all(v >= abs(lam) - 1e-9 for v in vals)
    return DefectIndicator(lam, records, "no-defect-detected" if flat else "undecided")


def semibounded_check(g: WeightedGraph, section) -> float:
    """Smallest eigenvalue of the Dirac-basis matrix on the section."""
    verts = getattr(section, "vertices", section)
    if not len(verts):
        raise GraphError("section is empty")
    return min_eigen_spd(dirac_matrix(g, verts))
