"""Acceptance suite: one PASS/FAIL line per criterion, tolerances as pinned."""

import io
import math
import random
import time

import numpy as np
import pytest

from energy_space.boundary import Filtration, boundary_sum_identity, indicator_energy
from energy_space.cli import run
from energy_space.deficiency import defect_shoot_chain, finite_section_scan
from energy_space.dipole import FiniteSection, dipole, gram, l2c_embedding_check, monopole_trace, reconstruct_delta
from energy_space.duality import dirac_gram, harmonic_defect, roundtrip_check
from energy_space.gaussian import gaussian_field, mc_characteristic, mc_dipole_transform, mc_moment
from energy_space.graph_core import (
    GeometricChain,
    GraphFunction,
    Lattice,
    ZChain,
    complete_graph,
    energy,
    energy_inner,
    quadratic_identity_check,
    random_connected_graph,
    section_matrices,
    star_graph,
)
from energy_space.lattice import direct_energy, fit_inverse, fourier_energy, monopole_symbol_divergence


@pytest.fixture
def verdict(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {num:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def fixtures():
    r = random.Random(4)
    gs = [random_connected_graph(r, r.randint(2, 40)) for _ in range(5)]
    return [star_graph([1.0] * 5), complete_graph(5), complete_graph(3), star_graph([1.0, 2.0, 3.0])] + gs


def sections():
    z, geo, z2 = ZChain(), GeometricChain(2.0), Lattice(2)
    out = [(g, FiniteSection.whole(g)) for g in fixtures()]
    out += [(g, FiniteSection.box(g, k)) for g in (z, geo, z2) for k in (3, 8)]
    return out


def test_01_dipole_closed_form(verdict):
    g = ZChain()
    t0 = time.perf_counter()
    sec = FiniteSection.box(g, 200)
    err = 0.0
    rep = 0.0
    r = random.Random(1)
    for x in (1, 3, 10):
        v = dipole(g, x, sec)
        s = 1 if x > 0 else -1
        err = max(err, max(abs(v(n) - min(max(s * n, 0), abs(x))) for n in range(-200, 201)))
        for _ in range(20):
            f = GraphFunction({n: r.uniform(-1, 1) for n in r.sample(range(-150, 151), 6)})
            rep = max(rep, abs(energy_inner(g, v, f) - (f(x) - f(0))))
    dt = time.perf_counter() - t0
    verdict(1, err < 1e-10 and rep <= 1e-10 and dt < 2.0,
            f"ramp error {err:.2e}, reproducing {rep:.2e}, {dt:.2f}s")


def test_02_gram_min(verdict):
    K = gram(ZChain(), list(range(1, 11)))
    ref = np.minimum.outer(np.arange(1, 11), np.arange(1, 11))
    err = float(np.abs(K.entries - ref).max())
    verdict(2, err <= 1e-9, f"max |k(x,y) - min(x,y)| = {err:.2e}")


def test_03_k3_resistance(verdict):
    g = complete_graph(3)
    K = gram(g, [1, 2])
    order, lap, _ = section_matrices(g, g.vertices)
    P = np.linalg.pinv(lap)
    oracle = [P[i, i] - 2 * P[i, 0] + P[0, 0] for i in (1, 2)]
    err = max(abs(K.entries[i, i] - 2 / 3) for i in range(2))
    err_o = max(abs(K.entries[i, i] - oracle[i]) for i in range(2))
    verdict(3, err <= 1e-12 and err_o <= 1e-12, f"|k(x,x) - 2/3| = {err:.1e}, vs pinv {err_o:.1e}")


def test_04_reconstruction(verdict):
    r = random.Random(44)
    graphs = [ZChain(), star_graph([1.0] * 5), complete_graph(5)]
    graphs += [random_connected_graph(r, r.randint(2, 40), 0.1, 10.0) for _ in range(50)]
    worst = 0.0
    for g in graphs:
        xs = [3, -2] if isinstance(g, ZChain) else list(g.vertices)
        for x in xs:
            worst = max(worst, reconstruct_delta(g, x).residual)
    verdict(4, worst <= 1e-9, f"max residual {worst:.2e} over {len(graphs)} graphs")


def test_05_duality_roundtrip(verdict):
    worst = 0.0
    rows = 0.0
    for g, sec in sections():
        worst = max(worst, roundtrip_check(g, sec))
        G = dirac_gram(g, sec.vertices)
        interior = set(sec.interior(g))
        rs = G.row_sums()
        rows = max([rows] + [abs(rs[i]) for i, x in enumerate(G.window) if x in interior])
    verdict(5, worst <= 1e-9 and rows <= 1e-9, f"edge weight rel. error {worst:.2e}, row sums {rows:.2e}")


def test_06_monopole(verdict):
    t0 = time.perf_counter()
    z = monopole_trace(ZChain(), 0, Filtration.boxes(ZChain(), 60))
    ez = max(abs(E - (k + 1) / 2) for k, (_, E) in enumerate(z.levels, 1))
    geo = GeometricChain(2.0)
    gt = monopole_trace(geo, 0, Filtration.boxes(geo, 40))
    gap = abs(gt.levels[-1][1] - gt.levels[-2][1])
    z2 = Lattice(2)
    t2 = monopole_trace(z2, (0, 0), Filtration.boxes(z2, 25))
    dt = time.perf_counter() - t0
    ok = ez <= 1e-9 and z.verdict == "divergent" and gt.verdict == "convergent" and gap < 1e-6
    ok = ok and t2.verdict == "divergent" and dt < 30
    verdict(6, ok, f"Z error {ez:.1e} ({z.verdict}); geom gap {gap:.1e} ({gt.verdict}); "
                   f"Z^2 {t2.verdict}; {dt:.1f}s")


def test_07_harmonic_defect(verdict):
    geo = GeometricChain(2.0)
    res = harmonic_defect(geo, Filtration.boxes(geo, 30))
    none = harmonic_defect(ZChain(), Filtration.boxes(ZChain(), 30))
    ok = len(res) == 1 and abs(res[0].energy - 3) <= 1e-6 and res[0].max_laplacian < 1e-12 and none == []
    detail = f"geom candidates {len(res)}"
    if res:
        detail += f", energy {res[0].energy:.10f}, max |Δh| {res[0].max_laplacian:.1e}"
    verdict(7, ok, detail + f"; Z candidates {len(none)}")


def test_08_quadratic_identity(verdict):
    r = random.Random(8)
    worst = 0.0
    z = ZChain()
    for i in range(200):
        if i % 2:
            g = z
            pts = r.sample([n for n in range(-20, 21) if n], r.randint(1, 6))
        else:
            g = random_connected_graph(r, r.randint(2, 25))
            pts = r.sample(range(1, len(g.vertices)), r.randint(1, len(g.vertices) - 1))
        xi = {x: r.uniform(-2, 2) for x in pts}
        lhs, rhs = quadratic_identity_check(g, xi)
        worst = max(worst, abs(lhs - rhs))
    verdict(8, worst < 1e-9, f"max |<u,Δu> - (Σ|ξ|² + |Σξ|²)| = {worst:.2e}")


def test_09_l2c_contractivity(verdict):
    r = random.Random(9)
    bad = 0
    ratio = 0.0
    for _ in range(1000):
        n = r.randint(2, 30)
        g = random_connected_graph(r, n)
        xi = {x: r.uniform(-1, 1) for x in r.sample(range(n), r.randint(1, n))}
        u = GraphFunction({x: r.uniform(-1, 1) for x in range(n)}, None)
        lhs, bound = l2c_embedding_check(g, xi, u)
        if lhs > bound + 1e-12:
            bad += 1
        if bound:
            ratio = max(ratio, lhs / bound)
    verdict(9, bad == 0, f"{bad} violations in 1000 trials, worst lhs/bound {ratio:.6f} (√2 = {math.sqrt(2):.6f})")


def test_10_boundary_identity(verdict):
    r = random.Random(10)
    worst = 0.0
    flipped = 0.0
    for _ in range(500):
        n = r.randint(2, 30)
        g = random_connected_graph(r, n)
        psi = GraphFunction({x: r.uniform(-3, 3) for x in range(n)}, None)
        s, p = boundary_sum_identity(g, psi, r.sample(range(n), r.randint(1, n)))
        worst = max(worst, abs(s - p))
        flipped = max(flipped, abs(s + p))
    verdict(10, worst <= 1e-12, f"max |Σ ∂ψ/∂n - <χ_F,ψ>| = {worst:.3e} (with the opposite sign: {flipped:.1e})")


def test_11_indicator_energies(verdict):
    z, z2 = ZChain(), Lattice(2)
    d1 = all(indicator_energy(z, range(-k, k + 1)) == 2 for k in range(1, 51))
    box = lambda k: [(i, j) for i in range(-k, k + 1) for j in range(-k, k + 1)]  # noqa: E731
    exact = all(indicator_energy(z2, box(k)) == 4 * (2 * k + 1) for k in range(1, 31))
    rel = max(abs(4 * (2 * k + 1) - 8 * k) / (4 * (2 * k + 1)) for k in range(10, 31))
    chi = lambda k: GraphFunction.indicator(range(-k, k + 1))  # noqa: E731
    cauchy = all(energy(z, chi(k) - chi(j)) == 4 for j, k in [(1, 2), (3, 9), (10, 50)])
    verdict(11, d1 and exact and rel <= 0.05 and cauchy,
            f"d=1 all 2: {d1}; d=2 4(2k+1): {exact}, 8k rel. dev. {rel:.3f}; ||χ_k - χ_j||² = 4: {cauchy}")


def test_12_fourier(verdict):
    r = random.Random(12)
    worst = 0.0
    for _ in range(100):
        lo = r.randint(-20, 20)
        u = {n: r.uniform(-2, 2) for n in range(lo, lo + r.randint(1, 10))}
        worst = max(worst, abs(fourier_energy(u) - direct_energy(u)))
    d0 = fourier_energy({0: 1.0})
    eps = [0.5 / 2**k for k in range(8)]
    vals = monopole_symbol_divergence(1, eps)
    c, resid = fit_inverse(eps[-3:], vals[-3:])
    ok = worst <= 1e-8 and abs(d0 - 2) <= 1e-8 and resid <= 0.10
    verdict(12, ok, f"max |Fourier - direct| {worst:.1e}; δ₀ {d0:.12f}; c/ε fit c={c:.4f}, resid {resid:.1e}")


def test_13_deficiency(verdict):
    ind = defect_shoot_chain(ZChain(), -1.0, span=40)
    golden = (3 + math.sqrt(5)) / 2
    gerr = abs(ind.records[-1]["growth_ratio"] - golden)
    smin = math.inf
    for g, sec in sections():
        filt = Filtration((tuple(sec.vertices),))
        smin = min(smin, finite_section_scan(g, filt, -1.0).records[0]["min_singular"])
    for g in (ZChain(), GeometricChain(2.0), Lattice(2)):
        smin = min(smin, min(r["min_singular"] for r in finite_section_scan(g, Filtration.boxes(g, 8), -1.0).records))
    verdict(13, gerr <= 1e-6 and smin >= 1 - 1e-9, f"growth ratio error {gerr:.1e}; min σ(A_k + I) = {smin:.6f}")


def test_14_gaussian(verdict):
    t0 = time.perf_counter()
    g = ZChain()
    window = [1, 2, 3, 4, 5]
    model = gaussian_field(gram(g, window), seed=2026)
    u = {2: 0.4, 5: -0.3}
    f = {1: 0.8, 4: 0.2}
    ests = {
        "characteristic": mc_characteristic(model, u, 200_000),
        "moment1": mc_moment(model, f, u, 1, 200_000),
        "moment2": mc_moment(model, f, u, 2, 200_000),
        "dipole": mc_dipole_transform(model, 4, 1, u, 200_000, base=0),
    }
    dt = time.perf_counter() - t0
    zs = {k: e.z for k, e in ests.items()}
    ok = all(z <= 5 for z in zs.values()) and dt < 10
    verdict(14, ok, ", ".join(f"{k} z={z:.2f}" for k, z in zs.items()) + f"; {dt:.2f}s")


def test_15_determinism(verdict):
    runs = [
        ["gaussian-check", "--graph", "zchain", "--window", "1,2,3", "--samples", "20000", "--seed", "5"],
        ["monopole", "--graph", "zd:2", "--vertex", "0,0", "--filtration", "box:6", "--format", "csv"],
        ["harmonic", "--graph", "geom:2", "--filtration", "box:12"],
    ]
    same = True
    for argv in runs:
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            assert run(argv, buf) == 0
            outs.append(buf.getvalue().encode())
        same = same and outs[0] == outs[1]
    verdict(15, same, f"{len(runs)} CLI runs repeated byte-identically: {same}")
