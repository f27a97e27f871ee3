"""``energy-space`` command line front end.

Every subcommand prints one JSON document (or a CSV table with one row per
level and quantity). Exit status: 0 success, 2 invalid input, 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from energy_space import boundary, deficiency, dipole, duality, gaussian, lattice
from energy_space.graph_core import (
    GeometricChain,
    GraphError,
    Lattice,
    ZChain,
    degree,
    make_graph,
    parse_label,
    read_edge_list,
    sort_vertices,
)
from energy_space.numerics import NumericsError

SCHEMA = "energy-space/1"
GENERATORS = ("zchain", "zd", "geom", "star", "complete")

ANCHORS = {
    "dipole": "dipole v_x: Δv_x = δ_x - δ_o, <v_x, f>_E = f(x) - f(o)",
    "gram": "kernel k(x, y) = <v_x, v_y>_E; on the unit chain k(x, y) = min(|x|, |y|) for same-sign x, y",
    "reconstruct": "δ_x = c(x) v_x - Σ_{y~x} c(xy) v_y",
    "monopole": "monopole: Δw = δ_x with finite energy; trace of level energies",
    "dual": "Dirac Gram <δ_x, δ_y>_E: c(x) on the diagonal, -c(xy) on edges, rows sum to 0",
    "harmonic": "harmonic defect: finite-energy h orthogonal to every δ_x",
    "deficiency": "deficiency equation Δψ = λψ, λ < 0",
    "boundary": "<χ_F, ψ>_E = Σ_{x∈F} normal derivative of ψ at x",
    "indicator": "||χ_F||²_E = conductance leaving F; boxes in Z^d give 2d(2k)^(d-1) to leading order",
    "lattice": "||u||² = (2/π) ∫ sin²(θ/2) |ũ(θ)|² dθ on the unit chain",
    "gaussian-check": "E[e^{iũ}] = e^{-||u||²/2}; E[f̃ e^{iũ}] = i<f,u> e^{-||u||²/2}; "
    "E[w̃_{x,y} e^{iũ}] = i(u(x)-u(y)) e^{-||u||²/2}; E[f̃² e^{iũ}] = (||f||² - <u,f>²) e^{-||u||²/2}",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def parse_vertex(tok: str):
    tok = tok.strip()
    if tok.startswith("(") and tok.endswith(")"):
        tok = tok[1:-1]
    if "," in tok:
        return tuple(int(t) for t in tok.split(","))
    if len(tok) >= 2 and tok[0] == tok[-1] and tok[0] in "\"'":
        return tok[1:-1]
    return parse_label(tok)


def parse_window(spec: str | None) -> list:
    if not spec:
        return []
    if ";" in spec:
        return [parse_vertex(t) for t in spec.split(";") if t.strip()]
    return [parse_label(t.strip()) for t in spec.split(",") if t.strip()]


def load_graph(args):
    src = args.graph
    base = parse_vertex(args.base) if args.base is not None else None
    if src.split(":")[0] in GENERATORS:
        return make_graph(src, base)
    path = Path(src)
    if not path.exists():
        raise UsageError(f"graph file not found: {src}")
    if base is None:
        raise UsageError("--base is required for graph files")
    return read_edge_list(path.read_text(encoding="utf-8"), base)


def load_filtration(args, g, default_k=10):
    spec = args.filtration or f"box:{default_k}"
    if spec.startswith("box:"):
        k = int(spec[4:])
        if g.is_finite:
            return boundary.Filtration.balls(g, k)
        return boundary.Filtration.boxes(g, k)
    return boundary.Filtration.from_json(Path(spec).read_text(encoding="utf-8")).validate(g)


def section_for(args, g, points):
    mode = getattr(args, "mode", "free")
    if args.section is not None:
        if g.is_finite:
            return dipole.FiniteSection.whole(g, mode)
        return dipole.FiniteSection.box(g, args.section, mode)
    return dipole.FiniteSection.around(g, points, mode=mode)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(_jsonable(k)) if not isinstance(k, str) else k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _graph_info(g):
    return {"graph": g.name, "base": g.base}


# -- subcommands ---------------------------------------------------------


def cmd_dipole(args, g):
    x = parse_vertex(args.vertex) if args.vertex else None
    if x is None:
        raise UsageError("--vertex is required")
    sec = section_for(args, g, [x])
    v = dipole.dipole(g, x, sec)
    vals = {k: v(k) for k in sec.vertices}
    return {"vertex": x, "section_size": len(sec.vertices), "mode": sec.mode, "values": vals}, [
        ("", f"v({k})", val) for k, val in vals.items()
    ]


def cmd_gram(args, g):
    window = parse_window(args.window)
    if not window:
        raise UsageError("--window is required")
    sec = section_for(args, g, window)
    K = dipole.gram(g, window, sec)
    return {"window": window, "matrix": K.entries, "min_eigenvalue": K.min_eigenvalue()}, [
        ("", f"k({a},{b})", K.entries[i, j]) for i, a in enumerate(window) for j, b in enumerate(window)
    ]


def cmd_reconstruct(args, g):
    x = parse_vertex(args.vertex) if args.vertex else g.base
    sec = section_for(args, g, [x] + sort_vertices(g.neighbors(x)))
    r = dipole.reconstruct_delta(g, x, sec)
    return {"vertex": x, "coefficients": r.coefficients, "residual": r.residual}, [
        ("", f"coef({k})", c) for k, c in r.coefficients.items()
    ] + [("", "residual", r.residual)]


def cmd_monopole(args, g):
    x = parse_vertex(args.vertex) if args.vertex else g.base
    filt = load_filtration(args, g)
    tr = dipole.monopole_trace(g, x, filt)
    levels = [{"level": k, "size": n, "energy": E} for k, (n, E) in enumerate(tr.levels, 1)]
    return {"vertex": x, "levels": levels, "verdict": tr.verdict, "cauchy_gap": dipole.CAUCHY_GAP}, [
        (r["level"], "energy", r["energy"]) for r in levels
    ]


def cmd_dual(args, g):
    if args.gram_file:
        G = duality.DiracGram.from_json(Path(args.gram_file).read_text(encoding="utf-8"))
        base = parse_vertex(args.base) if args.base is not None else None
        h = duality.kernel_to_graph(G, base, tol=args.tol or duality.ROW_SUM_TOL)
        sec = dipole.FiniteSection.whole(h)
        err = duality.roundtrip_check(h, sec)
        edges = [[x, y, c] for x, y, c in h.edges()]
        rebuilt = duality.dirac_gram(h, G.window)
        gram_err = float(np.max(np.abs(rebuilt.entries - G.entries))) if G.window else 0.0
        return {
            "window": G.window,
            "edges": edges,
            "degrees": {x: degree(h, x) for x in h.vertices},
            "roundtrip_error": err,
            "gram_reconstruction_error": gram_err,
        }, [("", f"c({x},{y})", c) for x, y, c in edges] + [("", "roundtrip_error", err)]
    if g is None:
        raise UsageError("dual needs --gram-file or --graph")
    window = parse_window(args.window)
    sec = section_for(args, g, window or [g.base])
    verts = list(sec.vertices)
    G = duality.dirac_gram(g, verts)
    err = duality.roundtrip_check(g, sec)
    interior = sec.interior(g)
    sums = G.row_sums()
    worst_row = max((abs(sums[verts.index(x)]) for x in interior), default=0.0)
    return {
        "window": verts,
        "dirac_gram": G.entries,
        "interior_row_sum_max": worst_row,
        "roundtrip_error": err,
    }, [("", "roundtrip_error", err), ("", "interior_row_sum_max", worst_row)]


def cmd_harmonic(args, g):
    filt = load_filtration(args, g)
    cands = duality.harmonic_defect(g, filt)
    out = []
    rows = []
    for c in cands:
        pair = duality.duality_pair_check(g, c, dipole.FiniteSection(tuple(filt[-1])))
        out.append(
            {"energy": c.energy, "max_interior_laplacian": c.max_laplacian, "duality_pairing": pair,
             "level_energies": c.energies}
        )
        rows += [(k, "candidate_energy", E) for k, E in enumerate(c.energies, 1)]
    return {"levels": len(filt), "candidates": out}, rows


def cmd_deficiency(args, g):
    lam = args.lam
    filt = load_filtration(args, g)
    scan = deficiency.finite_section_scan(g, filt, lam)
    report = {"lambda": lam, "scan": {"records": scan.records, "verdict": scan.verdict}}
    rows = [(r["level"], "min_singular", r["min_singular"]) for r in scan.records]
    if isinstance(g, (ZChain, GeometricChain)):
        shoot = deficiency.defect_shoot_chain(g, lam, args.span)
        report["shoot"] = {"records": shoot.records, "verdict": shoot.verdict, **shoot.extra}
        rows += [(r["level"], "shoot_energy_min", r["energy_min"]) for r in shoot.records]
    report["note"] = "finite-section indicators only; no claim about the infinite operator"
    return report, rows


def cmd_boundary(args, g):
    filt = load_filtration(args, g)
    window = parse_window(args.window) or [w for w in [_default_point(g)] if w is not None]
    sec = dipole.FiniteSection.around(g, list(filt[-1]), margin=2)
    tests = [dipole.dipole(g, x, sec) for x in window]
    scan = boundary.weak_null_scan(g, filt, tests)
    levels = []
    rows = []
    for k, F in enumerate(filt, 1):
        bd = boundary.section_boundary(g, F)
        sums = [boundary.boundary_sum_identity(g, psi, F) for psi in tests]
        levels.append({"level": k, "boundary": bd, "identity": [[s, p] for s, p in sums]})
        for j, (s, p) in enumerate(sums):
            rows.append((k, f"normal_sum[{window[j]}]", s))
            rows.append((k, f"pairing[{window[j]}]", p))
    return {"window": window, "levels": levels, "weak_null_max_tail": scan["max_tail"]}, rows


def _default_point(g):
    if isinstance(g, Lattice):
        return (1,) + (0,) * (g.d - 1)
    if g.is_finite:
        others = [x for x in g.vertices if x != g.base]
        return others[0] if others else None
    return g.base + 1


def cmd_indicator(args, g):
    filt = load_filtration(args, g)
    vals = [boundary.indicator_energy(g, F) for F in filt]
    return {"levels": [{"level": k, "energy": e} for k, e in enumerate(vals, 1)]}, [
        (k, "indicator_energy", e) for k, e in enumerate(vals, 1)
    ]


def cmd_lattice(args, g):
    eps = [0.5 / 2**k for k in range(8)]
    parts = lattice.monopole_symbol_divergence(1, eps)
    c, resid = lattice.fit_inverse(eps[-3:], parts[-3:])
    forms = lattice.chain_closed_forms(3, 0)
    window = parse_window(args.window)
    u = {int(x): 1.0 for x in window} if window else {0: 1.0}
    report = {
        "delta0": {"fourier": lattice.fourier_energy({0: 1.0}), "direct": lattice.direct_energy({0: 1.0})},
        "calibrated_constant": lattice.calibrate_constant(),
        "probe": {"support": sorted(u), "fourier": lattice.fourier_energy(u), "direct": lattice.direct_energy(u)},
        "divergence": {"eps": eps, "partial_integrals": parts, "fit_c": c, "fit_residual": resid},
        "closed_forms": {"printed_pairing": forms.printed_pairing, "corrected_pairing": forms.corrected_pairing},
    }
    rows = [("", f"partial_integral[{e}]", v) for e, v in zip(eps, parts)]
    return report, rows


def cmd_gaussian(args, g):
    window = parse_window(args.window)
    if not window:
        raise UsageError("--window is required")
    sec = section_for(args, g, window)
    K = dipole.gram(g, window, sec)
    model = gaussian.gaussian_field(K, args.seed)
    n = args.samples
    x0 = window[0]
    checks = {
        "characteristic": gaussian.mc_characteristic(model, {x0: 1.0}, n),
        "moment1": gaussian.mc_moment(model, {x0: 1.0}, {x0: 1.0}, 1, n),
        "moment2": gaussian.mc_moment(model, {x0: 1.0}, {x0: 1.0}, 2, n),
        "dipole_transform": gaussian.mc_dipole_transform(model, x0, g.base, {x0: 1.0}, n, base=g.base),
    }
    out = {}
    rows = []
    for name, est in checks.items():
        out[name] = {
            "estimate": est.estimate,
            "target": est.target,
            "stderr": est.stderr,
            "z": est.z,
            "pass": est.within(5.0),
        }
        rows.append(("", f"{name}.z", est.z))
    return {"window": window, "samples": n, "seed": args.seed, "checks": out}, rows


COMMANDS = {
    "dipole": cmd_dipole,
    "gram": cmd_gram,
    "reconstruct": cmd_reconstruct,
    "monopole": cmd_monopole,
    "dual": cmd_dual,
    "harmonic": cmd_harmonic,
    "deficiency": cmd_deficiency,
    "boundary": cmd_boundary,
    "indicator": cmd_indicator,
    "lattice": cmd_lattice,
    "gaussian-check": cmd_gaussian,
}


def build_parser():
    p = _Parser(prog="energy-space", description="Energy-space analytics for weighted graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--graph", default=None if name in ("dual", "lattice") else "zchain")
        s.add_argument("--base", default=None)
        s.add_argument("--window", default=None)
        s.add_argument("--vertex", default=None)
        s.add_argument("--section", type=int, default=None, help="box radius for the finite section")
        s.add_argument("--mode", choices=dipole.MODES, default="free")
        s.add_argument("--filtration", default=None)
        s.add_argument("--lambda", dest="lam", type=float, default=-1.0)
        s.add_argument("--span", type=int, default=40)
        s.add_argument("--samples", type=int, default=gaussian.DEFAULT_SAMPLES)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--tol", type=float, default=None)
        s.add_argument("--gram-file", default=None)
    return p


def render(report: dict, rows: list, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "quantity", "value"])
        for level, q, v in rows:
            w.writerow([level, q, repr(float(v)) if isinstance(v, (float, np.floating)) else v])
        return buf.getvalue()
    return json.dumps(_jsonable(report), indent=2) + "\n"


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        g = load_graph(args) if args.graph else None
        if g is None and args.command not in ("dual", "lattice"):
            raise UsageError("--graph is required")
        body, rows = COMMANDS[args.command](args, g)
        report = {
            "schema": SCHEMA,
            "command": args.command,
            "inputs": {k: v for k, v in sorted(vars(args).items()) if v is not None},
            **(_graph_info(g) if g is not None else {}),
            "paper_anchor": ANCHORS[args.command],
            "tolerances": {"cauchy_gap": dipole.CAUCHY_GAP, "row_sum": duality.ROW_SUM_TOL,
                           "user": args.tol},
            **body,
        }
        out.write(render(report, rows, args.format))
        return 0
    except (UsageError, GraphError, NumericsError, ValueError, KeyError, OSError) as exc:
        print(f"energy-space: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"energy-space: internal error: {exc!r}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
