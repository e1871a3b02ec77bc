"""Command-line front end.

    qgraph weyl     --graph G.json --edge l1 --z 0+1i
    qgraph kappa    --graph G.json --method both
    qgraph bargmann --graph G.json
    qgraph scatter  --graph G.json --lambda-min 0.1 --lambda-max 10 --steps 50 --out csv
    qgraph pdet     --graph G.json --zeta -1+0i --z -4+0i
    qgraph oracle   --graph G.json --bottom 3
    qgraph validate --graph G.json

Results go to stdout as JSON (CSV for sweeps). Exit codes: 0 ok, 2 input
error, 3 mathematical singularity, 4 cross-check disagreement; failures
print {"error": <type>, "message": ...}.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import negspec, oracle, scattering, weyl
from .errors import InputError, NotAStar, QGraphError, SpecParseError
from .graph import FiniteEdge, LeadEdge, MetricGraph, SpectralPoint, _coupling, validate
from .potential import EdgePotential

# -- JSON encoding ----------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == 0:
        return "0.0"
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))
    return format(x, ".17g")


def dumps(obj, indent: int | None = None, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits and a fixed key order."""
    nl = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{nl}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep numeric leaves on one line
        flat = all(not isinstance(v, (dict, list, tuple)) for v in obj)
        if flat or indent is None:
            return "[" + ", ".join(dumps(v, None) for v in obj) + "]"
        return "[" + sep.join(f"{nl}{dumps(v, indent, _level + 1)}" for v in obj) + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([obj.real, obj.imag])
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    return json.dumps(str(obj))


def enc_matrix(a) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def dec_matrix(obj, what: str = "matrix") -> np.ndarray:
    """Nested rows of [re, im] pairs (plain reals also accepted); a bare number is 1x1."""
    if isinstance(obj, (int, float)):
        return np.array([[complex(obj)]])
    try:
        rows = []
        for row in obj:
            vals = []
            for v in row:
                if isinstance(v, (list, tuple)):
                    if len(v) != 2:
                        raise ValueError
                    vals.append(complex(float(v[0]), float(v[1])))
                else:
                    vals.append(complex(float(v)))
            rows.append(vals)
        a = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise SpecParseError(f"cannot read {what}: expected rows of [re, im] pairs") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpecParseError(f"{what} must be square, got shape {a.shape}")
    return a


def _num(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _inf(x, default):
    return default if x is None else float(x)


def potential_to_doc(q: EdgePotential) -> dict:
    d = {"kind": q.kind}
    if q.kind == "zero":
        d["m"] = q.m
        return d
    if q.kind == "constant":
        d.update(value=enc_matrix(q.values[0]), start=_num(q.grid[0]), end=_num(q.grid[1]))
    elif q.kind == "piecewise_constant":
        d.update(breaks=[float(x) for x in q.grid], values=[enc_matrix(v) for v in q.values])
    elif q.kind == "gaussian_bumps":
        d.update(centers=[float(x) for x in q.grid], widths=[float(x) for x in q.widths],
                 amplitudes=[enc_matrix(v) for v in q.values])
    elif q.kind == "sampled":
        d.update(x=[float(x) for x in q.grid], values=[enc_matrix(v) for v in q.values])
    if q.window != (-np.inf, np.inf):
        d["window"] = [_num(q.window[0]), _num(q.window[1])]
    d["is_L1"] = bool(q.is_L1)
    d["is_xL1"] = bool(q.is_xL1)
    return d


def potential_from_doc(d, m: int) -> EdgePotential:
    if d is None:
        return EdgePotential.zero(m)
    if not isinstance(d, dict) or "kind" not in d:
        raise SpecParseError("potential must be an object with a 'kind'")
    kind = d["kind"]
    try:
        if kind == "zero":
            q = EdgePotential.zero(int(d.get("m", m)))
        elif kind == "constant":
            q = EdgePotential.constant(dec_matrix(d["value"], "potential value"),
                                       None if d.get("end") is None else float(d["end"]),
                                       float(d.get("start", 0.0) or 0.0))
        elif kind == "piecewise_constant":
            q = EdgePotential.piecewise_constant(d["breaks"], [dec_matrix(v) for v in d["values"]])
        elif kind == "gaussian_bumps":
            q = EdgePotential.gaussian_bumps(d["centers"], d["widths"], [dec_matrix(v) for v in d["amplitudes"]])
        elif kind == "sampled":
            q = EdgePotential.sampled(d["x"], [dec_matrix(v) for v in d["values"]])
        else:
            raise SpecParseError(f"unknown potential kind {kind!r}")
    except KeyError as exc:
        raise SpecParseError(f"potential of kind {kind!r} lacks field {exc}") from exc
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecParseError(f"bad potential of kind {kind!r}: {exc}") from exc
    changes = {}
    if "window" in d:
        lo, hi = d["window"]
        changes["window"] = (_inf(lo, -np.inf), _inf(hi, np.inf))
    for flag in ("is_L1", "is_xL1"):
        if flag in d:
            changes[flag] = bool(d[flag])
    return replace(q, **changes) if changes else q


def graph_to_doc(g: MetricGraph) -> dict:
    verts = [{"id": v, "alpha": enc_matrix(g.alpha(v))} for v in g.vertices]
    edges = []
    for e in g.leads:
        edges.append({"id": e.id, "kind": "lead", "from": e.vertex, "potential": potential_to_doc(e.potential)})
    for e in g.finite_edges:
        edges.append({"id": e.id, "kind": "finite", "from": e.start, "to": e.end, "length": float(e.length),
                      "potential": potential_to_doc(e.potential)})
    return {"m": g.m, "vertices": verts, "edges": edges}


def graph_from_doc(doc) -> MetricGraph:
    """Parse a graph document. Any topology with valid references is accepted;
    star-only computations check the shape themselves."""
    if not isinstance(doc, dict):
        raise SpecParseError("graph document must be a JSON object")
    try:
        m = int(doc["m"])
        vdocs, edocs = doc["vertices"], doc["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"graph document needs 'm', 'vertices' and 'edges' ({exc})") from exc
    if m < 1:
        raise SpecParseError("m must be a positive integer")
    try:
        vids = tuple(str(v["id"]) for v in vdocs)
        alphas = {str(v["id"]): dec_matrix(v.get("alpha", 0.0), f"alpha({v['id']})") for v in vdocs}
    except (KeyError, TypeError) as exc:
        raise SpecParseError("every vertex needs an 'id'") from exc
    if len(set(vids)) != len(vids) or not vids:
        raise SpecParseError("vertex ids must be unique and non-empty")
    leads, fins = [], []
    for ed in edocs:
        try:
            eid, kind, src = str(ed["id"]), ed["kind"], str(ed.get("from", vids[0]))
        except (KeyError, TypeError) as exc:
            raise SpecParseError("every edge needs 'id' and 'kind'") from exc
        if src not in alphas:
            raise SpecParseError(f"edge {eid} references unknown vertex {src}")
        q = potential_from_doc(ed.get("potential"), m)
        if q.m != m:
            raise SpecParseError(f"edge {eid}: potential has m={q.m}, expected {m}")
        if kind == "lead":
            leads.append(LeadEdge(eid, src, q))
        elif kind == "finite":
            try:
                dst, length = str(ed["to"]), float(ed["length"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SpecParseError(f"finite edge {eid} needs 'to' and a numeric 'length'") from exc
            if dst not in alphas:
                raise SpecParseError(f"edge {eid} references unknown vertex {dst}")
            if not (math.isfinite(length) and length > 0):
                raise SpecParseError(f"edge {eid} has length {length}")
            fins.append(FiniteEdge(eid, src, dst, length, q))
        else:
            raise SpecParseError(f"edge {eid}: kind must be 'lead' or 'finite'")
    if not leads:
        raise SpecParseError("the graph needs at least one lead")
    for v, a in alphas.items():
        if a.shape == (1, 1) and m > 1:
            alphas[v] = a[0, 0] * np.eye(m)
    return MetricGraph(m, vids, tuple(leads), tuple(fins), _coupling(alphas, vids, m))


def load_graph(path: str) -> MetricGraph:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{path} is not valid JSON: {exc}") from exc
    return graph_from_doc(doc)


def parse_complex(s: str) -> complex:
    t = s.strip().replace("−", "-").replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise SpecParseError(f"cannot parse complex number {s!r}") from exc


# -- verbs ------------------------------------------------------------------------


def _params(args) -> oracle.DiscretizationParams:
    try:
        return oracle.DiscretizationParams(h=args.h, L_trunc=args.L)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _point(args) -> SpectralPoint:
    if args.z is not None and args.lam is not None:
        raise InputError("give either --z or --lambda")
    if args.lam is not None:
        if not args.lam > 0:
            raise InputError("--lambda must be positive")
        return SpectralPoint(args.lam, boundary=True)
    if args.z is None:
        raise InputError("one of --z or --lambda is required")
    return SpectralPoint(parse_complex(args.z))


def cmd_weyl(g: MetricGraph, args) -> dict:
    try:
        e = g.edge(args.edge)
    except KeyError as exc:
        raise InputError(f"no edge {args.edge!r}") from exc
    if args.at_zero:
        if isinstance(e, FiniteEdge) and args.triplet == "dn":
            blk = weyl.finite_edge_weyl_dn(e, SpectralPoint(0.0))
        else:
            blk = weyl.weyl_at_zero(e)
    else:
        z = _point(args)
        if isinstance(e, LeadEdge):
            blk = weyl.lead_weyl(e, z)
        elif args.triplet == "dn":
            blk = weyl.finite_edge_weyl_dn(e, z)
        else:
            blk = weyl.finite_edge_weyl_dirichlet(e, z)
    out = blk.to_dict()
    out["value"] = enc_matrix(blk.value)
    return out


def cmd_kappa(g: MetricGraph, args) -> dict:
    rep = negspec.kappa_star(g, args.method, _params(args), waive_nonnegativity=args.waive_nonnegativity)
    return rep.to_dict()


def cmd_bargmann(g: MetricGraph, args) -> dict:
    moments = {}
    for e in g.edges:
        end = e.length if isinstance(e, FiniteEdge) else np.inf
        moments[e.id] = negspec.edge_moment(e.potential, end)
    return {"bargmann_bound": negspec.bargmann_bound(g), "edge_moments": moments,
            "vertex_term": g.m * len(g.vertices)}


def cmd_pdet(g: MetricGraph, args) -> dict:
    zeta, z = SpectralPoint(parse_complex(args.zeta)), SpectralPoint(parse_complex(args.z))
    val = scattering.perturbation_determinant(g, zeta, z, args.pdet_method)
    return {"zeta": zeta.z, "z": z.z, "delta": val}


def cmd_oracle(g: MetricGraph, args) -> dict:
    p = _params(args)
    rep = oracle.kappa_oracle_report(g, p, args.vertex_bc)
    out = {"kappa_oracle": rep.kappa, "history": [list(r) for r in rep.history], "vertex_bc": args.vertex_bc}
    if args.bottom:
        out["bottom"] = [float(x) for x in oracle.eigen_bottom(g, p, args.bottom, args.vertex_bc)]
    if args.nonnegativity:
        ok, est = oracle.nonnegativity_check(g, p)
        out["nonnegativity"] = {"verified": ok, "smallest_eigenvalue": est}
    return out


def cmd_validate(g: MetricGraph, args) -> dict:
    issues = validate(g)
    return {"valid": not issues, "violations": issues, "is_star": g.is_star, "p1": g.p1, "p2": g.p2}


def _scatter_row(g, lam, k_sum):
    try:
        r = scattering.scattering_matrix(g, lam, k_sum)
        return lam, r.S, r.unitarity_defect, ""
    except QGraphError as exc:
        if exc.exit_code != 3:
            raise
        return lam, None, None, exc.kind


def cmd_scatter(g: MetricGraph, args):
    if not g.is_star:
        raise NotAStar("scattering is implemented for star graphs")
    if not (0 < args.lambda_min < args.lambda_max) or args.steps < 1:
        raise InputError("need 0 < lambda-min < lambda-max and steps >= 1")
    lams = np.linspace(args.lambda_min, args.lambda_max, args.steps) if args.steps > 1 else np.array([args.lambda_min])
    threads = max(1, int(os.environ.get("QGRAPH_THREADS", "1") or 1))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda x: _scatter_row(g, float(x), args.k_sum), lams))
    else:
        rows = [_scatter_row(g, float(x), args.k_sum) for x in lams]
    n = g.m * g.p1
    return rows, n


def _csv(rows, n) -> str:
    cols = ["lambda"]
    for j in range(n):
        for k in range(n):
            cols += [f"S{j}_{k}_re", f"S{j}_{k}_im"]
    cols += ["unitarity_defect", "pole"]
    lines = [",".join(cols)]
    for lam, S, defect, flag in rows:
        vals = [_fmt_float(lam)]
        if S is None:
            vals += ["nan"] * (2 * n * n) + ["nan", flag]
        else:
            for v in S.ravel():
                vals += [_fmt_float(v.real), _fmt_float(v.imag)]
            vals += [_fmt_float(defect), ""]
        lines.append(",".join(vals))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qgraph", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--graph", required=True, help="graph specification (JSON)")
        p.add_argument("--echo-spec", action="store_true", help="include the parsed specification in the output")
        p.add_argument("--indent", type=int, default=None)
        return p

    def disc(p):
        p.add_argument("--h", type=float, default=1e-3, help="FEM mesh width")
        p.add_argument("--L", type=float, default=50.0, help="lead truncation length")

    p = common(sub.add_parser("weyl", help="Weyl function of one edge"))
    p.add_argument("--edge", required=True)
    p.add_argument("--z", default=None, help="complex point, e.g. 0+1i")
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="boundary point lambda + i0")
    p.add_argument("--triplet", choices=("dirichlet", "dn"), default="dirichlet")
    p.add_argument("--at-zero", action="store_true", help="limit value M(0)")

    p = common(sub.add_parser("kappa", help="number of negative eigenvalues"))
    p.add_argument("--method", choices=("weyl", "oracle", "both"), default="weyl")
    p.add_argument("--waive-nonnegativity", action="store_true")
    disc(p)

    common(sub.add_parser("bargmann", help="Bargmann-type upper bound"))

    p = common(sub.add_parser("scatter", help="scattering matrix on a lambda grid"))
    p.add_argument("--lambda-min", type=float, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--out", choices=("csv", "json"), default="csv")
    p.add_argument("--k-sum", choices=scattering.K_SUMS, default="all")

    p = common(sub.add_parser("pdet", help="perturbation determinant"))
    p.add_argument("--zeta", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--method", dest="pdet_method", choices=("schur", "full"), default="schur")

    p = common(sub.add_parser("oracle", help="finite-element negative count"))
    p.add_argument("--vertex-bc", choices=oracle.VERTEX_BCS, default="delta")
    p.add_argument("--bottom", type=int, default=0, help="also report this many lowest eigenvalues")
    p.add_argument("--nonnegativity", action="store_true", help="check the all-Dirichlet operator")
    disc(p)

    common(sub.add_parser("validate", help="check graph invariants"))
    return ap


VERBS = {"weyl": cmd_weyl, "kappa": cmd_kappa, "bargmann": cmd_bargmann, "pdet": cmd_pdet,
         "oracle": cmd_oracle, "validate": cmd_validate}


def _error_body(exc: Exception, code: int) -> dict:
    kind = exc.kind if isinstance(exc, QGraphError) else type(exc).__name__
    body = {"error": kind, "message": str(exc), "exit_code": code}
    rep = getattr(exc, "report", None)
    if rep is not None:
        body["report"] = rep.to_dict()
    return body


def _glue_values(argv):
    """Let complex arguments such as ``--z -4+0i`` through argparse."""
    argv = list(sys.argv[1:] if argv is None else argv)
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--z", "--zeta") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None, out=sys.stdout) -> int:
    args = build_parser().parse_args(_glue_values(argv))
    try:
        g = load_graph(args.graph)
        if args.verb == "scatter":
            rows, n = cmd_scatter(g, args)
            if args.out == "csv":
                text = _csv(rows, n)
                if args.echo_spec:
                    text = "# spec: " + dumps(graph_to_doc(g)) + "\n" + text
                out.write(text + "\n")
                return 0
            result = {"rows": [{"lambda": lam, "S": None if S is None else enc_matrix(S),
                                "unitarity_defect": d, "pole": flag or None} for lam, S, d, flag in rows]}
        else:
            result = VERBS[args.verb](g, args)
        if args.echo_spec:
            result["spec"] = graph_to_doc(g)
        out.write(dumps(result, args.indent) + "\n")
        code = 0
        if args.verb == "validate" and not result["valid"]:
            code = 2
        return code
    except QGraphError as exc:
        out.write(dumps(_error_body(exc, exc.exit_code)) + "\n")
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        out.write(dumps(_error_body(exc, 3)) + "\n")
        return 3
    except ValueError as exc:
        out.write(dumps(_error_body(exc, 2)) + "\n")
        return 2


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
