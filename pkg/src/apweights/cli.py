"""Command-line experiment runner.

Every command writes one artifact (JSON by default, CSV with --format csv) to
stdout or --output.  Exit status: 0 success, 1 usage / input / precondition
error (one line on stderr), 2 when a checked inequality fails (the output is
still written and a JSON violation record goes to stderr).
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import sys
from pathlib import Path
from typing import Optional

from . import io
from .bilinear import (BilinearParams, bilinear_a2_check, bilinear_rh_check,
                       multi_ap_constant)
from .czsparse import (cf_check, cz_decompose, cz_ladder, sparse_from_ladder)
from .errors import ApWeightsError, ParameterError
from .grid import CubeFamily, as_weight
from .maximal import MaximalKind, apply_maximal, iterate_maximal, weak_type_ratio
from .parallel import set_threads
from .rdf import (extrapolation_weight, factorize_ap_rh, jones_factorize, rdf_majorant,
                  sharp_constant_predict)
from .selftest import run_selftest
from .studies import (a2_growth_study, buckley_study, norm_growth_study, power_refinement_study,
                      rh_exponent_study, vv_maximal_study)
from .weights import (a1_constant, ainfty_rj_constant, ap_constant, apq_constant,
                      fw_ainfty_constant, rh_constant, rhinf_constant)

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Result:
    """What a command produced: a JSON document, CSV rows, and the checks it ran."""

    def __init__(self, doc, rows=None, violations=None, text: Optional[str] = None):
        self.doc = doc
        self.rows = rows if rows is not None else [_scalars(doc)]
        self.violations = violations or []
        self.text = text


def _scalars(d) -> dict:
    return {k: v for k, v in d.items() if not isinstance(v, (dict, list))}


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (dict, list, tuple)):
        return io.dumps(v)
    return str(v)


def to_csv(rows) -> str:
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = _io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for r in rows:
        wr.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def _report(rep) -> Result:
    d = rep.to_dict()
    bad = rep.checks.violations() if hasattr(rep, "checks") else []
    return Result(d, d.get("checks") or [_scalars(d)], bad)


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _depths(text: str) -> list:
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise ParameterError(f"bad depth range {text!r}; use lo:hi or a comma list") from None


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command} is randomized; pass --seed")
    return args.seed


def _weight(path):
    return as_weight(io.read_any(path))


def _same_grid(*fs):
    if len({f.grid for f in fs}) > 1:
        raise ParameterError("input files live on different grids")


# commands

CONSTANT_KINDS = ("ap", "a1", "rh", "rhinf", "ainf-rj", "fw", "apq")


def cmd_constants(a):
    w = _weight(a.weight)
    fam = CubeFamily.parse(a.family)
    if a.kind == "all":
        kinds = [k for k in CONSTANT_KINDS if k != "apq" or a.q is not None]
    else:
        kinds = a.kind.split(",")
    reps = []
    for k in kinds:
        if k == "ap":
            reps.append(ap_constant(w, a.p, fam))
        elif k == "a1":
            reps.append(a1_constant(w, fam))
        elif k == "rh":
            reps.append(rh_constant(w, a.s, fam))
        elif k == "rhinf":
            reps.append(rhinf_constant(w, fam))
        elif k == "ainf-rj":
            reps.append(ainfty_rj_constant(w, fam))
        elif k == "fw":
            reps.append(fw_ainfty_constant(w, fam))
        elif k == "apq":
            if a.q is None:
                raise UsageError("apq needs --q")
            reps.append(apq_constant(w, a.p, a.q, fam))
        else:
            raise UsageError(f"unknown constant kind {k!r}; choose from {', '.join(CONSTANT_KINDS)}")
    docs = [r.to_dict() for r in reps]
    text = "".join(io.dumps(d) + "\n" for d in docs)
    rows = [{"kind": d["kind"], "value": d["value"], "level": d["cube"]["level"],
             "side": d["cube"]["side"], "coords": d["cube"]["coords"], "shift": d["cube"]["shift"],
             "family": fam.describe()} for d in docs]
    return Result(docs, rows, text=text)


def _maximal_kind(a, g):
    kind = MaximalKind.parse(a.kind)
    if a.sigma:
        sigma = _weight(a.sigma)
        if sigma.grid != g:
            raise ParameterError("sigma and f live on different grids")
        kind = MaximalKind.weighted(sigma, kind.shift if kind.is_dyadic else 0)
    return kind


def _cells(f):
    return [{"cell": i, "value": float(v)} for i, v in enumerate(f.values.ravel())]


def cmd_maximal(a):
    f = io.read_any(a.f)
    kind = _maximal_kind(a, f.grid)
    Mf = iterate_maximal(kind, f, a.iterate) if a.iterate > 1 else apply_maximal(kind, f)
    doc = {"kind": kind.describe(), "iterate": a.iterate, "dim": f.grid.dim, "depth": f.grid.depth,
           "values": [float(v) for v in Mf.values.ravel()]}
    return Result(doc, _cells(Mf))


def cmd_weak_type(a):
    f, w = io.read_any(a.f), _weight(a.weight)
    _same_grid(f, w)
    kind = MaximalKind.parse(a.kind)
    r = weak_type_ratio(kind, f, w, a.p)
    return Result({"kind": kind.describe(), "p": a.p, "weak_ratio": r})


def _cube_rows(cubes, g, **extra):
    return [dict(Q.to_dict(g), label=Q.label(g), **extra) for Q in cubes]


def cmd_cz(a):
    f = io.read_any(a.f)
    g = f.grid
    if a.lam is not None:
        cubes = cz_decompose(f, a.lam, a.shift)
        rows = _cube_rows(cubes, g, lam=a.lam)
        return Result({"lambda": a.lam, "shift": a.shift, "cubes": rows}, rows)
    lad = cz_ladder(f, a.a, a.shift)
    rows = []
    for k in lad.ks:
        for j, (Q, av) in enumerate(zip(lad.levels[k], lad.averages[k])):
            rows.append(dict(Q.to_dict(g), label=Q.label(g), k=k, average=av,
                             parentless=(k, j) in lad.parentless))
    return Result({"a": lad.base, "shift": a.shift, "cubes": rows}, rows)


def cmd_sparse(a):
    f = io.read_any(a.f)
    S = sparse_from_ladder(cz_ladder(f, a.a, a.shift), a.eta)
    text = io.sparse_to_json(S)
    rows = [dict(Q.to_dict(S.grid), label=Q.label(S.grid), e_cells=len(E))
            for Q, E in zip(S.cubes, S.esets)]
    bad = [{"inequality": v, "witness": {}} for v in S.violations()]
    return Result(None, rows, bad, text=text)


def cmd_cf_check(a):
    f, w = io.read_any(a.f), _weight(a.weight)
    _same_grid(f, w)
    return _report(cf_check(f, w, a.p, a.a, a.shift))


def _h(path, g):
    if not path:
        return None
    h = io.read_any(path)
    if h.grid != g:
        raise ParameterError("h and the weight live on different grids")
    return h


def _kind_or_none(a):
    return MaximalKind.parse(a.kind) if a.kind else None


def cmd_factorize(a):
    w = _weight(a.weight)
    fac = jones_factorize(w, a.p, _h(a.h, w.grid), _kind_or_none(a))
    res = _report(fac)
    if a.outdir:
        io.write_factorization(fac, w, a.outdir, a.h or "default")
    return res


def cmd_factorize_rh(a):
    w = _weight(a.weight)
    return _report(factorize_ap_rh(w, a.p, a.s, _h(a.h, w.grid), _kind_or_none(a)))


def cmd_majorant(a):
    w = _weight(a.weight)
    h = _h(a.h, w.grid)
    rep = rdf_majorant(h, a.p, w, kind=_kind_or_none(a))
    if a.outdir:
        Path(a.outdir).mkdir(parents=True, exist_ok=True)
        io.write_wgt1(rep.majorant, Path(a.outdir) / "majorant.wgt")
    return _report(rep)


def cmd_extrapolate_weight(a):
    w = _weight(a.weight)
    h1, h2 = _h(a.h1, w.grid), _h(a.h2, w.grid)
    w0, rep = extrapolation_weight(h1, h2, w, a.p, a.p0, _kind_or_none(a))
    if a.outdir:
        Path(a.outdir).mkdir(parents=True, exist_ok=True)
        io.write_wgt1(w0, Path(a.outdir) / "w0.wgt")
    return _report(rep)


def cmd_sharp_predict(a):
    return Result(sharp_constant_predict(a.p0, a.p).to_dict())


def cmd_bilinear_constants(a):
    w1, w2 = _weight(a.w1), _weight(a.w2)
    _same_grid(w1, w2)
    fam = CubeFamily.parse(a.family)
    bp = BilinearParams(a.p1, a.p2, w1, w2)
    mp = multi_ap_constant(bp, fam).to_dict()
    rh = bilinear_rh_check(w1, w2, a.s, fam)
    doc = {"p": bp.p, "p1": a.p1, "p2": a.p2, "multi_ap": mp, "rh": rh.to_dict()}
    row = {"p": bp.p, "multi_ap": mp["value"], "s": a.s, "C_star": rh.C_star, "r": rh.r,
           "chain_constant": rh.chain_constant, "passed": rh.passed}
    return Result(doc, [row], rh.checks.violations())


def cmd_bilinear_check(a):
    f, h, w1, w2 = io.read_any(a.f), io.read_any(a.g), _weight(a.w1), _weight(a.w2)
    _same_grid(f, h, w1, w2)
    if a.sparse:
        try:
            S = io.sparse_from_json(Path(a.sparse).read_text())
        except OSError as e:
            raise ParameterError(f"cannot read {a.sparse}: {e.strerror}") from None
    else:
        S = sparse_from_ladder(cz_ladder(f, a.a, a.shift))
    rep = bilinear_a2_check(S, f, h, w1, w2)
    rh = bilinear_rh_check(w1, w2, a.s, CubeFamily.dyadic(S.shift))
    doc = {"a2": rep.to_dict(), "rh": rh.to_dict()}
    rows = rep.checks.to_list() + rh.checks.to_list()
    return Result(doc, rows, rep.checks.violations() + rh.checks.violations())


def _study(st) -> Result:
    return Result(st.to_dict(), st.rows)


def cmd_buckley_study(a):
    return _study(buckley_study(_floats(a.a) if a.a else (0.5, 0.7, 0.8, 0.9), a.p, a.depth, a.dim,
                                a.trials, _need_seed(a)))


def cmd_a2_growth_study(a):
    vals = _floats(a.a) if a.a else (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    return _study(a2_growth_study(vals, a.depth, a.dim, a.family, a.trials, _need_seed(a)))


def cmd_rh_exponent_study(a):
    vals = _floats(a.a) if a.a else (-0.2, -0.3, -0.4, -0.5, -0.6, -0.7, -0.8, -0.9)
    return _study(rh_exponent_study(vals, a.depth, a.dim, a.s_cap))


def cmd_vv_maximal_study(a):
    return _study(vv_maximal_study(_floats(a.q), a.p, a.power_a, a.depth, a.dim, a.members,
                                   a.trials, _need_seed(a)))


def cmd_norm_growth_study(a):
    return _study(norm_growth_study(_floats(a.ps), a.power_a, a.depth, a.dim, a.family, a.trials,
                                    _need_seed(a)))


def cmd_study(a):
    st = power_refinement_study(a.power_a, a.p, _depths(a.depths), a.dim, CubeFamily.parse(a.family),
                                bounded_ratio=a.bounded_ratio, growth_ratio=a.growth_ratio,
                                growth_steps=a.growth_steps)
    return _study(st)


def cmd_convert(a):
    try:
        text = Path(a.input).read_text()
    except OSError as e:
        raise ParameterError(f"cannot read {a.input}: {e.strerror}") from None
    return Result(None, [], text=io.convert_text(text, a.direction))


def cmd_selftest(a):
    rows = run_selftest(0 if a.seed is None else a.seed)
    bad = [{"inequality": r["check"], "detail": r["detail"]} for r in rows if not r["passed"]]
    return Result({"checks": rows, "passed": not bad}, rows, bad)


# parser

def _common(p):
    p.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized experiments")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="apweights", description="Weighted-inequality experiments on dyadic grids.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser, metavar="command")

    def add(name, fn, help):
        p = sub.add_parser(name, help=help, description=help)
        _common(p)
        p.set_defaults(func=fn)
        return p

    p = add("constants", cmd_constants, "weight-class constants of one weight")
    p.add_argument("--weight", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--family", default="dyadic")
    p.add_argument("--kind", default="ap", help=f"comma list of {', '.join(CONSTANT_KINDS)}, or all (apq only with --q)")

    p = add("maximal", cmd_maximal, "apply a maximal operator to a step function")
    p.add_argument("--f", required=True)
    p.add_argument("--kind", default="dyadic", help="dyadic, dyadic:<shift> or full")
    p.add_argument("--sigma", help="weight file for the weighted dyadic operator")
    p.add_argument("--iterate", type=int, default=1)

    p = add("weak-type", cmd_weak_type, "weak-type ratio of a maximal operator")
    p.add_argument("--f", required=True)
    p.add_argument("--weight", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--kind", default="dyadic")

    p = add("cz", cmd_cz, "Calderon-Zygmund cubes at one height or the full ladder")
    p.add_argument("--f", required=True)
    p.add_argument("--lam", type=float, help="single height; omit for the ladder")
    p.add_argument("--a", type=float, help="ladder base (default 2^(dim+1))")
    p.add_argument("--shift", type=int, default=0)

    p = add("sparse", cmd_sparse, "sparse family built from the CZ ladder of f")
    p.add_argument("--f", required=True)
    p.add_argument("--a", type=float)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--eta", type=float, default=0.5)

    p = add("cf-check", cmd_cf_check, "sparse operator against the dyadic maximal function")
    p.add_argument("--f", required=True)
    p.add_argument("--weight", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--a", type=float)
    p.add_argument("--shift", type=int, default=0)

    for name, fn, help in [("factorize", cmd_factorize, "factor an A_p weight into two A_1 weights"),
                           ("factorize-rh", cmd_factorize_rh, "factor w^s for w in A_p and RH_s"),
                           ("majorant", cmd_majorant, "iteration-algorithm A_1 majorant of h")]:
        p = add(name, fn, help)
        p.add_argument("--weight", required=True)
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--h", required=(name == "majorant"))
        p.add_argument("--kind", help="maximal operator used by the iteration (default dyadic)")
        if name == "factorize-rh":
            p.add_argument("--s", type=float, required=True)
        else:
            p.add_argument("--outdir", help="write weight files and a manifest here")

    p = add("extrapolate-weight", cmd_extrapolate_weight, "A_p0 weight built from two majorants")
    p.add_argument("--weight", required=True)
    p.add_argument("--h1", required=True)
    p.add_argument("--h2", required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--kind")
    p.add_argument("--outdir")

    p = add("sharp-predict", cmd_sharp_predict, "constant exponents after extrapolation")
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--p", type=float, required=True)

    p = add("bilinear-constants", cmd_bilinear_constants, "multilinear A_p and reverse Hölder constants")
    p.add_argument("--w1", required=True)
    p.add_argument("--w2", required=True)
    p.add_argument("--p1", type=float, default=2.0)
    p.add_argument("--p2", type=float, default=2.0)
    p.add_argument("--s", type=float, default=2.0)
    p.add_argument("--family", default="dyadic")

    p = add("bilinear-check", cmd_bilinear_check, "bilinear sparse bound at p1 = p2 = 2")
    for k in ("f", "g", "w1", "w2"):
        p.add_argument(f"--{k}", required=True)
    p.add_argument("--sparse", help="sparse family JSON (default: ladder of f)")
    p.add_argument("--a", type=float)
    p.add_argument("--shift", type=int, default=0)
    p.add_argument("--s", type=float, default=2.0)

    p = add("buckley-study", cmd_buckley_study, "maximal operator norm growth on power weights")
    p.add_argument("--a", help="comma list of exponents")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--trials", type=int, default=8)

    p = add("a2-growth-study", cmd_a2_growth_study, "sparse operator norm growth against [w]_A2")
    p.add_argument("--a", help="comma list of exponents")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--family", default="chain", choices=("chain", "ladder"))
    p.add_argument("--trials", type=int, default=8)

    p = add("rh-exponent-study", cmd_rh_exponent_study, "reverse Hölder exponent vs Fujii-Wilson constant")
    p.add_argument("--a", help="comma list of exponents")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--s-cap", type=float, default=64.0)

    p = add("vv-maximal-study", cmd_vv_maximal_study, "vector-valued maximal inequality ratios")
    p.add_argument("--q", default="1.5,2,4")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--power-a", type=float, default=0.5)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--members", type=int, default=4)
    p.add_argument("--trials", type=int, default=16)

    p = add("norm-growth-study", cmd_norm_growth_study, "sparse operator norm as p grows")
    p.add_argument("--ps", default="1.5,2,3,4,6,8")
    p.add_argument("--power-a", type=float, default=0.0)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--family", default="chain", choices=("chain", "ladder"))
    p.add_argument("--trials", type=int, default=8)

    p = add("study", cmd_study, "refinement study of [|x|^a]_A_p across depths")
    p.add_argument("--power-a", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--depths", default="6:12")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--family", default="dyadic")
    p.add_argument("--bounded-ratio", type=float, default=1.05)
    p.add_argument("--growth-ratio", type=float, default=1.05)
    p.add_argument("--growth-steps", type=int, default=3)

    p = add("convert", cmd_convert, "convert between WGT1 and JSON")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--direction", choices=("auto", "to-json", "to-wgt1"), default="auto")

    add("selftest", cmd_selftest, "run the seeded invariant suite")
    return ap


def _render(res: Result, fmt: str) -> str:
    if res.text is not None and (fmt == "json" or res.doc is None and not res.rows):
        return res.text
    if fmt == "csv":
        return to_csv(res.rows)
    return io.dumps(res.doc) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("missing command; see --help")
        set_threads(args.threads)
        res = args.func(args)
        out = _render(res, args.format)
        if args.output:
            Path(args.output).write_text(out)
        else:
            sys.stdout.write(out)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (ApWeightsError, ValueError, ZeroDivisionError, OSError) as e:
        print(f"error: {str(e).splitlines()[0] if str(e) else type(e).__name__}", file=sys.stderr)
        return 1
    if res.violations:
        print(io.dumps({"command": args.command, "violations": res.violations}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
