"""Command-line front end: one subcommand per library operation.

Reports go to stdout (or ``--output``) as sorted JSON or flat CSV; complex
numbers are encoded as ``[re, im]``.  Errors are reported as
``{"error": {"kind": ..., "detail": ...}}`` with exit code 1 (input), 2
(domain) or 3 (convergence).
"""

from __future__ import annotations

import argparse
import cmath
import csv
import dataclasses
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import critdiag, hermanmodel, measure, ratmap, sampling, transfer, transversal
from .errors import InputError, RuelleLabError, exit_code
from .poly import CLUSTER_RADIUS, MAX_ITER, RESIDUAL_TOL, Poly, find_roots


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


# ---------------------------------------------------------------------------
# encoding


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types: complex as ``[re, im]``, non-finite floats as strings."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [to_jsonable(x) for x in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(payload: dict) -> str:
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def _flatten(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if isinstance(v, (complex, np.complexfloating)):
            out[f"{k}_re"], out[f"{k}_im"] = repr(float(v.real)), repr(float(v.imag))
        elif isinstance(v, (float, np.floating)):
            out[k] = repr(float(v))
        else:
            out[k] = v
    return out


def to_csv(rows: list[dict]) -> str:
    flat = [_flatten(r) for r in rows]
    cols: list[str] = []
    for r in flat:
        cols.extend(k for k in r if k not in cols)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    w.writerows(flat)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# input helpers


def parse_complex(s: str) -> complex:
    try:
        return complex(str(s).replace(" ", ""))
    except ValueError as exc:
        raise InputError(f"not a complex number: {s!r}") from exc


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def load_map(path: str) -> ratmap.RationalMap:
    return ratmap.RationalMap.from_json(_load_json(path))


def load_poly(path: str) -> Poly:
    spec = _load_json(path)
    if set(spec) != {"coeffs"}:
        raise InputError("polynomial spec must be {\"coeffs\": [[re, im], ...]} (ascending)")
    try:
        return Poly([complex(a, b) for a, b in spec["coeffs"]])
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad polynomial spec: {exc}") from exc


def load_model(path: str) -> hermanmodel.AnnulusModel:
    return hermanmodel.AnnulusModel.from_json(_load_json(path))


def load_family(path: str, v0: complex | None) -> transversal.FamilySpec:
    spec = _load_json(path)
    if "unicritical" in spec:
        if set(spec) != {"unicritical"}:
            raise InputError("unicritical family spec takes only the degree")
        return transversal.FamilySpec.unicritical(int(spec["unicritical"]), 0j if v0 is None else v0)
    fam = transversal.FamilySpec.from_json(spec)
    return fam if v0 is None else fam.shifted(v0)


def load_field(spec: str) -> transfer.EvaluableField:
    """``one``, ``zinv2``, ``measure:PATH`` (Cauchy transform) or ``model:PATH`` (model fixed field)."""
    if spec == "one":
        return transfer.constant_field(1.0)
    if spec == "zinv2":
        return transfer.power_field(-2)
    kind, _, path = spec.partition(":")
    if kind == "measure" and path:
        return transfer.cauchy_field(measure.measure_from_json(_load_json(path)), f"cauchy transform of {path}")
    if kind == "model" and path:
        return hermanmodel.model_fixed_field(load_model(path))
    raise InputError(f"unknown field spec {spec!r}; use one, zinv2, measure:PATH or model:PATH")


def _fiber_map(args):
    if args.model:
        return hermanmodel.AnnulusRotationMap(load_model(args.model))
    if args.map:
        return load_map(args.map)
    raise InputError("give --map or --model")


def _sample_points(args) -> np.ndarray:
    n, seed = args.samples, args.seed
    if args.annulus:
        return sampling.annulus(n, args.annulus[0], args.annulus[1], seed)
    if args.box:
        x0, y0, x1, y1 = args.box
        return sampling.box(n, complex(x0, y0), complex(x1, y1), seed)
    if args.model:
        m = load_model(args.model)
        pad = 0.02 * (m.R - 1)
        return m.map(sampling.annulus(n, 1 + pad, m.R - pad, seed))
    return sampling.box(n, complex(-3, -3), complex(3, 3), seed)


def _roots_rows(rs) -> list[dict]:
    rows = [
        {"root": complex(r), "multiplicity": int(m), "residual": float(e)}
        for r, m, e in zip(rs.roots.tolist(), rs.multiplicities.tolist(), rs.residuals.tolist())
    ]
    if rs.infinity_multiplicity:
        rows.append({"root": "inf", "multiplicity": int(rs.infinity_multiplicity), "residual": 0.0})
    return rows


Result = tuple[dict, list[dict], Callable[[str], None] | None]


# ---------------------------------------------------------------------------
# commands


def cmd_roots(args) -> Result:
    rs = find_roots(load_poly(args.poly), tol=args.tol, max_iter=args.max_iter, cluster_radius=args.cluster_radius)
    tol = {"residual": args.tol, "max_iter": args.max_iter, "cluster_radius": args.cluster_radius}
    return {"roots": rs, "tolerances": tol}, _roots_rows(rs), None


def cmd_preimages(args) -> Result:
    rs = load_map(args.map).preimages(args.x)
    tol = {"residual": RESIDUAL_TOL, "cancel_rtol": ratmap.CANCEL_RTOL}
    return {"x": args.x, "fiber": rs, "tolerances": tol}, _roots_rows(rs), None


def cmd_critical_points(args) -> Result:
    rs = ratmap.critical_points(load_map(args.map))
    tol = {"residual": RESIDUAL_TOL, "cancel_rtol": ratmap.CANCEL_RTOL}
    return {"critical_points": rs, "tolerances": tol}, _roots_rows(rs), None


def cmd_orbit(args) -> Result:
    orb = ratmap.orbit(load_map(args.map), args.z0, args.m, args.escape_radius)
    rows = [{"n": n, "z": z, "deriv": d} for n, (z, d) in enumerate(zip(orb.points, orb.derivs))]
    return {"orbit": orb, "tolerances": {"escape_radius": args.escape_radius}}, rows, None


def cmd_infinity_form(args) -> Result:
    form = ratmap.infinity_form(load_map(args.map))
    return {"infinity_form": form, "tolerances": {}}, [dataclasses.asdict(form)], None


def cmd_conjugate(args) -> Result:
    parts = [parse_complex(s) for s in args.moebius.split(",")]
    if len(parts) != 4:
        raise InputError("--moebius takes four comma-separated complex numbers a,b,c,d")
    g = ratmap.moebius_conjugate(load_map(args.map), parts)
    rows = [
        {"part": part, "k": k, "coeff": c}
        for part, poly in (("num", g.num), ("den", g.den))
        for k, c in enumerate(poly.coeffs.tolist())
    ]
    return {"map": g.to_json(), "tolerances": {"coprime": ratmap.COPRIME_TOL}}, rows, None


def cmd_cauchy(args) -> Result:
    mu = measure.measure_from_json(_load_json(args.measure))
    zs = args.z or []
    vals = [measure.cauchy(mu, z) for z in zs]
    tol = {"atom": measure.ATOM_TOL, "zone_spacings": measure.ZONE_SPACINGS}
    return {"points": zs, "values": vals, "tolerances": tol}, [{"z": z, "value": v} for z, v in zip(zs, vals)], None


def cmd_moments(args) -> Result:
    m = measure.moments(measure.measure_from_json(_load_json(args.measure)))
    row = {"A": m.A, "B": m.B, "tail_S": m.tail_S if m.tail_S is not None else ""}
    return {"moments": m, "tolerances": {}}, [row], None


def cmd_transfer_apply(args) -> Result:
    val = transfer.apply(_fiber_map(args), load_field(args.g), args.x, crit_tol=args.crit_tol)
    return {"x": args.x, "value": val, "tolerances": {"crit_tol": args.crit_tol}}, [{"x": args.x, "value": val}], None


def cmd_fixed_residual(args) -> Result:
    rep = transfer.fixed_point_residual(
        _fiber_map(args), load_field(args.g), _sample_points(args), tol=args.tol, crit_tol=args.crit_tol
    )
    rows = [
        {"z": z, "H": h, "TH": t, "residual": r, "triangle_gap": g}
        for z, h, t, r, g in zip(rep.sample_points, rep.values, rep.transformed, rep.residuals, rep.triangle_gaps)
    ]
    tol = {"fixed": args.tol, "crit_tol": args.crit_tol, "not_fixed_factor": transfer.NOT_FIXED_FACTOR}
    fig = lambda path: _plot("residual_figure", rep, path)
    return {"report": rep, "tolerances": tol, "seed": args.seed}, rows, fig


def cmd_multiplier(args) -> Result:
    rep = transfer.multiplier_relation(_fiber_map(args), load_field(args.g), args.x)
    return {"x": args.x, "report": rep, "tolerances": {"nonzero": transfer.NONZERO_TOL}}, [{"x": args.x, "L": rep.L, "realness": rep.realness}], None


def cmd_line_field(args) -> Result:
    rep = transfer.line_field_defect(_fiber_map(args), load_field(args.g), _sample_points(args))
    rows = [{"z": z, "defect": d} for z, d in zip(rep.samples, rep.defects)]
    return {"report": rep, "tolerances": {"nonzero": transfer.NONZERO_TOL}, "seed": args.seed}, rows, None


def cmd_invariant_mass(args) -> Result:
    r0, r1, t0, t1 = args.sector
    region = transfer.AnnularSector(r0, r1, t0, t1, args.center)
    rep = transfer.invariant_mass(_fiber_map(args), load_field(args.g), region, rtol=args.rtol, max_panels=args.max_panels)
    row = {"lambda_A": rep.lambda_A, "lambda_preimage": rep.lambda_preimage, "rel_gap": rep.rel_gap}
    return {"report": rep, "tolerances": {"rtol": args.rtol, "max_panels": args.max_panels}}, [row], None


def cmd_summability(args) -> Result:
    rep = critdiag.summability(load_map(args.map), args.c, args.N)
    rows = [{"n": n, "term": t, "partial_sum": s} for n, (t, s) in enumerate(zip(rep.terms, rep.partial_sums))]
    payload = {"report": rep, "total": rep.total, "tolerances": dict(rep.thresholds, crit_check=critdiag.CRIT_CHECK_TOL)}
    return payload, rows, lambda path: _plot("summability_figure", rep, path)


def cmd_omega_limit(args) -> Result:
    rep = critdiag.omega_limit_sample(load_map(args.map), args.x, args.burn_in, args.keep, tuple(args.scales))
    rows = [{"n": n, "z": z} for n, z in enumerate(rep.cloud)]
    return {"report": rep, "tolerances": {"scales": args.scales}}, rows, lambda path: _plot("omega_figure", rep, path)


def cmd_transversality(args) -> Result:
    fam = load_family(args.family, args.v0)
    rep = transversal.transversality(fam, args.crit, args.mmax, rtol=args.rtol)
    n = max(len(rep.quotients), len(rep.series_partials))
    rows = [
        {"index": i, "quotient_m": i + 1, "quotient": rep.quotients[i], "series_M": i, "series_partial": rep.series_partials[i]}
        for i in range(n)
    ]
    tol = {"convergence_rtol": args.rtol, "convergence_run": transversal.CONVERGENCE_RUN, "nonzero_factor": 10}
    payload = {"family": fam.to_json(), "report": rep, "tolerances": tol}
    return payload, rows, lambda path: _plot("transversality_figure", rep, path)


def cmd_l_matrix(args) -> Result:
    fams = [load_family(p, args.v0) for p in args.family]
    crits = args.crit or [0j]
    L = transversal.l_matrix(fams, crits, args.mmax)
    rows = [{"j": j, "k": k, "entry": complex(L.entries[j, k])} for j in range(L.entries.shape[0]) for k in range(L.entries.shape[1])]
    payload = {"crits": crits, "l_matrix": L, "tolerances": {"rank_rtol": transversal.RANK_RTOL}}
    labels = [f"s{i}" for i in range(len(L.singular_values))]
    return payload, rows, lambda path: _plot("bars_figure", labels, L.singular_values, path, "singular value")


def cmd_herman_eigenspace(args) -> Result:
    if args.rotation is not None:
        lam = cmath.exp(2j * math.pi * float(Fraction(args.rotation)))
    else:
        lam = args.lam
    idx = hermanmodel.rotation_eigenspace(lam, args.N)
    return {"lambda": lam, "N": args.N, "indices": idx, "tolerances": {"eigen": hermanmodel.EIGEN_TOL}}, [{"n": n} for n in idx], None


def cmd_herman_verify(args) -> Result:
    model = load_model(args.model)
    mu = hermanmodel.plemelj_measure(model, args.nodes)
    rep = hermanmodel.verify_part2(model, args.samples, args.nodes, mu, args.seed, args.tol)
    rows = [{"check": k, "passed": c.passed, "max_error": c.max_error, "samples": c.samples} for k, c in rep.checks.items()]
    payload = {"model": model.to_json(), "report": rep, "all_passed": rep.all_passed, "tolerances": {"verify": args.tol, "scaling": rep.scaling_tolerance}}

    def fig(path):
        pts = hermanmodel.region_samples(model, mu, args.samples, args.seed)
        _plot("curve_measure_figure", mu, pts, path)

    if not rep.all_passed:
        failed = [k for k, c in rep.checks.items() if not c.passed]
        payload["failed"] = failed
    return payload, rows, fig


def cmd_hardy(args) -> Result:
    rep = hermanmodel.hardy_estimate(load_model(args.model))
    rows = [
        {"eps": e, "nodes": n, "inner": i, "outer": o}
        for e, n, i, o in zip(rep.epsilons, rep.nodes, rep.inner_integrals, rep.outer_integrals)
    ]
    return {"report": rep, "tolerances": rep.thresholds}, rows, lambda path: _plot("hardy_figure", rep, path)


def _plot(name: str, *args) -> None:
    from . import plotting

    getattr(plotting, name)(*args)


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("json", "csv"), default="json", help="report format (default json)")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--figure", help="render a PNG figure of the report to this path")
    p.add_argument("--seed", type=int, default=0, help="seed for quasi-random sample grids (default 0)")
    p.add_argument("--samples", type=int, default=sampling.DEFAULT_SAMPLES, help="sample count (default %(default)s)")
    p.add_argument("--config", help="JSON file of option defaults; keys are option names with '_' for '-'")
    return p


def _map_opts(p, model: bool = False) -> None:
    p.add_argument("--map", help="rational map JSON {\"num\": [[re, im], ...], \"den\": ...}")
    if model:
        p.add_argument("--model", help="annulus model JSON; uses the conjugated rotation as the map")


def _region_opts(p) -> None:
    p.add_argument("--annulus", type=float, nargs=2, metavar=("R_IN", "R_OUT"), help="sample an annulus")
    p.add_argument("--box", type=float, nargs=4, metavar=("X0", "Y0", "X1", "Y1"), help="sample a box")


C = parse_complex


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="ruellelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    subs: dict[str, argparse.ArgumentParser] = {}

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        subs[name] = p
        return p

    p = add("roots", cmd_roots, "roots of a polynomial with multiplicities")
    p.add_argument("--poly", required=True, help="JSON {\"coeffs\": [[re, im], ...]}, ascending powers")
    p.add_argument("--tol", type=float, default=RESIDUAL_TOL)
    p.add_argument("--max-iter", type=int, default=MAX_ITER)
    p.add_argument("--cluster-radius", type=float, default=CLUSTER_RADIUS)

    p = add("preimages", cmd_preimages, "fiber f^-1(x) with multiplicities")
    _map_opts(p)
    p.add_argument("--x", type=C, required=True)

    p = add("critical-points", cmd_critical_points, "critical points including infinity")
    _map_opts(p)

    p = add("orbit", cmd_orbit, "forward orbit with derivatives")
    _map_opts(p)
    p.add_argument("--z0", type=C, required=True)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--escape-radius", type=float, default=ratmap.ESCAPE_RADIUS)

    p = add("infinity-form", cmd_infinity_form, "f(z) = sigma z + b + O(1/z) at infinity")
    _map_opts(p)

    p = add("conjugate", cmd_conjugate, "Moebius conjugate M o f o M^-1 in lowest terms")
    _map_opts(p)
    p.add_argument("--moebius", required=True, help="a,b,c,d as complex literals, e.g. 1,0,0,1")

    p = add("cauchy", cmd_cauchy, "Cauchy transform of a measure")
    p.add_argument("--measure", required=True)
    p.add_argument("--z", type=C, action="append", help="evaluation point (repeatable)")

    p = add("moments", cmd_moments, "total mass, first moment and tail sum")
    p.add_argument("--measure", required=True)

    for name, func, help_ in (
        ("transfer-apply", cmd_transfer_apply, "T_f g at one point"),
        ("fixed-residual", cmd_fixed_residual, "|T_f H - H| on a sample grid"),
        ("multiplier", cmd_multiplier, "L_x = H(f(x)) f'(x)^2 / H(x)"),
        ("line-field", cmd_line_field, "invariance defect of the line field conj(H)/|H|"),
        ("invariant-mass", cmd_invariant_mass, "compare the |H| mass of a sector and of its preimage"),
    ):
        p = add(name, func, help_)
        _map_opts(p, model=True)
        p.add_argument("--g", default="one", help="field: one, zinv2, measure:PATH or model:PATH")
        p.add_argument("--crit-tol", type=float, default=transfer.CRIT_TOL)
        if name in ("transfer-apply", "multiplier"):
            p.add_argument("--x", type=C, required=True)
        if name in ("fixed-residual", "line-field"):
            _region_opts(p)
        if name == "fixed-residual":
            p.add_argument("--tol", type=float, default=transfer.FIXED_TOL)
        if name == "invariant-mass":
            p.add_argument("--sector", type=float, nargs=4, default=[1.0, 2.0, 0.0, 2 * math.pi], metavar=("R_IN", "R_OUT", "TH0", "TH1"))
            p.add_argument("--center", type=C, default=0j)
            p.add_argument("--rtol", type=float, default=1e-9)
            p.add_argument("--max-panels", type=int, default=32)

    p = add("summability", cmd_summability, "summability series of a critical orbit")
    _map_opts(p)
    p.add_argument("--c", type=C, default=0j, help="critical point (default 0)")
    p.add_argument("--N", type=int, default=40)

    p = add("omega-limit", cmd_omega_limit, "orbit tail cloud with box counts")
    _map_opts(p)
    p.add_argument("--x", type=C, required=True)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--keep", type=int, default=5000)
    p.add_argument("--scales", type=float, nargs=2, default=[0.1, 0.01])

    p = add("transversality", cmd_transversality, "quotient sequence vs series for a one-parameter family")
    p.add_argument("--family", required=True, help="family JSON: {\"base\", \"direction\"} or {\"unicritical\": d}")
    p.add_argument("--v0", type=C, default=None, help="base parameter shift")
    p.add_argument("--crit", type=C, default=0j, help="critical point (default 0)")
    p.add_argument("--mmax", type=int, default=40)
    p.add_argument("--rtol", type=float, default=transversal.CONVERGENCE_RTOL)

    p = add("l-matrix", cmd_l_matrix, "matrix of transversality limits and its numerical rank")
    p.add_argument("--family", action="append", required=True, help="family JSON (repeatable; columns)")
    p.add_argument("--crit", type=C, action="append", help="critical point (repeatable; rows; default 0)")
    p.add_argument("--v0", type=C, default=None)
    p.add_argument("--mmax", type=int, default=40)

    p = add("herman-eigenspace", cmd_herman_eigenspace, "Laurent indices n with lambda^(n+2) = 1")
    p.add_argument("--lambda", dest="lam", type=C, default=hermanmodel.GOLDEN_LAMBDA)
    p.add_argument("--rotation", help="rotation number as a fraction p/q (overrides --lambda)")
    p.add_argument("--N", type=int, default=50)

    p = add("herman-verify", cmd_herman_verify, "build the boundary measure of an annulus model and check it")
    p.add_argument("--model", required=True)
    p.add_argument("--nodes", type=int, default=1024)
    p.add_argument("--tol", type=float, default=hermanmodel.VERIFY_TOL)
    p.set_defaults(samples=200)

    p = add("hardy", cmd_hardy, "Hardy ladder of 1/psi' near both boundary circles")
    p.add_argument("--model", required=True)

    return parser, subs


def _apply_config(argv, parser, subs):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = _load_json(args.config)
    sp = subs[args.command]
    known = {a.dest for a in sp._actions} - {"help", "config", "func"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise InputError(f"unknown config keys for {args.command}: {unknown}")
    sp.set_defaults(**cfg)
    args = parser.parse_args(argv)
    for a in sp._actions:
        if a.dest in cfg and a.type is not None and isinstance(getattr(args, a.dest), str):
            setattr(args, a.dest, a.type(getattr(args, a.dest)))
    return args


def main(argv: list[str] | None = None) -> int:
    parser, subs = build_parser()
    out_path = None
    try:
        args = _apply_config(argv, parser, subs)
        out_path = args.output
        payload, rows, fig = args.func(args)
        payload = {"command": args.command, **payload}
        text = to_csv(rows) if args.format == "csv" else dumps(payload)
        if args.figure:
            if fig is None:
                raise InputError(f"{args.command} has no figure")
            fig(args.figure)
        code = 0
    except RuelleLabError as exc:
        text = dumps({"error": {"kind": exc.kind, "detail": exc.detail}})
        code = exit_code(exc)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        text = dumps({"error": {"kind": "InputError", "detail": str(exc)}})
        code = 1
    if out_path and code == 0:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
