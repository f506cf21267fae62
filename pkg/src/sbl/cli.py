"""``sbl`` command line: ``verify | classify | integrate | surface``.

Exit codes: 0 success, 1 an identity failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from sbl.metric_chart import DegenerateMetricError, DomainError
from sbl.verify.config import SUITES, ConfigError, RunConfig, build_config, parse_tol
from sbl.verify.report import _clean

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", help="catalog metric name")
    p.add_argument("--c", type=float, help="sectional curvature for space forms")
    p.add_argument("--eps", type=float, help="perturbation size for perturbed metrics")
    p.add_argument("--s", type=float, help="sphere-bundle radius")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--backend", choices=("dual", "fd"))
    p.add_argument("--tol", action="append", help="base tolerance, or name=value (repeatable)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--config", help="file of 'key = value' lines; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbl", description="Numerical verification of sphere-bundle structure equations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run verification suites")
    _common(p)
    p.add_argument("--suites", help=f"comma list out of {','.join(SUITES)}")

    p = sub.add_parser("classify", help="Ricci type of a metric, optionally an invariant Lagrangian")
    _common(p)
    p.add_argument("--lagrangian", help="t0,t1,t2,t3")

    p = sub.add_parser("integrate", help="fibre-integral battery at a base point")
    _common(p)
    p.add_argument("--x", help="base point 'x1,x2,x3' (default: first seeded sample)")

    p = sub.add_parser("surface", help="Weingarten functional on a catalog surface")
    _common(p)
    p.add_argument("--surface", required=True)
    p.add_argument("--a", type=float, help="sphere radius")
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--branch", choices=("+", "-"))
    return parser


def _config(args) -> RunConfig:
    flags = {k: getattr(args, k, None) for k in ("metric", "c", "eps", "s", "seed", "samples", "backend", "suites", "surface", "a", "t0", "branch")}
    tol: dict = {}
    for item in args.tol or []:
        parse_tol(item, tol)
    flags["tol_overrides"] = tol
    return build_config(flags, args.config)


def _write(text: str, out: str | None) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _dump(data: dict) -> str:
    return json.dumps(_clean(data), sort_keys=True, indent=2) + "\n"


def cmd_verify(args) -> int:
    from sbl.verify import emit_report, run_verification

    report = run_verification(_config(args))
    text = emit_report(report, args.format)
    _write(text, args.out)
    return report.exit_code


def _samples(cfg: RunConfig, count: int | None = None):
    from sbl.catalog import get_metric
    from sbl.sphere_bundle import sample_bundle_points

    metric = get_metric(cfg.metric, backend=cfg.backend, **cfg.metric_params)
    Z = sample_bundle_points(metric, cfg.s, count or cfg.samples, np.random.default_rng(cfg.seed))
    return metric, Z


def cmd_classify(args) -> int:
    from sbl.eds import build_system, classify_ricci
    from sbl.lagrangian import InvariantLagrangian, lagrangian_classify

    cfg = _config(args)
    if cfg.dim != 3:
        raise ConfigError("Ricci types are defined over 3-manifolds")
    L = None
    if args.lagrangian:
        try:
            t = [float(v) for v in args.lagrangian.split(",")]
        except ValueError:
            t = []
        if len(t) != 4:
            raise ConfigError("--lagrangian expects four numbers t0,t1,t2,t3")
        L = InvariantLagrangian(*t)
    metric, Z = _samples(cfg, max(cfg.samples, 10))
    rep = classify_ricci(build_system(metric, cfg.s), Z, tol=cfg.tolerances["ricci"])
    data = {"config": cfg.echo(), "ricci": rep.as_dict()}
    if L is not None:
        lc = lagrangian_classify(L)
        data["lagrangian"] = {
            "coefficients": t,
            "discriminant": L.discriminant,
            "degenerate": lc.degenerate,
            "selfdual": lc.selfdual,
            "antiselfdual": lc.antiselfdual,
            "direct_check_agrees": lc.consistent,
        }
    if args.format == "json":
        text = _dump(data)
    else:
        r = data["ricci"]
        lines = [
            f"metric {cfg.metric} {cfg.metric_params}  s = {cfg.s}  samples = {len(Z)}",
            f"Ricci types (dρ membership): {', '.join(r['types']) or 'none'}",
            f"Ricci types (direct ∇Ric):   {', '.join(r['types_direct']) or 'none'}",
            f"constant scalar curvature: {r['csc']}   Ricci recurrent: {r['recurrent']}",
            f"max |F1| {r['max_abs_F1']:.3e}  max |F2| {r['max_F2norm']:.3e}  max |F3| {r['max_F3norm']:.3e}  max |F4| {r['max_abs_F4']:.3e}",
            f"path disagreement {r['max_path_disagreement']:.3e}  containments ok: {r['containments_ok']}",
        ]
        if "lagrangian" in data:
            lg = data["lagrangian"]
            lines.append(
                f"Lagrangian {lg['coefficients']}: degenerate {lg['degenerate']}, self-dual {lg['selfdual']}, "
                f"anti-self-dual {lg['antiselfdual']} (direct check agrees: {lg['direct_check_agrees']})"
            )
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    consistent = r_ok = rep.consistent and rep.types == rep.types_direct
    if "lagrangian" in data:
        consistent = r_ok and data["lagrangian"]["direct_check_agrees"]
    return EXIT_OK if consistent else EXIT_FAIL


def cmd_integrate(args) -> int:
    from sbl.fiber import identity_battery, pushforward_checks

    cfg = _config(args)
    if cfg.dim != 3:
        raise ConfigError("the fibre battery is defined over 3-manifolds")
    metric, Z = _samples(cfg, 1)
    if args.x:
        try:
            x = np.array([float(v) for v in args.x.split(",")])
        except ValueError:
            raise ConfigError("--x expects comma-separated numbers") from None
    else:
        x = Z[0, :3]
    rep = identity_battery(metric, cfg.s, x, tol=cfg.tolerances["fiber"])
    pf = pushforward_checks(metric, cfg.s, x)
    data = {
        "config": cfg.echo(),
        "x": rep.x,
        "norm_R2": rep.norm_R2,
        "scal": rep.scal,
        "records": [r.as_dict() for r in rep.records],
        "pushforward": pf,
    }
    if args.format == "json":
        text = _dump(data)
    else:
        lines = [
            f"metric {cfg.metric} {cfg.metric_params}  s = {cfg.s}  x = {np.round(rep.x, 6).tolist()}",
            f"|R|^2 = {rep.norm_R2:.10g}  scal = {rep.scal:.10g}",
            f"{'integral':<8} {'quadrature':>16} {'closed form':>16} {'rel err':>10}  verdict",
        ]
        for r in rep.records:
            lines.append(f"{r.name:<8} {r.computed:16.9f} {r.closed_form_value:16.9f} {r.rel_err:10.2e}  {r.verdict}")
        lines.append(f"pushforward vol_S = {pf['vol_S']:.12g} (4πs² = {pf['expected_vol']:.12g})")
        lines.append(f"pushforward θ∧α₂ = {pf['theta^alpha2']:.2e}, α₀∧α₂ = {pf['alpha0^alpha2']:.2e}")
        text = "\n".join(lines) + "\n"
    _write(text, args.out)
    ok = abs(pf["vol_S"] / pf["expected_vol"] - 1) <= cfg.tolerances["fiber_rel"]
    ok = ok and all(r.verdict == "match" for r in rep.records if r.name in ("1", "c", "c^2", "r"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_surface(args) -> int:
    from sbl.surfaces import SurfaceError, get_surface, surface_geometry, weingarten_functional

    cfg = _config(args)
    params = {"a": cfg.a} if cfg.surface in ("geodesic_sphere", "euclidean_sphere") else {}
    if cfg.surface == "geodesic_sphere" and cfg.c is not None:
        params["c"] = cfg.c
    try:
        S = get_surface(cfg.surface, **params)
        W = weingarten_functional(S, cfg.t0, cfg.branch)
    except SurfaceError as exc:
        raise ConfigError(str(exc)) from None
    G = surface_geometry(S)
    res = np.abs(W.residual)
    data = {
        "config": cfg.echo(),
        "surface": cfg.surface,
        "params": params,
        "t0": cfg.t0,
        "branch": cfg.branch,
        "ambient_curvature": W.curvature,
        "principal_curvatures": [float(np.mean(G.l1)), float(np.mean(G.l2))],
        "mean_curvature": float(np.mean(G.H)),
        "stationarity_residual_max": float(np.max(res)),
        "stationarity_residual_mean": float(np.mean(W.residual)),
        "stationary": bool(np.max(res) <= cfg.tolerances["surface"]),
        "functional": W.value,
        "functional_from_lift": W.lift_value,
        "lambda2_branch": W.lambda_branch,
        "gauss_equation_residual": G.gauss_equation_residual,
    }
    if args.format == "json":
        text = _dump(data)
    else:
        text = (
            f"surface {cfg.surface} {params} in c = {W.curvature:.6g}, t0 = {cfg.t0}, branch {cfg.branch}\n"
            f"principal curvatures ≈ {data['principal_curvatures'][0]:.10g}, {data['principal_curvatures'][1]:.10g}\n"
            f"stationarity residual K_N {cfg.branch} 2t0 H + 2t0^2: max {data['stationarity_residual_max']:.6e}"
            f" -> {'stationary' if data['stationary'] else 'not stationary'}\n"
            f"functional {W.value:.12g}   t0 * ∫ lift^*Λ₂ {W.lift_value:.12g}\n"
        )
    _write(text, args.out)
    rel = abs(W.value - W.lift_value) / max(1.0, abs(W.value))
    return EXIT_OK if rel <= cfg.tolerances["functional_rel"] and math.isfinite(W.value) else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "classify": cmd_classify, "integrate": cmd_integrate, "surface": cmd_surface}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError, DegenerateMetricError) as exc:
        print(f"sbl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
