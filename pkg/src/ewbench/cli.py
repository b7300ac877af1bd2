"""Command-line driver.

Subcommands:

  verify  build a catalog structure and check its defining equations
  lift    build a four-dimensional lift and check the field equations
  limit   track a lift family toward its large-ell limit form
  eval    evaluate a text expression and its derivatives at a point

Configuration comes from flags or a JSON file (flags override).  Reports
are JSON with a fixed key order and a ``schema`` version; for a fixed
configuration and seed they are byte-identical apart from wall time.
Exit codes: 0 all checks pass, 1 a check fails, 2 configuration problem,
3 sampling or guard problem.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import expr as ex
from . import families as fam
from . import jets
from . import lift as lift_mod
from .curv import (
    em_residual,
    f_squared,
    kretschmann,
    maxwell_residual,
    weyl_ricci_residual,
)
from .errors import (
    ConfigError,
    DomainError,
    EwbenchError,
    GuardViolationError,
    SamplingExhaustedError,
    SingularFrameError,
    SingularMetricError,
)
from .ew import (
    from_H,
    gauge_transform,
    gt_residual,
    hypercr_residual,
    monopole_residual,
    psi_residual,
)
from .jets import ChartPoint, Guard, SampleDomain, sample
from .report import CheckResult, build_report, report_json, run_check

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_SAMPLING = 3

CHECK_NAMES = (
    "gt",
    "monopole",
    "hypercr",
    "psi",
    "weyl",
    "em",
    "maxwell",
    "invariants",
    "limit",
)

# merged configuration, in report echo order
DEFAULTS = {
    "command": None,
    "case": None,
    "ell": None,
    "ell_used": None,
    "sign_fixed": False,
    "checks": None,
    "points": None,
    "seed": 7,
    "tol": None,
    "beta": None,
    "F": None,
    "K": None,
    "H": None,
    "A": None,
    "B": None,
    "c": 0.0,
    "f": None,
    "ells": None,
    "chart": "p",
    "out": None,
}

_EXPR_FLAGS = ("beta", "F", "K", "H", "A", "B", "f")


def make_parser():
    ap = argparse.ArgumentParser(
        prog="ewbench",
        description="numerical workbench for dispersionless integrable "
        "geometries and their cosmological lifts",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--case", help="catalog case name")
        p.add_argument("--ell", type=float, help="scale parameter")
        p.add_argument("--checks", help="comma-separated check names")
        p.add_argument("--points", type=int, help="sample size")
        p.add_argument("--seed", type=int, help="sampling seed")
        p.add_argument("--tol", type=float, help="residual tolerance")
        for name in _EXPR_FLAGS:
            p.add_argument(f"--{name}", help=f"expression for {name}")
        p.add_argument("--c", type=float, help="psi = c*omega coefficient")
        p.add_argument("--ells", help="comma-separated ell sequence (limit)")
        p.add_argument("--chart", choices=("alpha", "p"), help="fibre chart")
        p.add_argument("--out", help="also write the report to this path")
        p.add_argument("--config", help="JSON file with the same keys")

    for name, blurb in (
        ("verify", "check a structure's defining equations"),
        ("lift", "check the lifted field equations"),
        ("limit", "study the large-ell limit of a lift family"),
    ):
        common(sub.add_parser(name, help=blurb))

    pe = sub.add_parser("eval", help="evaluate an expression at a point")
    pe.add_argument("--expr", required=True, help="expression text")
    pe.add_argument("--at", required=True, help="point, e.g. x=1,y=3,t=2")
    pe.add_argument("--order", type=int, default=1, help="jet order (0..3)")
    pe.add_argument("--out", help="also write the result to this path")
    return ap


def merge_config(args):
    """defaults <- JSON config file <- explicit flags."""
    cfg = dict(DEFAULTS)
    cfg["command"] = args.command
    path = getattr(args, "config", None)
    if path:
        with open(path, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, val in loaded.items():
            if key not in DEFAULTS or key in ("command", "ell_used", "sign_fixed"):
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = val
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["tol"] is not None and not cfg["tol"] > 0:
        raise ConfigError("tol must be positive")
    if cfg["points"] is not None and cfg["points"] < 1:
        raise ConfigError("points must be at least 1")
    return cfg


def parse_checks(cfg, default):
    raw = cfg["checks"] or default
    names = tuple(s.strip() for s in raw.split(",") if s.strip())
    for n in names:
        if n not in CHECK_NAMES:
            raise ConfigError(f"unknown check {n!r}")
    if not names:
        raise ConfigError("no checks requested")
    return names


def _expr_or(cfg, key, fallback):
    return cfg[key] if cfg[key] is not None else fallback


def build_case(cfg):
    """Catalog structure plus its pinned sampling domain."""
    case = cfg["case"]
    if case is None:
        raise ConfigError("--case is required")
    seed, count = cfg["seed"], cfg["points"] or 200
    ell = cfg["ell"] if cfg["ell"] is not None else 1.0
    key = case.replace("-", "_")
    if key == "heisenberg":
        s = fam.heisenberg(ell)
        dom = fam.default_domain("heisenberg", seed=seed, count=count)
    elif key == "class_a":
        beta = _expr_or(cfg, "beta", fam.CLASS_A_BETAS[0])
        s = fam.class_a(beta)
        dom = fam.default_domain("class_a", seed=seed, count=count, beta=beta)
    elif key == "class_b":
        F = _expr_or(cfg, "F", "1")
        s = fam.class_b(F)
        dom = fam.default_domain("class_b", seed=seed, count=count, F=F)
    elif key == "class_c":
        K = _expr_or(cfg, "K", "s")
        s = fam.class_c(K)
        dom = fam.default_domain("class_c", seed=seed, count=count, K=K)
    elif key == "from_H":
        H = _expr_or(cfg, "H", "1/sqrt(y^2-4*x*t)")
        s = from_H(ex.parse_field(H, ("x", "y", "t")))
        dom = fam.default_domain("from_H", seed=seed, count=count, H=H)
    elif key == "from_G":
        A = _expr_or(cfg, "A", "p*ln(p)-p")
        B = _expr_or(cfg, "B", "0")
        gen = fam.GeneratorG(A, B)
        s = fam.from_generator(gen)
        a_pp = gen.a_field().d("p").d("p")
        dom = SampleDomain(
            ("p", "y", "t"),
            ((0.5, 2.0), (-1.0, 1.0), (0.3, 1.5)),
            (Guard(a_pp * a_pp, 1e-6, "G_pp^2 > 1e-6"),),
            seed,
            count,
        )
    else:
        raise ConfigError(f"unknown case {case!r}")
    return s, dom


def _verify_fns(s, cfg, names):
    fns = {}
    for name in names:
        if name == "gt":
            fns[name] = lambda q: float(np.abs(gt_residual(s, q)).max())
        elif name == "monopole":
            fns[name] = lambda q: float(np.abs(monopole_residual(s, q)).max())
        elif name == "hypercr":
            if s.u is None or s.w is None:
                raise ConfigError(
                    "hypercr check needs the hydrodynamic pair (u, w), "
                    "which this structure does not carry"
                )
            fns[name] = lambda q: max(abs(v) for v in hypercr_residual(s.u, s.w, q))
        elif name == "psi":
            psi = fam.psi_const(s, cfg["c"])
            fns[name] = lambda q, _p=psi: float(
                np.abs(psi_residual(_p, s, q)).max()
            )
        elif name == "weyl":
            fns[name] = lambda q: float(np.abs(weyl_ricci_residual(s, q)).max())
        else:
            raise ConfigError(f"check {name!r} is not available under verify")
    return fns


def cmd_verify(cfg):
    names = parse_checks(cfg, "gt,monopole")
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-7
    s, dom = build_case(cfg)
    if cfg["f"]:
        s = gauge_transform(s, ex.parse_field(cfg["f"], s.chart))
    pts = sample(dom)
    fns = _verify_fns(s, cfg, names)
    results = [run_check(n, fns[n], pts, tol) for n in names]
    report = build_report(_echo(cfg), s.chart, len(pts), results)
    return report


def _fibre_values(chart, seed, count):
    rng = np.random.default_rng(seed + 101)
    if chart == "alpha":
        lo, hi = lift_mod.ALPHA_WINDOW
        return rng.uniform(lo, hi, size=count)
    return rng.uniform(-1.2, 1.2, size=count)


def _lift_data(cfg):
    """Base structure, lift config, and lifted data for both charts."""
    base, dom = build_case(cfg)
    base_pts = sample(dom)
    probe = base_pts[0]
    requested = cfg["ell"]
    if requested is None:
        v = base.V(probe, 0).value
        if abs(v) < 1e-12:
            raise ConfigError("V = 0 at the probe; supply --ell explicitly")
        ell_used, flipped = -2.0 / v, False
    else:
        ell_used, flipped = lift_mod.fix_ell_sign(base, requested, probe)
    psi = fam.psi_const(base, cfg["c"])
    lcfg = lift_mod.LiftConfig(
        base=base,
        psi=psi,
        ell=ell_used,
        c=cfg["c"],
        chart=cfg["chart"],
        probes=tuple(base_pts[: min(8, len(base_pts))]),
    )
    cfg["ell_used"] = ell_used
    cfg["sign_fixed"] = flipped
    return base, base_pts, lcfg


def cmd_lift(cfg):
    names = parse_checks(cfg, "em,maxwell")
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-6
    cfg["points"] = cfg["points"] or 100
    base, base_pts, lcfg = _lift_data(cfg)
    data = lift_mod.build(lcfg)
    fibres = _fibre_values(cfg["chart"], cfg["seed"], len(base_pts))
    pts4 = tuple(
        ChartPoint.make(data.chart, (fv,) + q.coords)
        for fv, q in zip(fibres, base_pts)
    )
    results = []
    for name in names:
        if name == "em":
            fn = lambda q: float(
                np.abs(em_residual(data.g, data.potential, data.ell, q)).max()
            )
            results.append(run_check(name, fn, pts4, tol))
        elif name == "maxwell":
            fn = lambda q: float(
                np.abs(maxwell_residual(data.potential, data.g, q)).max()
            )
            results.append(run_check(name, fn, pts4, tol))
        elif name == "invariants":
            results.append(
                run_check(name, _invariant_fn(lcfg), _p_chart_points(cfg, base_pts), tol)
            )
        elif name in ("gt", "monopole", "psi", "weyl", "hypercr"):
            fn = _verify_fns(base, cfg, (name,))[name]
            results.append(run_check(name, fn, base_pts, tol))
        else:
            raise ConfigError(f"check {name!r} is not available under lift")
    report = build_report(_echo(cfg), data.chart, len(pts4), results)
    return report


def _p_chart_points(cfg, base_pts):
    fibres = _fibre_values("p", cfg["seed"], len(base_pts))
    name = "p" if "p" not in base_pts[0].chart else "q"
    chart = (name,) + base_pts[0].chart
    return tuple(
        ChartPoint.make(chart, (fv,) + q.coords)
        for fv, q in zip(fibres, base_pts)
    )


def _invariant_fn(lcfg):
    """Chart covariance of the scalar invariants, plus signature."""
    data_p = lift_mod.build_p(lcfg)
    data_a = lift_mod.build_alpha(lcfg)

    def fn(q):
        qa = lift_mod.matched_alpha_point(q, data_p.ell)
        dev = abs(kretschmann(data_p.g, q) - kretschmann(data_a.g, qa))
        dev = max(
            dev,
            abs(
                f_squared(data_p.potential, data_p.g, q)
                - f_squared(data_a.potential, data_a.g, qa)
            ),
        )
        if data_p.g.signature_at(q) != (3, 1):
            dev = max(dev, 1.0)
        return dev

    return fn


def cmd_limit(cfg):
    parse_checks(cfg, "limit")
    tol = cfg["tol"] if cfg["tol"] is not None else 1e-6
    case = (cfg["case"] or "heisenberg").replace("-", "_")
    c = cfg["c"]
    raw = cfg["ells"] or "100,200,1000,10000"
    if isinstance(raw, str):
        ells = [float(s) for s in raw.split(",") if s.strip()]
    else:
        ells = [float(v) for v in raw]

    if case == "heisenberg":

        def factory(e):
            base = fam.heisenberg(e)
            ell_used, _ = lift_mod.fix_ell_sign(base, e)
            return lift_mod.LiftConfig(
                base=base, psi=fam.psi_const(base, c), ell=ell_used, c=c
            )

    elif case == "class_b":

        def factory(e):
            base = fam.class_b(repr(e / 4.0))
            return lift_mod.LiftConfig(
                base=base, psi=fam.psi_const(base, c), ell=e, c=c
            )

    else:
        raise ConfigError(f"case {case!r} has no ell-parameterized lift family")

    rep = lift_mod.flat_limit(factory, ells)
    result = CheckResult(
        name="limit",
        max=rep["form_gap"][-1],
        mean=sum(rep["form_gap"]) / len(rep["form_gap"]),
        worst_point=(),
        tol=tol,
        failed=rep["diverges"],
    )
    chart = ("p",) + fam.heisenberg(ells[0]).chart if case == "heisenberg" else ("q", "p", "y", "t")
    report = build_report(_echo(cfg), chart, 0, [result], detail=rep)
    return report


def cmd_eval(args):
    pairs = []
    for item in args.at.split(","):
        if "=" not in item:
            raise ConfigError(f"bad coordinate assignment {item!r}")
        name, _, val = item.partition("=")
        try:
            pairs.append((name.strip(), float(val)))
        except ValueError as exc:
            raise ConfigError(f"bad coordinate value {val!r}") from exc
    chart = tuple(n for n, _ in pairs)
    coords = tuple(v for _, v in pairs)
    order = args.order
    if not 0 <= order <= jets.MAX_ORDER:
        raise ConfigError(f"order must lie in 0..{jets.MAX_ORDER}")
    ast = ex.parse(args.expr, chart)
    pt = ChartPoint.make(chart, coords)
    jet = ex.eval_jet(ast, pt, order)
    out = {
        "schema": 1,
        "expr": args.expr,
        "point": {n: v for n, v in pairs},
        "order": order,
        "value": jet.value,
    }
    if order >= 1:
        out["gradient"] = {n: jet.grad[i] for i, n in enumerate(chart)}
    if order >= 2:
        out["hessian"] = {
            n: {m: jet.hess[i, j] for j, m in enumerate(chart)}
            for i, n in enumerate(chart)
        }
    return out


def _echo(cfg):
    echo = {k: cfg[k] for k in DEFAULTS}
    return echo


def _emit(text, out_path):
    sys.stdout.write(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None):
    args = make_parser().parse_args(argv)
    started = time.monotonic()
    try:
        if args.command == "eval":
            payload = cmd_eval(args)
            _emit(json.dumps(payload, indent=2, sort_keys=False) + "\n", args.out)
            return EXIT_PASS
        cfg = merge_config(args)
        if args.command == "verify":
            report = cmd_verify(cfg)
        elif args.command == "lift":
            report = cmd_lift(cfg)
        else:
            report = cmd_limit(cfg)
    except (
        SamplingExhaustedError,
        GuardViolationError,
        DomainError,
        SingularFrameError,
        SingularMetricError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except EwbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report["wall_time_s"] = round(time.monotonic() - started, 3)
    _emit(report_json(report), cfg["out"])
    return EXIT_PASS if report["verdict"] == "pass" else EXIT_FAIL
