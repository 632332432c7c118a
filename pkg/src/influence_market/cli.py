"""Command-line interface.

Subcommands: solve, verify, oracle, coerce, access, welfare, sweep, figures.
Every command reads a strict JSON scenario config, writes deterministic
artifacts (JSON/CSV, plus PNG renders for the figures report) into --out,
and exits 0 on success, 2 on configuration errors, 3 when the instance is
outside a solver's characterized scope, 4 on internal verification failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import figures as figmod
from .config import ScenarioConfig, load_config
from .distributions import Uniform, solve_thresholds
from .errors import (
    AssumptionError,
    ConfigError,
    DistributionError,
    InternalError,
    ScopeError,
)
from .menus import (
    Menu,
    Segment,
    access_pricing,
    coercion_menu,
    comparative_statics,
    first_best,
    indirect_utility,
    optimal_menu,
    revenue,
    welfare_report,
    willingness_to_pay,
)
from .model import (
    Classification,
    Environment,
    InfluenceBundle,
    geometry,
    mirror,
    sender_value,
)
from .oracle import compare_to_oracle, discretize_instance, lp_oracle, verify_menu
from .output import write_csv, write_json


def _env_payload(env: Environment) -> dict:
    return {"mu_low": env.mu_low, "mu_prior": env.mu_prior, "mu_high": env.mu_high}


def _bundle_payload(bundle: InfluenceBundle | None) -> dict | None:
    if bundle is None:
        return None
    return {"q_L": bundle.q_L, "q_R": bundle.q_R}


def _thresholds_payload(cfg: ScenarioConfig) -> dict:
    cls = geometry(cfg.env).classification
    mirrored = cls is Classification.MIRROR_UNBALANCED
    penv, pdist = (mirror(cfg.env, cfg.dist)) if mirrored else (cfg.env, cfg.dist)
    th = solve_thresholds(pdist, penv)
    return {
        "mirrored": mirrored,
        "theta_star": th.theta_star,
        "theta_star_star_B": th.theta_star_star_B,
        "theta_star_star_U": th.theta_star_star_U,
        "theta_dagger": th.theta_dagger,
        "theta_double_dagger": th.theta_double_dagger,
    }


def _segment_payload(seg: Segment) -> dict:
    return {
        "theta_lo": seg.theta_lo,
        "theta_hi": seg.theta_hi,
        "q_L": seg.bundle.q_L,
        "q_R": seg.bundle.q_R,
        "price_intercept": seg.price_intercept,
        "price_slope": seg.price_slope,
        "label": seg.label,
    }


def menu_payload(cfg: ScenarioConfig, menu: Menu) -> dict:
    return {
        "command": "solve",
        "environment": _env_payload(cfg.env),
        "distribution": cfg.distribution_payload,
        "classification": geometry(cfg.env).classification.value,
        "kind": menu.kind,
        "theta0": menu.theta0,
        "anchor_utility": menu.anchor_utility,
        "outside_option": _bundle_payload(menu.outside_option),
        "thresholds": _thresholds_payload(cfg),
        "segments": [_segment_payload(s) for s in menu.segments],
        "revenue": revenue(menu, cfg.dist),
    }


def menu_from_payload(payload: dict) -> tuple[Environment, Menu]:
    """Rebuild a Menu from a menu.json payload (the solve round trip)."""
    envp = payload["environment"]
    env = Environment(envp["mu_low"], envp["mu_prior"], envp["mu_high"])
    segments = tuple(
        Segment(
            s["theta_lo"],
            s["theta_hi"],
            InfluenceBundle(s["q_L"], s["q_R"]),
            s["price_intercept"],
            s["price_slope"],
            s.get("label", ""),
        )
        for s in payload["segments"]
    )
    outside = payload.get("outside_option")
    return env, Menu(
        kind=payload["kind"],
        env=env,
        segments=segments,
        theta0=payload["theta0"],
        anchor_utility=payload.get("anchor_utility", 0.0),
        outside_option=None if outside is None else InfluenceBundle(outside["q_L"], outside["q_R"]),
    )


def _utility_rows(cfg: ScenarioConfig, menu: Menu, grid: int):
    for t in np.linspace(cfg.dist.theta_low, cfg.dist.theta_high, grid):
        t = float(t)
        seg = menu.segment_at(t)
        value = sender_value(seg.bundle, t)
        yield (t, value - seg.price_at(t), value)


def cmd_solve(cfg: ScenarioConfig, out: Path, grid: int) -> None:
    menu = optimal_menu(cfg.env, cfg.dist)
    write_json(out / "menu.json", menu_payload(cfg, menu))
    write_csv(out / "utility.csv", ["theta", "indirect_utility", "wtp"], _utility_rows(cfg, menu, grid))


def cmd_verify(cfg: ScenarioConfig, out: Path, grid: int) -> None:
    menu = optimal_menu(cfg.env, cfg.dist)
    report = verify_menu(cfg.env, cfg.dist, menu, grid_size=grid)
    ok = report.ok(cfg.ic_tol, cfg.ir_tol)
    write_json(
        out / "violations.json",
        {
            "command": "verify",
            "grid_size": report.grid_size,
            "worst_ic_violation": report.worst_ic_violation,
            "ic_witness": list(report.ic_witness) if report.ic_witness else None,
            "worst_ir_violation": report.worst_ir_violation,
            "ir_witness": report.ir_witness,
            "mon_ok": report.mon_ok,
            "implementability_ok": report.implementability_ok,
            "envelope_residual": report.envelope_residual,
            "ok": ok,
        },
    )
    if not ok:
        raise InternalError(
            f"menu failed verification: ic={report.worst_ic_violation:.3e}, "
            f"ir={report.worst_ir_violation:.3e}"
        )


def cmd_oracle(cfg: ScenarioConfig, out: Path, oracle_n: int) -> None:
    if cfg.coercion:
        menu = coercion_menu(cfg.env, cfg.dist).menu
    else:
        menu = optimal_menu(cfg.env, cfg.dist)
    instance = discretize_instance(cfg.dist, cfg.env, oracle_n)
    solution = lp_oracle(instance, coercion=cfg.coercion)
    comparison = compare_to_oracle(menu, instance)
    analytic = revenue(menu, cfg.dist)
    write_json(
        out / "oracle.json",
        {
            "command": "oracle",
            "oracle_n": oracle_n,
            "coercion": cfg.coercion,
            "revenue": solution.revenue,
            "outside_option": _bundle_payload(solution.outside_option),
            "allocation": [
                {"theta": t, "q_L": ql, "q_R": qr, "price": p}
                for t, ql, qr, p in zip(
                    instance.types, solution.q_L, solution.q_R, solution.prices
                )
            ],
            "gap": {
                "analytic_revenue": analytic,
                "oracle_revenue": comparison.oracle_revenue,
                "menu_revenue_on_instance": comparison.menu_revenue,
                "abs_gap_analytic": abs(solution.revenue - analytic),
                "agreement_fraction": comparison.agreement_fraction,
                "max_bundle_distance": comparison.max_bundle_distance,
                "within_tolerance": abs(solution.revenue - analytic) <= cfg.oracle_gap,
            },
        },
    )
    if abs(solution.revenue - analytic) > cfg.oracle_gap:
        raise InternalError(
            f"oracle gap {abs(solution.revenue - analytic):.4e} exceeds {cfg.oracle_gap:.1e}"
        )


def cmd_coerce(cfg: ScenarioConfig, out: Path) -> None:
    solution = coercion_menu(cfg.env, cfg.dist)
    write_json(
        out / "coercion.json",
        {
            "command": "coerce",
            "flag": solution.flag,
            "outside_option": _bundle_payload(solution.outside_option),
            "segments": [_segment_payload(s) for s in solution.menu.segments],
            "prices": [s.price for s in solution.menu.segments],
            "baseline_revenue": solution.baseline_revenue,
            "coercive_revenue": solution.coercive_revenue,
            "revenue_gain": solution.revenue_gain,
        },
    )


def cmd_access(cfg: ScenarioConfig, out: Path) -> None:
    solution = access_pricing(cfg.env, cfg.dist)
    write_json(
        out / "access.json",
        {
            "command": "access",
            "price": solution.price,
            "buying_set": [[lo, hi] for lo, hi in solution.buying_set],
            "revenue": solution.revenue,
        },
    )


def cmd_welfare(cfg: ScenarioConfig, out: Path) -> None:
    report = welfare_report(cfg.env, cfg.dist)

    def mode_block(mode):
        if mode is None:
            return None
        return {
            "total": mode.total,
            "segments": [
                {
                    "theta_lo": s.theta_lo,
                    "theta_hi": s.theta_hi,
                    "mass": s.mass,
                    "q_L": s.bundle.q_L,
                    "q_R": s.bundle.q_R,
                    "value": s.value,
                }
                for s in mode.segments
            ],
        }

    write_json(
        out / "welfare.json",
        {
            "command": "welfare",
            "mode": cfg.welfare_mode,
            "screening_welfare": report.screening_welfare,
            "unmediated_welfare": report.unmediated_welfare,
            "coercive_welfare": report.coercive_welfare,
            "screening": mode_block(report.screening),
            "unmediated": mode_block(report.unmediated),
            "coercive": mode_block(report.coercive),
        },
    )


def _rebuild(cfg: ScenarioConfig, parameter: str, value: float):
    env, dist = cfg.env, cfg.dist
    if parameter == "mu_prior":
        env = Environment(env.mu_low, value, env.mu_high)
    elif parameter == "mu_low":
        env = Environment(value, env.mu_prior, env.mu_high)
    elif parameter == "mu_high":
        env = Environment(env.mu_low, env.mu_prior, value)
    elif parameter == "theta_low":
        dist = Uniform(value, dist.theta_high)
    else:
        dist = Uniform(dist.theta_low, value)
    return env, dist


def _sweep_row(cfg: ScenarioConfig, parameter: str, value: float) -> tuple:
    env, dist = _rebuild(cfg, parameter, value)
    cls = geometry(env).classification
    mirrored = cls is Classification.MIRROR_UNBALANCED
    penv, pdist = mirror(env, dist) if mirrored else (env, dist)
    th = solve_thresholds(pdist, penv)
    menu = optimal_menu(env, dist)
    report = welfare_report(env, dist)
    return (
        parameter,
        value,
        cls.value,
        th.theta_star,
        th.theta_star_star_B,
        th.theta_star_star_U,
        menu.theta0,
        revenue(menu, dist),
        report.screening_welfare,
        report.unmediated_welfare,
    )


def cmd_sweep(cfg: ScenarioConfig, out: Path) -> None:
    spec = cfg.sweep
    if spec is None:
        raise ConfigError("config.sweep: required by the sweep command")
    values = [float(v) for v in np.linspace(spec.start, spec.stop, spec.count)]
    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(lambda v: _sweep_row(cfg, spec.parameter, v), values))
    else:
        rows = [_sweep_row(cfg, spec.parameter, v) for v in values]
    rows.sort(key=lambda r: r[1])
    write_csv(
        out / "sweep.csv",
        [
            "parameter",
            "value",
            "classification",
            "theta_star",
            "theta_star_star_B",
            "theta_star_star_U",
            "theta0",
            "revenue",
            "screening_welfare",
            "unmediated_welfare",
        ],
        rows,
    )


def _default_prior_delta(env: Environment) -> float | None:
    cls = geometry(env).classification
    room_env = env.mu_prior - env.mu_low
    if cls is Classification.BALANCED:
        return 0.5 * min(room_env, env.mu_prior - env.mu_high / 2.0)
    if cls is Classification.UNBALANCED:
        return 0.5 * room_env
    return None  # boundary or mirror shapes: any reduction changes the analysis


def cmd_figures(cfg: ScenarioConfig, out: Path) -> None:
    grid = cfg.figures.grid_size
    thetas = [float(t) for t in np.linspace(cfg.dist.theta_low, cfg.dist.theta_high, grid)]
    written: list[str] = []
    skipped: list[dict] = []

    fb = first_best(cfg.env, cfg.dist)
    wtp_rows = []
    for t in thetas:
        seg = fb.segment_at(t)
        wtp_rows.append((t, willingness_to_pay(cfg.env, cfg.dist, t), seg.label))
    write_csv(out / "fig_wtp.csv", ["theta", "wtp", "bundle"], wtp_rows)
    figmod.render_wtp(out / "fig_wtp.png", thetas, [r[1] for r in wtp_rows])
    written += ["fig_wtp.csv", "fig_wtp.png"]

    menu = optimal_menu(cfg.env, cfg.dist)
    util_rows = []
    for t in thetas:
        seg = menu.segment_at(t)
        value = sender_value(seg.bundle, t)
        price = seg.price_at(t)
        util_rows.append((t, value - price, value, price))
    write_csv(
        out / "fig_utility.csv", ["theta", "indirect_utility", "wtp", "price"], util_rows
    )
    figmod.render_utility(
        out / "fig_utility.png",
        thetas,
        [r[1] for r in util_rows],
        [r[2] for r in util_rows],
        menu.interior_knots(),
    )
    written += ["fig_utility.csv", "fig_utility.png"]

    coercion = coercion_menu(cfg.env, cfg.dist)
    if coercion.flag == "constructed":
        rows = []
        for t in thetas:
            base_u = indirect_utility(menu, t)
            co_u = indirect_utility(coercion.menu, t)
            rows.append((t, base_u, co_u, sender_value(coercion.outside_option, t)))
        write_csv(
            out / "fig_coercion.csv",
            ["theta", "utility_screening", "utility_coercive", "outside_value"],
            rows,
        )
        figmod.render_coercion(
            out / "fig_coercion.png",
            thetas,
            [r[1] for r in rows],
            [r[2] for r in rows],
            [r[3] for r in rows],
        )
        written += ["fig_coercion.csv", "fig_coercion.png"]
    else:
        skipped.append({"file": "fig_coercion.csv", "reason": f"coercion flag: {coercion.flag}"})

    delta = cfg.figures.prior_delta
    if delta is None:
        delta = _default_prior_delta(cfg.env)
    if delta is None:
        skipped.append(
            {"file": "fig_prior_shift.csv", "reason": "no in-shape prior reduction exists"}
        )
    else:
        statics = comparative_statics(cfg.env, cfg.dist, delta, grid=grid)
        shifted_menu = optimal_menu(
            Environment(cfg.env.mu_low, cfg.env.mu_prior - delta, cfg.env.mu_high), cfg.dist
        )
        rows = [
            (t, indirect_utility(menu, t), indirect_utility(shifted_menu, t), du)
            for t, du in zip(statics.thetas, statics.delta_utility)
        ]
        write_csv(
            out / "fig_prior_shift.csv",
            ["theta", "utility_base", "utility_shifted", "delta_utility"],
            rows,
        )
        figmod.render_prior_shift(
            out / "fig_prior_shift.png",
            [r[0] for r in rows],
            [r[1] for r in rows],
            [r[2] for r in rows],
        )
        written += ["fig_prior_shift.csv", "fig_prior_shift.png"]

    write_json(out / "figures.json", {"command": "figures", "written": written, "skipped": skipped})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="influence-market",
        description="Solve, price, verify and stress-test menus of persuasion experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "compute the optimal screening menu (menu.json, utility.csv)"),
        ("verify", "grid-check the solved menu's constraints (violations.json)"),
        ("oracle", "certify against the discrete LP oracle (oracle.json)"),
        ("coerce", "solve the coercive design (coercion.json)"),
        ("access", "posted-price benchmark (access.json)"),
        ("welfare", "receiver welfare comparison (welfare.json)"),
        ("sweep", "parameter sweep (sweep.csv)"),
        ("figures", "report CSV series and PNG renders"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to the scenario JSON config")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--oracle-n", type=int, default=None, help="override solver.oracle_N")
        p.add_argument("--grid", type=int, default=None, help="override solver.grid_size")
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="reserved for stochastic extensions; current commands are deterministic",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.grid is not None:
            if args.grid < 2:
                raise ConfigError("--grid: need at least 2")
            cfg = replace(cfg, grid_size=args.grid)
        if args.oracle_n is not None:
            if args.oracle_n < 2:
                raise ConfigError("--oracle-n: need at least 2")
            cfg = replace(cfg, oracle_n=args.oracle_n)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "solve":
            cmd_solve(cfg, out, cfg.grid_size)
        elif args.command == "verify":
            cmd_verify(cfg, out, cfg.grid_size)
        elif args.command == "oracle":
            cmd_oracle(cfg, out, cfg.oracle_n)
        elif args.command == "coerce":
            cmd_coerce(cfg, out)
        elif args.command == "access":
            cmd_access(cfg, out)
        elif args.command == "welfare":
            cmd_welfare(cfg, out)
        elif args.command == "sweep":
            cmd_sweep(cfg, out)
        else:
            cmd_figures(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ScopeError, AssumptionError, DistributionError, NotImplementedError) as exc:
        print(f"out of scope: {exc}", file=sys.stderr)
        return 3
    except InternalError as exc:
        print(f"internal verification failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
