"""Scenario configuration: strict JSON schema with path-to-field diagnostics.

Unknown keys are rejected rather than ignored so typos cannot silently fall
back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .distributions import PiecewiseLinearCDF, TypeDistribution, Uniform
from .errors import ConfigError, DistributionError, InvalidEnvironment
from .model import Environment


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    count: int
    workers: int = 1


@dataclass(frozen=True)
class FigureSpec:
    prior_delta: float | None = None
    grid_size: int = 201


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a CLI command needs: instance, solver options, command blocks."""

    env: Environment
    dist: TypeDistribution
    distribution_payload: dict
    grid_size: int = 500
    oracle_n: int = 200
    ic_tol: float = 1e-9
    ir_tol: float = 1e-9
    oracle_gap: float = 1e-2
    coercion: bool = False
    welfare_mode: str | None = None
    sweep: SweepSpec | None = None
    figures: FigureSpec = field(default_factory=FigureSpec)


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _check_keys(data: dict, allowed: dict[str, bool], path: str) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key (allowed: {sorted(allowed)})")
    for key, required in allowed.items():
        if required and key not in data:
            raise ConfigError(f"{path}.{key}: required key missing")


def _parse_environment(data, path: str) -> Environment:
    data = _require_mapping(data, path)
    _check_keys(data, {"mu_low": True, "mu_prior": True, "mu_high": True}, path)
    try:
        return Environment(
            _number(data["mu_low"], f"{path}.mu_low"),
            _number(data["mu_prior"], f"{path}.mu_prior"),
            _number(data["mu_high"], f"{path}.mu_high"),
        )
    except InvalidEnvironment as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_distribution(data, path: str) -> TypeDistribution:
    data = _require_mapping(data, path)
    _check_keys(data, {"kind": True, "params": True}, path)
    kind = data["kind"]
    params = _require_mapping(data["params"], f"{path}.params")
    try:
        if kind == "uniform":
            _check_keys(params, {"low": True, "high": True}, f"{path}.params")
            return Uniform(
                _number(params["low"], f"{path}.params.low"),
                _number(params["high"], f"{path}.params.high"),
            )
        if kind == "piecewise_cdf":
            _check_keys(params, {"knots": True}, f"{path}.params")
            knots = params["knots"]
            if not isinstance(knots, list) or len(knots) < 2:
                raise ConfigError(f"{path}.params.knots: expected a list of >= 2 [theta, F] pairs")
            parsed = []
            for i, knot in enumerate(knots):
                if not isinstance(knot, list) or len(knot) != 2:
                    raise ConfigError(f"{path}.params.knots[{i}]: expected a [theta, F] pair")
                parsed.append(
                    (
                        _number(knot[0], f"{path}.params.knots[{i}][0]"),
                        _number(knot[1], f"{path}.params.knots[{i}][1]"),
                    )
                )
            return PiecewiseLinearCDF(tuple(parsed))
    except DistributionError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.kind: expected 'uniform' or 'piecewise_cdf', got {kind!r}")


def _parse_sweep(data, path: str) -> SweepSpec:
    data = _require_mapping(data, path)
    _check_keys(
        data,
        {"parameter": True, "start": True, "stop": True, "count": True, "workers": False},
        path,
    )
    parameter = data["parameter"]
    allowed = ("mu_prior", "mu_low", "mu_high", "theta_low", "theta_high")
    if parameter not in allowed:
        raise ConfigError(f"{path}.parameter: expected one of {allowed}, got {parameter!r}")
    count = _integer(data["count"], f"{path}.count")
    if count < 2:
        raise ConfigError(f"{path}.count: need at least 2 sweep points, got {count}")
    workers = _integer(data.get("workers", 1), f"{path}.workers")
    if workers < 1:
        raise ConfigError(f"{path}.workers: need a positive worker count, got {workers}")
    return SweepSpec(
        parameter,
        _number(data["start"], f"{path}.start"),
        _number(data["stop"], f"{path}.stop"),
        count,
        workers,
    )


def parse_config(data: dict) -> ScenarioConfig:
    data = _require_mapping(data, "config")
    _check_keys(
        data,
        {
            "environment": True,
            "distribution": True,
            "solver": False,
            "coercion": False,
            "welfare_mode": False,
            "sweep": False,
            "figures": False,
        },
        "config",
    )
    env = _parse_environment(data["environment"], "config.environment")
    dist = _parse_distribution(data["distribution"], "config.distribution")

    grid_size, oracle_n = 500, 200
    ic_tol = ir_tol = 1e-9
    oracle_gap = 1e-2
    if "solver" in data:
        solver = _require_mapping(data["solver"], "config.solver")
        _check_keys(
            solver, {"grid_size": False, "oracle_N": False, "tolerances": False}, "config.solver"
        )
        if "grid_size" in solver:
            grid_size = _integer(solver["grid_size"], "config.solver.grid_size")
            if grid_size < 2:
                raise ConfigError("config.solver.grid_size: need at least 2")
        if "oracle_N" in solver:
            oracle_n = _integer(solver["oracle_N"], "config.solver.oracle_N")
            if oracle_n < 2:
                raise ConfigError("config.solver.oracle_N: need at least 2")
        if "tolerances" in solver:
            tols = _require_mapping(solver["tolerances"], "config.solver.tolerances")
            _check_keys(
                tols, {"ic": False, "ir": False, "oracle_gap": False}, "config.solver.tolerances"
            )
            ic_tol = _number(tols.get("ic", ic_tol), "config.solver.tolerances.ic")
            ir_tol = _number(tols.get("ir", ir_tol), "config.solver.tolerances.ir")
            oracle_gap = _number(
                tols.get("oracle_gap", oracle_gap), "config.solver.tolerances.oracle_gap"
            )

    coercion = data.get("coercion", False)
    if not isinstance(coercion, bool):
        raise ConfigError(f"config.coercion: expected true/false, got {coercion!r}")

    welfare_mode = data.get("welfare_mode")
    if welfare_mode is not None and welfare_mode not in ("screening", "unmediated", "coercive"):
        raise ConfigError(
            "config.welfare_mode: expected 'screening', 'unmediated' or 'coercive', "
            f"got {welfare_mode!r}"
        )

    sweep = _parse_sweep(data["sweep"], "config.sweep") if "sweep" in data else None
    if (
        sweep is not None
        and sweep.parameter in ("theta_low", "theta_high")
        and not isinstance(dist, Uniform)
    ):
        raise ConfigError(
            "config.sweep.parameter: type-support sweeps need a uniform distribution"
        )

    figures = FigureSpec()
    if "figures" in data:
        fig = _require_mapping(data["figures"], "config.figures")
        _check_keys(fig, {"prior_delta": False, "grid_size": False}, "config.figures")
        delta = (
            _number(fig["prior_delta"], "config.figures.prior_delta")
            if "prior_delta" in fig
            else None
        )
        fgrid = _integer(fig.get("grid_size", 201), "config.figures.grid_size")
        if fgrid < 2:
            raise ConfigError("config.figures.grid_size: need at least 2")
        figures = FigureSpec(delta, fgrid)

    return ScenarioConfig(
        env=env,
        dist=dist,
        distribution_payload=dict(data["distribution"]),
        grid_size=grid_size,
        oracle_n=oracle_n,
        ic_tol=ic_tol,
        ir_tol=ir_tol,
        oracle_gap=oracle_gap,
        coercion=coercion,
        welfare_mode=welfare_mode,
        sweep=sweep,
        figures=figures,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(data)
