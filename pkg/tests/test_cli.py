import csv
import json
from pathlib import Path

import pytest

from influence_market.cli import main, menu_from_payload
from influence_market.distributions import Uniform
from influence_market.oracle import verify_menu

REPO_CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BALANCED_CFG = {
    "environment": {"mu_low": 0.25, "mu_prior": 0.5, "mu_high": 2.0 / 3.0},
    "distribution": {"kind": "uniform", "params": {"low": 0.0, "high": 1.5}},
}
UNBALANCED_CFG = {
    "environment": {"mu_low": 0.25, "mu_prior": 0.3, "mu_high": 2.0 / 3.0},
    "distribution": {"kind": "uniform", "params": {"low": 0.0, "high": 1.5}},
    "coercion": True,
}


def write_cfg(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run(command, cfg_path, out_dir, *extra):
    return main([command, "--config", cfg_path, "--out", str(out_dir), *extra])


def test_solve_writes_menu_and_utility(tmp_path):
    cfg = write_cfg(tmp_path, BALANCED_CFG)
    assert run("solve", cfg, tmp_path / "out") == 0
    menu = json.loads((tmp_path / "out" / "menu.json").read_text())
    assert menu["classification"] == "balanced"
    assert menu["revenue"] == pytest.approx(43.0 / 72.0, abs=1e-9)
    assert [s["label"] for s in menu["segments"]] == ["L*", "eq", "R*"]
    assert menu["thresholds"]["theta_star"] == pytest.approx(0.25, abs=1e-9)
    assert menu["thresholds"]["mirrored"] is False

    with open(tmp_path / "out" / "utility.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 500
    assert float(rows[0]["indirect_utility"]) == pytest.approx(1.0 / 12.0, abs=1e-9)
    assert float(rows[0]["wtp"]) == pytest.approx(2.0 / 3.0, abs=1e-9)


def test_solve_round_trip_reverifies(tmp_path):
    cfg = write_cfg(tmp_path, UNBALANCED_CFG)
    assert run("solve", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "menu.json").read_text())
    env, menu = menu_from_payload(payload)
    report = verify_menu(env, Uniform(0.0, 1.5), menu, grid_size=400)
    # floats are serialized to 12 significant digits, so this passes at 1e-9
    assert report.ok(1e-9, 1e-9)


def test_solve_is_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, UNBALANCED_CFG)
    assert run("solve", cfg, tmp_path / "a") == 0
    assert run("solve", cfg, tmp_path / "b") == 0
    assert (tmp_path / "a" / "menu.json").read_bytes() == (
        tmp_path / "b" / "menu.json"
    ).read_bytes()
    assert (tmp_path / "a" / "utility.csv").read_bytes() == (
        tmp_path / "b" / "utility.csv"
    ).read_bytes()


def test_verify_reports_clean_menu(tmp_path):
    cfg = write_cfg(tmp_path, BALANCED_CFG)
    assert run("verify", cfg, tmp_path / "out", "--grid", "300") == 0
    report = json.loads((tmp_path / "out" / "violations.json").read_text())
    assert report["ok"] is True
    assert report["grid_size"] == 300
    assert report["worst_ic_violation"] <= 1e-9
    assert report["mon_ok"] and report["implementability_ok"]


def test_oracle_command_certifies(tmp_path):
    cfg = write_cfg(tmp_path, BALANCED_CFG)
    assert run("oracle", cfg, tmp_path / "out", "--oracle-n", "25") == 0
    payload = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert payload["oracle_n"] == 25
    assert payload["revenue"] == pytest.approx(0.6036666667, abs=1e-8)
    assert payload["gap"]["within_tolerance"] is True
    assert payload["gap"]["abs_gap_analytic"] <= 0.01
    assert len(payload["allocation"]) == 25


def test_oracle_command_with_coercion(tmp_path):
    cfg = write_cfg(tmp_path, UNBALANCED_CFG)
    assert run("oracle", cfg, tmp_path / "out", "--oracle-n", "25") == 0
    payload = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert payload["coercion"] is True
    assert payload["revenue"] == pytest.approx(0.4855733333, abs=1e-8)
    assert payload["outside_option"]["q_L"] == pytest.approx(0.1, abs=1e-7)


def test_coerce_command(tmp_path):
    cfg = write_cfg(tmp_path, UNBALANCED_CFG)
    assert run("coerce", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "coercion.json").read_text())
    assert payload["flag"] == "constructed"
    assert payload["outside_option"] == {"q_L": 0.1, "q_R": 0}
    assert payload["revenue_gain"] == pytest.approx(0.0458333333, abs=1e-8)
    assert payload["prices"] == pytest.approx([0.6416666667, 0.45], abs=1e-8)


def test_access_command(tmp_path):
    cfg = write_cfg(tmp_path, UNBALANCED_CFG)
    assert run("access", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "access.json").read_text())
    assert payload["price"] == pytest.approx(0.4, abs=1e-8)
    assert payload["revenue"] == pytest.approx(0.4, abs=1e-8)
    (interval,) = payload["buying_set"]
    assert interval == pytest.approx([0.0, 1.5], abs=1e-8)


def test_welfare_command(tmp_path):
    cfg = write_cfg(tmp_path, UNBALANCED_CFG)
    assert run("welfare", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "welfare.json").read_text())
    assert payload["screening_welfare"] == pytest.approx(0.1078703704, abs=1e-8)
    assert payload["unmediated_welfare"] == pytest.approx(0.0990740741, abs=1e-8)
    assert payload["coercive_welfare"] == pytest.approx(0.1182870370, abs=1e-8)
    assert len(payload["screening"]["segments"]) == 3


def test_welfare_command_balanced_has_no_coercive_block(tmp_path):
    cfg = write_cfg(tmp_path, BALANCED_CFG)
    assert run("welfare", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "welfare.json").read_text())
    assert payload["coercive_welfare"] is None
    assert payload["coercive"] is None
    assert payload["screening_welfare"] == pytest.approx(5.0 / 27.0, abs=1e-9)


def test_sweep_command_orders_rows(tmp_path):
    cfg = dict(UNBALANCED_CFG)
    cfg["sweep"] = {
        "parameter": "mu_prior",
        "start": 0.32,
        "stop": 0.28,
        "count": 5,
        "workers": 2,
    }
    path = write_cfg(tmp_path, cfg)
    assert run("sweep", path, tmp_path / "out") == 0
    with open(tmp_path / "out" / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 5
    values = [float(r["value"]) for r in rows]
    assert values == sorted(values)
    assert all(r["classification"] == "unbalanced" for r in rows)
    assert all(r["parameter"] == "mu_prior" for r in rows)
    # revenue grows with the prior in the unbalanced shape
    revenues = [float(r["revenue"]) for r in rows]
    assert revenues == sorted(revenues)
    # thresholds do not move with the prior
    assert len({r["theta_star"] for r in rows}) == 1


def test_sweep_requires_block(tmp_path):
    cfg = write_cfg(tmp_path, BALANCED_CFG)
    assert run("sweep", cfg, tmp_path / "out") == 2


def test_figures_command(tmp_path):
    cfg = write_cfg(tmp_path, UNBALANCED_CFG)
    assert run("figures", cfg, tmp_path / "out") == 0
    manifest = json.loads((tmp_path / "out" / "figures.json").read_text())
    assert manifest["skipped"] == []
    for name in manifest["written"]:
        assert (tmp_path / "out" / name).exists()
    png = (tmp_path / "out" / "fig_wtp.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    with open(tmp_path / "out" / "fig_coercion.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 201


def test_figures_skips_coercion_when_balanced(tmp_path):
    cfg = write_cfg(tmp_path, BALANCED_CFG)
    assert run("figures", cfg, tmp_path / "out") == 0
    manifest = json.loads((tmp_path / "out" / "figures.json").read_text())
    assert not (tmp_path / "out" / "fig_coercion.csv").exists()
    assert any("inapplicable" in s["reason"] for s in manifest["skipped"])
    assert (tmp_path / "out" / "fig_prior_shift.csv").exists()


def test_config_errors_exit_2(tmp_path, capsys):
    bad = dict(BALANCED_CFG)
    bad["distribution"] = {"kind": "uniform", "params": {"low": 0.0, "hig": 1.5}}
    cfg = write_cfg(tmp_path, bad)
    assert run("solve", cfg, tmp_path / "out") == 2
    err = capsys.readouterr().err
    assert "config.distribution.params" in err

    assert main(["solve", "--config", str(tmp_path / "missing.json"), "--out", "x"]) == 2


def test_out_of_scope_exits_3(tmp_path, capsys):
    wide = dict(BALANCED_CFG)
    wide["distribution"] = {"kind": "uniform", "params": {"low": 0.0, "high": 3.0}}
    cfg = write_cfg(tmp_path, wide)
    assert run("solve", cfg, tmp_path / "out") == 3
    assert "out of scope" in capsys.readouterr().err


def test_seed_flag_is_accepted(tmp_path):
    cfg = write_cfg(tmp_path, BALANCED_CFG)
    assert run("access", cfg, tmp_path / "out", "--seed", "7") == 0


def test_repo_sample_configs_work(tmp_path):
    assert run("solve", str(REPO_CONFIGS / "balanced.json"), tmp_path / "b") == 0
    assert run("solve", str(REPO_CONFIGS / "unbalanced.json"), tmp_path / "u") == 0
    menu = json.loads((tmp_path / "u" / "menu.json").read_text())
    assert menu["classification"] == "unbalanced"
