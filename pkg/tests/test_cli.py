"""Configuration parsing and the command-line front end."""

import json
from pathlib import Path

import pytest

from rdu_insurance.cli import contract_curve, main, menu_rows
from rdu_insurance.config import load_config, parse_config, validate_config
from rdu_insurance.errors import ConfigError
from rdu_insurance.rdu import solve

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """
[loss]
kind = "truncated_exponential"
m = 0.1
M = 10.0

[utility]
kind = "{utility}"
{utility_params}

[weighting]
kind = "tversky_kahneman"
theta = {theta}

[problem]
W0 = 15.0
rho = 0.2
{premium}
"""


def write_config(tmp_path, utility="exponential", utility_params="alpha = 0.02", theta=0.5,
                 premium="premium = 3.0", extra=""):
    path = tmp_path / "run.toml"
    path.write_text(BASE.format(utility=utility, utility_params=utility_params, theta=theta,
                                premium=premium) + extra)
    return str(path)


def test_shipped_configs_load():
    for path in CONFIGS.glob("*.toml"):
        load_config(path)


def test_unknown_key_is_config_error(tmp_path):
    cfg = write_config(tmp_path, extra="\n[oracle]\nenabled = true\nsize = 3\n")
    with pytest.raises(ConfigError):
        load_config(cfg)
    assert main(["validate", "--config", cfg]) == 2


def test_unknown_table_and_kind(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, extra="\n[extra]\nx = 1\n"))
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, utility="quadratic", utility_params=""))


def test_missing_field_exit_2(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[loss]\nkind = "truncated_exponential"\nm = 0.1\n')
    assert main(["validate", "--config", str(path)]) == 2


def test_solvency_checked_at_load(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, utility="log", utility_params="", premium="premium = 6.0"))


def test_validate_exit_codes(tmp_path, capsys):
    assert main(["validate", "--config", write_config(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[WARN] solvency" in out
    assert main(["validate", "--config", write_config(tmp_path, theta=0.2)]) == 1
    assert "[FAIL] T strictly increasing" in capsys.readouterr().out


def test_landmarks_command(tmp_path, capsys):
    assert main(["landmarks", "--config", write_config(tmp_path), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["a"] == pytest.approx(0.0672432345, abs=1e-9)
    assert {"l_Delta", "K_Delta", "pi_hat"} <= set(doc)


def test_solve_csv_and_invariants(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["solve", "--config", write_config(tmp_path), "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "x,indemnity,retention,quantile_z"
    rows = [list(map(float, line.split(","))) for line in lines[1:]]
    assert len(rows) >= 501
    for (x0, i0, r0, _), (x1, i1, r1, _) in zip(rows, rows[1:]):
        dx = x1 - x0
        assert dx > 0
        assert -1e-11 <= i1 - i0 <= dx + 1e-11
        assert -1e-11 <= r1 - r0 <= dx + 1e-11


def test_curve_contains_breakpoints(problem, cara, tk05, loss):
    sol = solve(problem(4.0), cara, tk05, loss)
    curve = contract_curve(sol, loss, 11)
    x_lo, x_hi = sol.contract.breakpoints(loss)
    assert x_lo in curve.x and x_hi in curve.x


def test_solve_json_with_oracle(tmp_path):
    out = tmp_path / "curve.json"
    cfg = write_config(tmp_path, utility="identity", utility_params="", premium="premium = 4.0")
    assert main(["solve", "--config", cfg, "--format", "json", "--oracle", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["regime"] == "threefold"
    assert doc["diagnostics"]["f(d)"] == pytest.approx(doc["diagnostics"]["f(e)"], abs=1e-10)
    assert doc["oracle"]["passed"] is True
    assert {"thresholds", "lambda_star", "residuals", "landmarks", "version"} <= set(doc)


def test_full_cover_curve(tmp_path):
    out = tmp_path / "full.csv"
    assert main(["solve", "--config", write_config(tmp_path, premium="premium = 5.1"), "--out", str(out)]) == 0
    for line in out.read_text().splitlines()[1:]:
        x, i, r, _ = map(float, line.split(","))
        assert i == x and r == 0


def test_solve_rejects_grid(tmp_path):
    cfg = write_config(tmp_path, premium="premium_grid = [1.0, 2.0]")
    assert main(["solve", "--config", cfg]) == 2


def test_menu_rows_match_solve(tmp_path, problem, cara, tk05, loss):
    cfg = load_config(write_config(tmp_path, premium="premium_grid = [0.1, 3.0, 4.0, 5.1]"))
    rows = menu_rows(cfg, threads=3)
    assert [r["regime"] for r in rows] == ["deductible", "deductible", "threefold", "full"]
    for row in rows:
        sol = solve(problem(row["premium"]), cara, tk05, loss)
        assert row["lower"] == sol.contract.lower and row["upper"] == sol.contract.upper


def test_menu_thread_count_invariance(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, premium="premium_grid = [0.5, 3.0, 3.5, 4.0, 4.5, 5.1]")
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("RDU_INSURANCE_THREADS", threads)
        out = tmp_path / f"menu{threads}.csv"
        assert main(["menu", "--config", cfg, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_menu_boundary_flag_at_pi_c(tmp_path):
    from rdu_insurance.yaari import pi_c
    cfg0 = load_config(write_config(tmp_path, utility="identity", utility_params=""))
    pc = pi_c(cfg0.weighting, cfg0.loss, cfg0.rho)
    cfg = load_config(write_config(tmp_path, utility="identity", utility_params="",
                                   premium=f"premium_grid = [{pc!r}, 4.0]"))
    rows = menu_rows(cfg, threads=1)
    assert rows[0]["boundary"] is True and rows[1]["boundary"] is False


def test_empty_grid_exit_2(tmp_path):
    assert main(["menu", "--config", write_config(tmp_path, premium="premium_grid = []")]) == 2


def test_bad_thread_env_exit_2(tmp_path, monkeypatch):
    monkeypatch.setenv("RDU_INSURANCE_THREADS", "zero")
    assert main(["menu", "--config", write_config(tmp_path, premium="premium_grid = [3.0]")]) == 2


def test_validate_config_report_lists_all_groups(tmp_path):
    rep = validate_config(load_config(write_config(tmp_path)))
    names = [c.name for c in rep.clauses]
    assert any("theta" in n for n in names)
    assert any("Q(F(x))" in n for n in names)
    assert any("A_T" in n for n in names)


def test_parse_rejects_both_premium_forms():
    doc = {"loss": {"kind": "truncated_exponential", "m": 0.1, "M": 10.0},
           "utility": {"kind": "identity"}, "weighting": {"kind": "tversky_kahneman", "theta": 0.5},
           "problem": {"W0": 15.0, "rho": 0.2, "premium": 3.0, "premium_grid": [3.0]}}
    with pytest.raises(ConfigError):
        parse_config(doc)
