"""Command-line behavior: config ingestion, outputs, exit codes, determinism."""

import json

import pytest

from versionage.cli import parse_config, parse_spec_arg, run
from versionage.distributions import Exponential, Uniform
from versionage.errors import ConfigError

CHAIN_CONFIG = {
    "nodes": ["s", "a", "b"],
    "source": "s",
    "source_dist": {"type": "exponential", "rate": 2.0},
    "links": [
        {"from": "s", "to": "a", "dist": {"type": "uniform", "lo": 0, "hi": 2}},
        {"from": "a", "to": "b", "dist": {"type": "exponential", "rate": 1.0}},
    ],
    "horizon": 60.0,
    "iterations": 50,
    "master_seed": 5,
}

DIAMOND_CONFIG = {
    "nodes": ["s", "a", "b", "c"],
    "source": "s",
    "source_dist": {"type": "exponential", "rate": 1.0},
    "links": [
        {"from": "s", "to": "a", "dist": {"type": "exponential", "rate": 1.0}},
        {"from": "s", "to": "b", "dist": {"type": "exponential", "rate": 1.0}},
        {"from": "a", "to": "c", "dist": {"type": "exponential", "rate": 1.0}},
        {"from": "b", "to": "c", "dist": {"type": "exponential", "rate": 1.0}},
    ],
}


def write_config(tmp_path, payload, name="net.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


# -- config parsing ------------------------------------------------------------

def test_parse_config_defaults():
    cfg = parse_config(json.dumps({k: v for k, v in CHAIN_CONFIG.items()
                                   if k in ("nodes", "source", "source_dist", "links")}))
    assert cfg.horizon == 1e3
    assert cfg.iterations == 20_000
    assert cfg.estimator == "terminal"
    assert cfg.targets is None
    assert cfg.network.validate().value == "path"


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda c: c.update(estimator="median"), "estimator"),
        (lambda c: c.update(horizon=-1), "horizon"),
        (lambda c: c.update(iterations=0), "iterations"),
        (lambda c: c.update(targets=["nope"]), "undeclared"),
        (lambda c: c.update(extra_field=1), "unknown fields"),
        (lambda c: c.pop("source"), "missing required"),
        (lambda c: c["links"].append(
            {"from": "s", "to": "a", "dist": {"type": "uniform", "lo": 0, "hi": 2}}
        ), "declared twice"),
        (lambda c: c["links"][0].update(dist={"type": "what"}), "unknown distribution"),
    ],
)
def test_parse_config_diagnostics(mutate, fragment):
    payload = json.loads(json.dumps(CHAIN_CONFIG))
    mutate(payload)
    with pytest.raises(ConfigError, match=fragment):
        parse_config(json.dumps(payload))


def test_parse_config_reports_json_position():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("{nope}")


def test_parse_spec_arg_forms():
    assert parse_spec_arg("exponential:rate=1") == Exponential(rate=1.0)
    assert parse_spec_arg("uniform:lo=0,hi=2") == Uniform(lo=0.0, hi=2.0)
    assert parse_spec_arg('{"type": "exponential", "rate": 2}') == Exponential(rate=2.0)
    with pytest.raises(ConfigError):
        parse_spec_arg("exponential:rate")
    with pytest.raises(ConfigError):
        parse_spec_arg("exponential:rate=fast")


# -- analytic ---------------------------------------------------------------------

def test_analytic_prints_ages(tmp_path, capsys):
    path = write_config(tmp_path, CHAIN_CONFIG)
    out_json = str(tmp_path / "report.json")
    assert run(["analytic", path, "--out", out_json]) == 0
    printed = capsys.readouterr().out
    assert "b: 3.33333" in printed  # (2/3 + 1) / 0.5
    payload = json.loads(open(out_json).read())
    assert payload["meta"]["tool"] == "versionage"
    assert payload["analytic"]["per_node"]["b"] == pytest.approx(10.0 / 3.0, rel=1e-6)
    assert payload["topology"]["source"] == "s"


def test_analytic_rejects_general_graph(tmp_path, capsys):
    path = write_config(tmp_path, DIAMOND_CONFIG)
    assert run(["analytic", path]) == 1
    assert "closed form requires tree" in capsys.readouterr().err


def test_analytic_missing_file():
    assert run(["analytic", "/nonexistent/config.json"]) == 1


# -- simulate ----------------------------------------------------------------------

def test_simulate_outputs_and_determinism(tmp_path, capsys):
    path = write_config(tmp_path, CHAIN_CONFIG)
    base1, base2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    assert run(["simulate", path, "--out", base1]) == 0
    assert run(["simulate", path, "--out", base2]) == 0
    csv1 = open(base1 + ".csv", "rb").read()
    assert csv1 == open(base2 + ".csv", "rb").read()
    assert csv1.decode().splitlines()[0] == "target,estimator,mean,stderr,iterations,horizon,seed"
    j1 = json.loads(open(base1 + ".json").read())
    assert j1 == json.loads(open(base2 + ".json").read())
    assert j1["meta"]["master_seed"] == 5
    assert set(j1["outcomes"]) == {"b"}  # default targets: leaves
    assert len(j1["outcomes"]["b"]["samples"]) == 50


def test_simulate_threads_do_not_change_output(tmp_path):
    path = write_config(tmp_path, CHAIN_CONFIG)
    base1, base2 = str(tmp_path / "t1"), str(tmp_path / "t2")
    assert run(["simulate", path, "--out", base1, "--threads", "1"]) == 0
    assert run(["simulate", path, "--out", base2, "--threads", "3"]) == 0
    assert open(base1 + ".csv", "rb").read() == open(base2 + ".csv", "rb").read()
    assert open(base1 + ".json", "rb").read() == open(base2 + ".json", "rb").read()


def test_simulate_flag_overrides(tmp_path):
    path = write_config(tmp_path, CHAIN_CONFIG)
    base = str(tmp_path / "o")
    assert run(["simulate", path, "--out", base, "--iterations", "7",
                "--targets", "a,b", "--estimator", "time_average"]) == 0
    payload = json.loads(open(base + ".json").read())
    assert set(payload["outcomes"]) == {"a", "b"}
    assert payload["outcomes"]["a"]["estimator"] == "time_average"
    assert payload["outcomes"]["a"]["iterations"] == 7


def test_simulate_works_on_general_graphs(tmp_path):
    cfg = dict(DIAMOND_CONFIG, horizon=30.0, iterations=20)
    path = write_config(tmp_path, cfg)
    base = str(tmp_path / "g")
    assert run(["simulate", path, "--out", base]) == 0
    payload = json.loads(open(base + ".json").read())
    assert set(payload["outcomes"]) == {"c"}


# -- verify -------------------------------------------------------------------------

def test_verify_single_spec_passes(tmp_path, capsys):
    out = str(tmp_path / "verify.json")
    code = run(["verify", "exponential:rate=1", "--t-grid", "5,10",
                "--t-large", "80", "--paths", "10000", "--out", out])
    printed = capsys.readouterr().out
    assert code == 0
    assert "martingale" in printed and "recurrence-limit" in printed
    assert "all checks passed" in printed
    payload = json.loads(open(out).read())
    assert all(rec["pass"] for rec in payload["checks"])


def test_verify_window_pair(capsys):
    code = run(["verify", "--window", "exponential:rate=2", "exponential:rate=1",
                "--paths", "10000", "--t-large", "100"])
    assert code == 0
    assert "windowed-count" in capsys.readouterr().out


def test_verify_lattice_alignment_fails_gate(capsys):
    # a deterministic probe on an identical deterministic source never sees a
    # renewal inside the window: the estimate is exactly 0, the target is 1/2
    code = run(["verify", "--window", "deterministic:c=1", "deterministic:c=1",
                "--paths", "10000", "--t-large", "100"])
    assert code == 2
    assert "FAIL" in capsys.readouterr().out


def test_verify_rejects_bad_spec(capsys):
    assert run(["verify", "exponential:rate=-2"]) == 1
    assert run(["verify", "pareto1:shape=1.5,scale=1"]) == 1


def test_usage_errors_exit_one():
    assert run(["sweep", "fig9"]) == 1
    assert run([]) == 1


# -- sweep -------------------------------------------------------------------------

def test_sweep_cli_reproducible(tmp_path):
    base1, base2 = str(tmp_path / "s1"), str(tmp_path / "s2")
    args = ["sweep", "fig6", "--values", "1,2", "--iterations", "200",
            "--horizon", "80", "--seed", "7"]
    assert run(args + ["--out", base1]) == 0
    assert run(args + ["--out", base2]) == 0
    assert open(base1 + ".csv", "rb").read() == open(base2 + ".csv", "rb").read()
    assert open(base1 + ".json", "rb").read() == open(base2 + ".json", "rb").read()


def test_sweep_cli_threads_identical(tmp_path):
    args = ["sweep", "fig7", "--values", "0.15,1/3", "--iterations", "150",
            "--horizon", "60", "--seed", "3"]
    base1, base2 = str(tmp_path / "p1"), str(tmp_path / "p2")
    assert run(args + ["--out", base1, "--threads", "1"]) == 0
    assert run(args + ["--out", base2, "--threads", "2"]) == 0
    assert open(base1 + ".csv", "rb").read() == open(base2 + ".csv", "rb").read()
    assert open(base1 + ".json", "rb").read() == open(base2 + ".json", "rb").read()


def test_sweep_fig5_csv_columns(tmp_path):
    base = str(tmp_path / "f5")
    assert run(["sweep", "fig5", "--values", "1/3,2/3", "--iterations", "150",
                "--horizon", "60", "--seed", "2", "--out", base]) == 0
    lines = open(base + ".csv").read().splitlines()
    assert lines[0] == "sweep_kind,param,analytic,mc_mean,mc_stderr,z,iterations,horizon,seed"
    assert len(lines) == 3
    assert lines[1].startswith("source_mean,")


def test_sweep_custom_varies_source_parameter(tmp_path):
    path = write_config(tmp_path, CHAIN_CONFIG)
    base = str(tmp_path / "c")
    assert run(["sweep", "custom", "--config", path, "--vary-source", "rate",
                "--values", "1,2", "--iterations", "100", "--horizon", "50",
                "--out", base]) == 0
    payload = json.loads(open(base + ".json").read())
    params = [p["param"] for p in payload["sweep"]["points"]]
    assert params == [1.0, 2.0]
    # analytic halves when the source slows from rate 2 to rate 1... inverse check:
    a1, a2 = (p["analytic"] for p in payload["sweep"]["points"])
    assert a2 == pytest.approx(2.0 * a1, rel=1e-12)


def test_sweep_custom_requires_flags(capsys):
    assert run(["sweep", "custom", "--values", "1,2"]) == 1
    assert "custom sweeps need" in capsys.readouterr().err


def test_values_range_syntax(tmp_path):
    from versionage.cli import _parse_values

    assert _parse_values("1..6", integer=True) == [1, 2, 3, 4, 5, 6]
    assert _parse_values("0.05,1/3") == [0.05, pytest.approx(1.0 / 3.0)]
    with pytest.raises(ConfigError):
        _parse_values("1..x", integer=True)
    base = str(tmp_path / "rng")
    assert run(["sweep", "fig6", "--values", "1..2", "--iterations", "80",
                "--horizon", "50", "--out", base]) == 0
    assert len(open(base + ".csv").read().splitlines()) == 3


def test_threads_env_var_sets_default(monkeypatch):
    from versionage.cli import build_parser

    monkeypatch.setenv("VERSIONAGE_THREADS", "3")
    args = build_parser().parse_args(["simulate", "x.json"])
    assert args.threads == 3
    monkeypatch.setenv("VERSIONAGE_THREADS", "not-a-number")
    args = build_parser().parse_args(["simulate", "x.json"])
    assert args.threads == 1
