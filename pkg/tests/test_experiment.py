import csv
from pathlib import Path

import numpy as np
import pytest

from optbp import experiment
from optbp.cli import main
from optbp.exceptions import ConfigError
from optbp.experiment import (
    ExperimentSpec,
    SummaryRow,
    apply_overrides,
    default_bundle,
    parse_config,
    parse_config_text,
    run_experiment,
    serialize_config,
    summarize,
)
from optbp.trainer import DecayedRate, FixedRate, OptimizedRate

REPO = Path(__file__).resolve().parents[1]

MINIMAL = """\
name = tiny
[run only]
rate = fixed
eta = 0.4
steps = 20
"""


def test_minimal_config():
    spec = parse_config_text(MINIMAL)
    assert spec.name == "tiny"
    assert spec.run_names == ["only"]
    cfg = spec.runs[0][1]
    assert cfg.rate == FixedRate(0.4) and cfg.steps == 20
    assert cfg.network.hidden_dim == 10


def test_defaults_before_sections_are_inherited():
    spec = parse_config_text("""
# shared by every run
hidden_dim = 7
seed = 3

[run a]
[run b]
hidden_dim = 5
rate = decayed
eta0 = 1.0
beta = 0.01
""")
    (_, a), (_, b) = spec.runs
    assert a.network.hidden_dim == 7 and b.network.hidden_dim == 5
    assert a.seed == b.seed == 3
    assert a.rate == OptimizedRate() and b.rate == DecayedRate(1.0, 0.01)


def test_duplicate_run_names_rejected():
    with pytest.raises(ConfigError, match="duplicate run name 'a'") as info:
        parse_config_text("[run a]\n[run a]\n")
    assert info.value.line == 2


@pytest.mark.parametrize("text,line,fragment", [
    ("[run a]\nbogus = 1\n", 2, "unknown key 'bogus'"),
    ("[run a]\nseed = 1\nseed = 2\n", 3, "duplicate key"),
    ("[run a]\nsteps = many\n", 2, "bad value for 'steps'"),
    ("[run a]\njust words\n", 2, "expected 'key = value'"),
    ("[rnu a]\n", 1, "malformed section"),
    ("[run a]\nname = late\n", 2, "before any [run] section"),
])
def test_parse_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text, "exp.cfg")
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith(f"exp.cfg:{line}:")


@pytest.mark.parametrize("body", ["steps = 0", "rate = fixed", "rate = sideways", "forgetting = none",
                                  "lambda_min = 0", "in_dim = 3"])
def test_invalid_run_values_rejected_at_parse_time(body):
    with pytest.raises(ConfigError):
        parse_config_text(f"[run a]\n{body}\n")


def test_no_runs_rejected():
    with pytest.raises(ConfigError, match="no \\[run"):
        parse_config_text("name = empty\n")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        parse_config(tmp_path / "absent.cfg")


@pytest.mark.parametrize("bundle", sorted(experiment.FIGURE_BUNDLES))
def test_round_trip(bundle):
    spec = default_bundle(bundle, steps=123)
    text = serialize_config(spec)
    again = parse_config_text(text)
    assert again == spec
    assert serialize_config(again) == text


def test_round_trip_every_field():
    text = """\
name = all
output_path = out/dir
emit_weights = true
warmup = 17
[run x]
hidden_dim = 3
shape_factor = 1.5
output_activation = linear
rate = optimized
forgetting = combined
lambda = 0.9
lambda1 = 0.25
s_f = 0.125
tau_f = 40
tau_f2 = 7
lambda_min = 0.05
steps = 9
seed = 11
noise_seed = 12
noise_power = 0.002
init_scale = 0.3
clamp_eta_nonnegative = yes
eta_guard = 1e-9
"""
    spec = parse_config_text(text)
    assert parse_config_text(serialize_config(spec)) == spec
    cfg = spec.runs[0][1]
    assert cfg.forgetting.tau_f2 == 7.0 and cfg.noise_seed == 12 and cfg.clamp_eta_nonnegative
    assert spec.emit_weights and spec.warmup == 17 and spec.output_path == Path("out/dir")


def test_spec_requires_runs():
    with pytest.raises(ConfigError):
        ExperimentSpec("x", ())


def test_overrides():
    spec = apply_overrides(default_bundle("figure2"), seed=9, steps=50, output_path="elsewhere")
    assert all(c.seed == 9 and c.steps == 50 for _, c in spec.runs)
    assert spec.output_path == Path("elsewhere")


def _read(path):
    return Path(path).read_bytes()


def test_figure_bundle_writes_five_csvs_and_summary(tmp_path):
    spec = default_bundle("figure2", steps=150, output_root=tmp_path)
    assert run_experiment(spec) == 0
    out = tmp_path / "figure2"
    names = sorted(p.name for p in out.glob("*.csv"))
    assert names == sorted(["fixed_0.1.csv", "fixed_0.4.csv", "fixed_1.4.csv", "decayed.csv",
                            "optimized.csv", "summary.csv"])
    with open(out / "optimized.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "eta", "lambda", "e1", "e2", "e2", "rmse", "clamped"]
    assert len(rows[0]) == 6 + 2 and len(rows) == 151
    with open(out / "summary.csv") as fh:
        summary = list(csv.reader(fh))
    assert summary[0] == list(experiment.SUMMARY_HEADER)
    final = [float(r[1]) for r in summary[1:]]
    assert final == sorted(final)


def test_rerun_is_byte_identical(tmp_path):
    spec = default_bundle("figure3", steps=100, output_root=tmp_path / "a")
    run_experiment(spec)
    run_experiment(apply_overrides(spec, output_path=tmp_path / "b"))
    for path in (tmp_path / "a").glob("*.csv"):
        assert _read(path) == _read(tmp_path / "b" / path.name), path.name


def test_parallel_matches_serial(tmp_path):
    spec = default_bundle("figure4", steps=100, output_root=tmp_path / "serial")
    run_experiment(spec, jobs=1)
    run_experiment(apply_overrides(spec, output_path=tmp_path / "parallel"), jobs=3)
    for path in (tmp_path / "serial").glob("*.csv"):
        assert _read(path) == _read(tmp_path / "parallel" / path.name), path.name


def test_divergent_run_is_recorded_without_aborting_siblings(tmp_path):
    spec = parse_config_text(f"""\
output_path = {tmp_path}
steps = 30
[run wild]
rate = fixed
eta = 1e308
[run calm]
rate = fixed
eta = 0.1
""")
    messages = []
    with np.errstate(over="ignore", invalid="ignore"):
        status = run_experiment(spec, log=messages.append)
    assert status == 1
    assert len(messages) == 1 and "wild" in messages[0]
    rows = summarize([tmp_path / "calm.csv", tmp_path / "wild.csv"], diverged={"wild"})
    assert [(r.name, r.diverged) for r in rows] == [("calm", False), ("wild", True)]
    with open(tmp_path / "summary.csv") as fh:
        assert list(csv.reader(fh))[-1][-1] == "true"


def test_emit_weights(tmp_path):
    spec = parse_config_text(f"output_path = {tmp_path}\nemit_weights = true\n[run a]\nsteps = 5\nhidden_dim = 3\n")
    run_experiment(spec)
    with open(tmp_path / "a_weights.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["matrix", "row", "col", "value"]
    assert len(rows) - 1 == 3 * 5 + 4 * 2


def _write_run(path, rmses, etas=None, clamped=None):
    etas = etas or [0.5] * len(rmses)
    clamped = clamped or [0] * len(rmses)
    with open(path, "w") as fh:
        fh.write(",".join(experiment.csv_header(2)) + "\n")
        for t, (r, eta, c) in enumerate(zip(rmses, etas, clamped)):
            fh.write(f"{t},{eta},0.9,0,0,0,{r},{c}\n")
    return path


def test_summarize_perfect_run_ranks_first(tmp_path):
    a = _write_run(tmp_path / "noisy.csv", [0.5, 0.3])
    b = _write_run(tmp_path / "perfect.csv", [0.0, 0.0])
    rows = summarize([a, b])
    assert rows[0].name == "perfect" and rows[0].final_rmse == 0.0


def test_summarize_orders_and_computes_statistics(tmp_path):
    second = _write_run(tmp_path / "second.csv", [0.3, 0.2], etas=[1.0, 3.0], clamped=[1, 1])
    first = _write_run(tmp_path / "first.csv", [0.3, 0.1], etas=[-1.0, 2.0], clamped=[0, 1])
    rows = summarize([second, first])
    assert [r.name for r in rows] == ["first", "second"]
    assert rows[0] == SummaryRow("first", 0.1, -1.0, 2.0, 0.5, 1, False)
    assert summarize([first], warmup=1)[0].min_eta == 2.0


@pytest.mark.parametrize("content,line", [
    ("t,eta\n", 1),
    ("", 1),
    (",".join(experiment.csv_header(2)) + "\n0,1,1,0,0,0,0,0\n1,1,1,0,0\n", 3),
    (",".join(experiment.csv_header(2)) + "\n0,x,1,0,0,0,0,0\n", 2),
])
def test_summarize_malformed_csv_names_file_and_line(tmp_path, content, line):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(ConfigError) as info:
        summarize([path])
    assert info.value.line == line
    assert "bad.csv" in str(info.value)


def test_summarize_rejects_summary_file(tmp_path):
    path = tmp_path / "summary.csv"
    experiment.write_summary(path, [])
    with pytest.raises(ConfigError, match="summary file"):
        summarize([path])


def test_cli_run_and_summarize(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(MINIMAL + "\n[run other]\nrate = optimized\nsteps = 20\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "res"), "--steps", "40", "--seed", "3"]) == 0
    with open(tmp_path / "res" / "only.csv") as fh:
        assert sum(1 for _ in fh) == 41
    capsys.readouterr()
    assert main(["summarize", str(tmp_path / "res" / "only.csv"), str(tmp_path / "res" / "other.csv")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == ",".join(experiment.SUMMARY_HEADER) and len(out) == 3


def test_cli_reports_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[run a]\nwhat = 1\n")
    assert main(["run", str(cfg)]) == 2
    assert "bad.cfg:2: unknown key 'what'" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "nope.cfg")]) == 2
    assert main(["run", str(cfg), "--steps", "0"]) == 2
    assert main(["bundle", "figure9", "--out", str(tmp_path)]) == 2


def test_cli_bundle_writes_parseable_configs(tmp_path):
    assert main(["bundle", "--out", str(tmp_path), "--steps", "77"]) == 0
    for name in experiment.FIGURE_BUNDLES:
        spec = parse_config(tmp_path / f"{name}.cfg")
        assert spec == default_bundle(name, steps=77)


def test_readme_config_example_parses():
    text = (REPO / "README.md").read_text()
    block = text.split("```ini\n", 1)[1].split("```", 1)[0]
    spec = parse_config_text(block, "README.md")
    assert spec.run_names == ["fixed_0.4", "optimized"]
    assert all(c.network.hidden_dim == 20 and c.forgetting.lambda_fixed == 0.001 for _, c in spec.runs)


@pytest.mark.parametrize("name", sorted(experiment.FIGURE_BUNDLES))
def test_shipped_configs_match_default_bundles(name):
    assert parse_config(REPO / "configs" / f"{name}.cfg") == default_bundle(name)
