"""Experiment specs: a small key-value config format, CSV output and summaries.

Config grammar (one statement per line)::

    # comment                  blank lines and '#' comments are ignored
    key = value                experiment key, or a run default before any section
    [run NAME]                 starts a run; following keys apply to it only

Experiment keys: ``name``, ``output_path``, ``emit_weights``, ``warmup``.
Every other key is a run key (see ``RUN_KEYS``); values given before the
first ``[run ...]`` section are inherited by all runs. Unknown keys,
duplicate keys within one block and duplicate run names are errors.
"""

import csv
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, OptBPError, TrainingDivergedError
from .forgetting import ForgettingState
from .network import NetworkConfig
from .trainer import DecayedRate, FixedRate, OptimizedRate, TrainerConfig, run_identification

SPEC_KEYS = ("name", "output_path", "emit_weights", "warmup")
RUN_KEYS = (
    "in_dim", "hidden_dim", "out_dim", "shape_factor", "output_activation",
    "rate", "eta", "eta0", "beta",
    "forgetting", "lambda", "lambda1", "s_f", "tau_f", "tau_f2", "lambda_min",
    "steps", "seed", "noise_seed", "noise_power", "init_scale",
    "clamp_eta_nonnegative", "eta_guard",
)
SUMMARY_HEADER = ("name", "final_rmse", "min_eta", "max_eta", "mean_eta", "clamp_count", "diverged")

_NAME_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
_SECTION_RE = re.compile(r"^\[\s*run\s+(\S+)\s*\]$")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    runs: tuple  # of (run name, TrainerConfig)
    output_path: Path = Path("results")
    emit_weights: bool = False
    warmup: int = 0

    def __post_init__(self):
        if not self.runs:
            raise ConfigError("experiment needs at least one run")
        names = [n for n, _ in self.runs]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ConfigError(f"duplicate run names: {', '.join(dupes)}")

    @property
    def run_names(self):
        return [n for n, _ in self.runs]


# -- parsing ---------------------------------------------------------------

def _parse_bool(text):
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional(conv):
    def parse(text):
        return None if text.lower() == "none" else conv(text)
    return parse


_CONVERTERS = {
    "in_dim": int, "hidden_dim": int, "out_dim": int, "shape_factor": float,
    "output_activation": str, "rate": str, "eta": float, "eta0": float, "beta": float,
    "forgetting": str, "lambda": float, "lambda1": float, "s_f": _parse_optional(float),
    "tau_f": float, "tau_f2": _parse_optional(float), "lambda_min": float,
    "steps": int, "seed": int, "noise_seed": _parse_optional(int), "noise_power": float,
    "init_scale": float, "clamp_eta_nonnegative": _parse_bool, "eta_guard": float,
    "name": str, "output_path": str, "emit_weights": _parse_bool, "warmup": int,
}


def _convert(key, raw, path, lineno):
    try:
        return _CONVERTERS[key](raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}", path, lineno) from None


def build_trainer_config(values):
    """Turn a dict of run keys into a TrainerConfig, applying defaults."""
    net = NetworkConfig(
        in_dim=values.get("in_dim", 4),
        hidden_dim=values.get("hidden_dim", 10),
        out_dim=values.get("out_dim", 2),
        shape_factor=values.get("shape_factor", 1.0),
        output_activation=values.get("output_activation", "nonlinear"),
    )
    if net.in_dim != 4 or net.out_dim != 2:
        raise ConfigError("the plant experiment requires in_dim = 4 and out_dim = 2")
    kind = values.get("rate", "optimized")
    if kind == "fixed":
        if "eta" not in values:
            raise ConfigError("rate = fixed needs an 'eta' value")
        rate = FixedRate(values["eta"])
    elif kind == "decayed":
        if "eta0" not in values or "beta" not in values:
            raise ConfigError("rate = decayed needs 'eta0' and 'beta' values")
        rate = DecayedRate(values["eta0"], values["beta"])
    elif kind == "optimized":
        rate = OptimizedRate()
    else:
        raise ConfigError(f"unknown rate strategy {kind!r}")
    defaults = ForgettingState()
    forget = ForgettingState(
        mode=values.get("forgetting", defaults.mode),
        lambda_fixed=values.get("lambda", defaults.lambda_fixed),
        lambda1=values.get("lambda1", defaults.lambda1),
        s_f=values.get("s_f", defaults.s_f),
        tau_f=values.get("tau_f", defaults.tau_f),
        tau_f2=values.get("tau_f2", defaults.tau_f2),
        lambda_min=values.get("lambda_min", defaults.lambda_min),
    )
    base = TrainerConfig()
    return TrainerConfig(
        network=net,
        rate=rate,
        forgetting=forget,
        steps=values.get("steps", base.steps),
        seed=values.get("seed", base.seed),
        init_scale=values.get("init_scale", base.init_scale),
        noise_power=values.get("noise_power", base.noise_power),
        noise_seed=values.get("noise_seed", base.noise_seed),
        clamp_eta_nonnegative=values.get("clamp_eta_nonnegative", base.clamp_eta_nonnegative),
        eta_guard=values.get("eta_guard", base.eta_guard),
    )


def parse_config_text(text, path="<string>"):
    spec_values = {}
    defaults = {}
    runs = []  # [name, values, header line]
    seen_names = {}
    block = defaults
    block_keys = set()

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            m = _SECTION_RE.match(line)
            if not m:
                raise ConfigError(f"malformed section header {line!r}", path, lineno)
            name = m.group(1)
            if not _NAME_RE.match(name):
                raise ConfigError(f"run name {name!r} may only use letters, digits, '_', '-' and '.'",
                                  path, lineno)
            if name in seen_names:
                raise ConfigError(f"duplicate run name {name!r} (first defined on line {seen_names[name]})",
                                  path, lineno)
            seen_names[name] = lineno
            block = {}
            block_keys = set()
            runs.append((name, block, lineno))
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", path, lineno)
        key, _, value = (part.strip() for part in line.partition("="))
        if not key or not value:
            raise ConfigError(f"expected 'key = value', got {line!r}", path, lineno)
        if key in block_keys:
            raise ConfigError(f"duplicate key {key!r}", path, lineno)
        block_keys.add(key)
        if key in SPEC_KEYS:
            if runs:
                raise ConfigError(f"experiment key {key!r} must appear before any [run] section",
                                  path, lineno)
            spec_values[key] = _convert(key, value, path, lineno)
        elif key in RUN_KEYS:
            block[key] = (_convert(key, value, path, lineno), lineno)
        else:
            raise ConfigError(f"unknown key {key!r}", path, lineno)

    if not runs:
        raise ConfigError("no [run NAME] sections found", path)

    trainer_configs = []
    for name, values, header_line in runs:
        merged = {k: v for k, (v, _) in defaults.items()}
        merged.update({k: v for k, (v, _) in values.items()})
        try:
            trainer_configs.append((name, build_trainer_config(merged)))
        except ConfigError as exc:
            raise ConfigError(f"run {name!r}: {exc}", path, header_line) from None
        except OptBPError as exc:
            raise ConfigError(f"run {name!r}: {exc}", path, header_line) from None

    warmup = spec_values.get("warmup", 0)
    if warmup < 0:
        raise ConfigError("warmup must be nonnegative", path)
    return ExperimentSpec(
        name=spec_values.get("name", Path(str(path)).stem),
        runs=tuple(trainer_configs),
        output_path=Path(spec_values.get("output_path", "results")),
        emit_weights=spec_values.get("emit_weights", False),
        warmup=warmup,
    )


def parse_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return parse_config_text(text, path)


# -- serialization ---------------------------------------------------------

def _fmt(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trainer_config_items(config):
    net, forget = config.network, config.forgetting
    items = [
        ("in_dim", net.in_dim), ("hidden_dim", net.hidden_dim), ("out_dim", net.out_dim),
        ("shape_factor", float(net.shape_factor)), ("output_activation", net.output_activation),
        ("rate", config.rate.kind),
    ]
    if isinstance(config.rate, FixedRate):
        items.append(("eta", float(config.rate.eta)))
    elif isinstance(config.rate, DecayedRate):
        items += [("eta0", float(config.rate.eta0)), ("beta", float(config.rate.beta))]
    items += [
        ("forgetting", forget.mode), ("lambda", float(forget.lambda_fixed)),
        ("lambda1", float(forget.lambda1)), ("s_f", forget.s_f), ("tau_f", float(forget.tau_f)),
        ("tau_f2", forget.tau_f2), ("lambda_min", float(forget.lambda_min)),
        ("steps", config.steps), ("seed", config.seed), ("noise_seed", config.noise_seed),
        ("noise_power", float(config.noise_power)), ("init_scale", float(config.init_scale)),
        ("clamp_eta_nonnegative", config.clamp_eta_nonnegative), ("eta_guard", float(config.eta_guard)),
    ]
    return items


def serialize_config(spec):
    lines = [
        f"name = {spec.name}",
        f"output_path = {spec.output_path}",
        f"emit_weights = {_fmt(spec.emit_weights)}",
        f"warmup = {spec.warmup}",
    ]
    for name, config in spec.runs:
        lines += ["", f"[run {name}]"]
        lines += [f"{key} = {_fmt(value)}" for key, value in trainer_config_items(config)]
    return "\n".join(lines) + "\n"


def apply_overrides(spec, seed=None, steps=None, output_path=None):
    runs = spec.runs
    if seed is not None:
        runs = tuple((n, replace(c, seed=seed)) for n, c in runs)
    if steps is not None:
        runs = tuple((n, replace(c, steps=steps)) for n, c in runs)
    out = spec.output_path if output_path is None else Path(output_path)
    return replace(spec, runs=runs, output_path=out)


# -- running ---------------------------------------------------------------

def fmt_number(x):
    return format(float(x), ".17g")


def csv_header(out_dim):
    return ["t", "eta", "lambda"] + [f"e{i + 1}" for i in range(out_dim)] + ["e2", "rmse", "clamped"]


def write_records(path, records, out_dim):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(out_dim))
        for r in records:
            writer.writerow([r.t, fmt_number(r.eta), fmt_number(r.lam), *map(fmt_number, r.e),
                             fmt_number(r.e2), fmt_number(r.rmse), int(r.clamped)])


def write_weights(path, net):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["matrix", "row", "col", "value"])
        for label, mat in (("W", net.W), ("V", net.V)):
            for (i, j), v in np.ndenumerate(mat):
                writer.writerow([label, i, j, fmt_number(v)])


@dataclass
class RunOutcome:
    name: str
    csv_path: Path
    diverged: bool = False
    message: str = ""


def _execute(name, config, out_dir, emit_weights):
    csv_path = out_dir / f"{name}.csv"
    try:
        records, state = run_identification(config, return_state=True)
    except TrainingDivergedError as exc:
        write_records(csv_path, exc.records, config.network.out_dim)
        return RunOutcome(name, csv_path, True, str(exc))
    except OptBPError as exc:
        write_records(csv_path, [], config.network.out_dim)
        return RunOutcome(name, csv_path, True, str(exc))
    write_records(csv_path, records, config.network.out_dim)
    if emit_weights:
        write_weights(out_dir / f"{name}_weights.csv", state.net)
    return RunOutcome(name, csv_path)


def run_experiment(spec, jobs=1, log=None):
    """Run every configured run, write per-run CSVs and ``summary.csv``.

    Returns 0 when every run finished, 1 if any diverged. Runs are independent,
    so ``jobs > 1`` executes them in worker processes without changing output.
    """
    out_dir = Path(spec.output_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    args = [(name, config, out_dir, spec.emit_weights) for name, config in spec.runs]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_execute, *zip(*args)))
    else:
        outcomes = [_execute(*a) for a in args]

    diverged = {o.name for o in outcomes if o.diverged}
    for o in outcomes:
        if o.diverged and log is not None:
            log(f"{spec.name}/{o.name}: {o.message}")
    rows = summarize([o.csv_path for o in outcomes], warmup=spec.warmup, diverged=diverged)
    write_summary(out_dir / "summary.csv", rows)
    return 1 if diverged else 0


# -- summaries -------------------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    name: str
    final_rmse: float
    min_eta: float
    max_eta: float
    mean_eta: float
    clamp_count: int
    diverged: bool = False

    def sort_key(self):
        rmse = self.final_rmse if math.isfinite(self.final_rmse) else math.inf
        return (self.diverged, rmse, self.name)


def _read_run_csv(path):
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read CSV: {exc.strerror}", path) from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError("empty CSV file", path, 1)
        if tuple(header) == SUMMARY_HEADER:
            raise ConfigError("this is a summary file; pass per-run CSVs", path, 1)
        n_err = len(header) - 6
        if n_err < 1 or header != csv_header(n_err):
            raise ConfigError(f"unexpected header {','.join(header)}", path, 1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ConfigError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
            try:
                values = [float(v) for v in row[1:-1]]
                clamped = int(row[-1])
                int(row[0])
            except ValueError as exc:
                raise ConfigError(f"bad number: {exc}", path, lineno) from None
            rows.append((values, clamped))
    return rows


def summarize(csv_paths, warmup=0, diverged=()):
    """Per-run final RMSE, eta statistics over ``t >= warmup`` and clamp count, best first."""
    out = []
    for path in csv_paths:
        path = Path(path)
        rows = _read_run_csv(path)
        name = path.stem
        if rows:
            eta = np.array([v[0] for v, _ in rows])
            eta_w = eta[warmup:] if warmup < len(eta) else eta[-1:]
            final_rmse = rows[-1][0][-1]
            clamp_count = sum(c for _, c in rows)
            with np.errstate(over="ignore", invalid="ignore"):
                stats = (float(eta_w.min()), float(eta_w.max()), float(eta_w.mean()))
            bad = not all(math.isfinite(x) for v, _ in rows for x in v)
        else:
            final_rmse, clamp_count, stats, bad = math.nan, 0, (math.nan,) * 3, True
        out.append(SummaryRow(name, final_rmse, *stats, clamp_count, bad or name in diverged))
    return sorted(out, key=SummaryRow.sort_key)


def write_summary_rows(fh, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for r in rows:
        writer.writerow([r.name, fmt_number(r.final_rmse), fmt_number(r.min_eta), fmt_number(r.max_eta),
                         fmt_number(r.mean_eta), r.clamp_count, "true" if r.diverged else "false"])


def write_summary(path, rows):
    with open(path, "w", newline="") as fh:
        write_summary_rows(fh, rows)


# -- default bundles -------------------------------------------------------

SEED_A = 1
SEED_B = 2
FIGURE_BUNDLES = {
    # name: (hidden neurons, weight seed, fixed rates)
    "figure2": (10, SEED_A, (0.1, 0.4, 1.4)),
    "figure3": (20, SEED_A, (0.05, 0.35, 1.0)),
    "figure4": (20, SEED_B, (0.05, 0.5, 1.0)),
}
# Forgetting used for every run in the bundles; see README for why it is small.
BUNDLE_FORGETTING = ForgettingState(mode="fixed", lambda_fixed=0.001, lambda_min=0.001)
DECAYED = DecayedRate(eta0=1.0, beta=0.001)


def default_bundle(name, steps=5000, noise_power=0.001, output_root="results"):
    hidden, seed, fixed_rates = FIGURE_BUNDLES[name]
    base = TrainerConfig(network=NetworkConfig(4, hidden, 2), forgetting=BUNDLE_FORGETTING,
                         steps=steps, seed=seed, noise_power=noise_power)
    runs = [(f"fixed_{eta:g}", replace(base, rate=FixedRate(eta))) for eta in fixed_rates]
    runs.append(("decayed", replace(base, rate=DECAYED)))
    runs.append(("optimized", replace(base, rate=OptimizedRate())))
    return ExperimentSpec(name=name, runs=tuple(runs), output_path=Path(output_root) / name)
