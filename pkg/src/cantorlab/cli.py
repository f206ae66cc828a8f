"""Configuration-driven experiment runner with deterministic outputs.

One experiment per invocation: ``cantorlab <subcommand> [--config FILE]``
with subcommands gauge-check, cantor-export, rho, k-upper, ampliation,
scaling, small-set, singular-demo, shift-check.  Outputs are a CSV (data
rows, config echoed in leading comment lines) and a JSON document
(resolved config, verdicts, notes); both are byte-identical across re-runs
with the same configuration.  Wall-clock timing goes to the console only,
never into files.  ``--threads`` is validated and accepted for interface
stability but all computations are sequential, so it cannot affect output
bytes; ``--seed`` is reserved (everything is deterministic).

Exit codes: 0 success, 1 configuration or validation failure, 2 numeric or
I/O failure.
"""

from __future__ import annotations

import argparse
import difflib
import os
import sys
import time
from dataclasses import dataclass, field

from . import lab, serialize
from .errors import CantorlabError, ConfigError
from .fractal import build_complex, export_geometry
from .gauge import (
    GaugeSpec,
    rv_index_check,
    validate_gauge,
)
from .lab import ExperimentResult, Verdict
from .seqnorm import (
    WeightSequence,
    canonical_weights,
    choose_start_index,
    harmonic_weights,
    obstruction_window,
)

EXPERIMENTS = (
    "gauge-check",
    "cantor-export",
    "rho",
    "k-upper",
    "ampliation",
    "scaling",
    "small-set",
    "singular-demo",
    "shift-check",
)

_TOP_KEYS = {
    "experiment", "gauge", "n", "depth", "projections", "weights", "params",
    "out", "format",
}
_GAUGE_KEYS = {"family", "s", "beta"}
_WEIGHT_KEYS = {"kind", "epsilon", "m_max", "horizon", "values"}
_PARAM_KEYS = {
    "gauge-check": {"a_list", "x_probe", "grid_points"},
    "cantor-export": {"generation"},
    "rho": {"count"},
    "k-upper": set(),
    "ampliation": {"level", "m_list", "epsilon"},
    "scaling": {"word_lengths", "rel_depth"},
    "small-set": {"families", "rel_depth"},
    "singular-demo": {"families", "rel_depth"},
    "shift-check": {"shifts"},
}


@dataclass
class RunConfig:
    experiment: str
    gauge: GaugeSpec
    n: int
    depth: int
    projections: list[int]
    weights: dict
    params: dict
    out: str = "runs"
    format: str = "both"
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)

    def resolved(self) -> dict:
        """Config echo embedded into every output file.

        Excludes execution knobs (out, threads, seed): they must not change
        output bytes.
        """
        gauge = {"family": self.gauge.family}
        if self.gauge.s is not None:
            gauge["s"] = self.gauge.s
        if self.gauge.beta is not None:
            gauge["beta"] = self.gauge.beta
        return {
            "experiment": self.experiment,
            "gauge": gauge,
            "n": self.n,
            "depth": self.depth,
            "projections": self.projections,
            "weights": self.weights,
            "params": self.params,
        }


def _check_keys(errors, mapping, allowed, where):
    for key in mapping:
        if key not in allowed:
            close = difflib.get_close_matches(key, sorted(allowed), n=1)
            hint = f" (did you mean {close[0]!r}?)" if close else ""
            errors.append(f"{where}: unknown field {key!r}{hint}")


def parse_config(document: dict, experiment: str | None = None) -> RunConfig:
    """Validate a configuration document, collecting every error.

    ``experiment`` (from the subcommand) wins over the document field; they
    must agree when both are present.
    """
    errors: list[str] = []
    if not isinstance(document, dict):
        raise ConfigError(["configuration must be a JSON object"])
    _check_keys(errors, document, _TOP_KEYS, "config")

    exp = document.get("experiment", experiment)
    if exp is None:
        errors.append("config.experiment: missing")
    elif exp not in EXPERIMENTS:
        close = difflib.get_close_matches(str(exp), EXPERIMENTS, n=3)
        suggestion = f"; did you mean: {', '.join(close)}" if close else ""
        errors.append(f"config.experiment: unknown id {exp!r}{suggestion}")
    if experiment is not None and exp is not None and exp != experiment:
        errors.append(
            f"config.experiment: {exp!r} conflicts with subcommand {experiment!r}"
        )

    gauge_doc = document.get("gauge", {"family": "power", "s": 1.5})
    gauge = None
    if not isinstance(gauge_doc, dict):
        errors.append("config.gauge: must be an object")
    else:
        _check_keys(errors, gauge_doc, _GAUGE_KEYS, "config.gauge")
        try:
            gauge = GaugeSpec(
                gauge_doc.get("family", "power"),
                gauge_doc.get("s"),
                gauge_doc.get("beta"),
            )
        except CantorlabError as exc:
            errors.append(f"config.gauge: {exc}")

    depth = document.get("depth", 6)
    if not isinstance(depth, int) or depth < 1:
        errors.append("config.depth: must be an integer >= 1")
        depth = 6

    n = document.get("n")
    if n is None:
        n = gauge.ambient_dim if gauge is not None else 2
    elif not isinstance(n, int) or n < 1:
        errors.append("config.n: must be an integer >= 1")
        n = 2

    projections = document.get("projections", [1, max(1, depth - 1)])
    levels: list[int] = []
    if (
        isinstance(projections, list)
        and len(projections) == 2
        and all(isinstance(v, int) for v in projections)
        and projections[0] <= projections[1]
    ):
        levels = list(range(projections[0], projections[1] + 1))
    elif isinstance(projections, list) and projections and all(
        isinstance(v, int) for v in projections
    ):
        levels = sorted(set(projections))
    else:
        errors.append("config.projections: need [lo, hi] or a list of levels")
    if levels and (levels[0] < 1 or levels[-1] > depth - 1):
        errors.append(f"config.projections: levels must lie in 1..{depth - 1}")

    weights = document.get("weights", {"kind": "rho", "epsilon": 0.05, "m_max": 16})
    if not isinstance(weights, dict):
        errors.append("config.weights: must be an object")
        weights = {"kind": "rho"}
    else:
        _check_keys(errors, weights, _WEIGHT_KEYS, "config.weights")
        kind = weights.get("kind")
        if kind not in ("rho", "harmonic", "custom"):
            errors.append("config.weights.kind: must be rho, harmonic or custom")
        if kind == "custom" and not weights.get("values"):
            errors.append("config.weights.values: custom weights need values")
        if kind == "rho":
            eps = weights.get("epsilon", 0.05)
            if not (isinstance(eps, (int, float)) and eps > 0):
                errors.append("config.weights.epsilon: must be > 0")
            mm = weights.get("m_max", 16)
            if not (isinstance(mm, int) and mm >= 1):
                errors.append("config.weights.m_max: must be an integer >= 1")
        horizon = weights.get("horizon")
        if horizon is not None and not (isinstance(horizon, int) and horizon >= 1):
            errors.append("config.weights.horizon: must be an integer >= 1")

    params = document.get("params", {})
    if not isinstance(params, dict):
        errors.append("config.params: must be an object")
        params = {}
    elif exp in _PARAM_KEYS:
        _check_keys(errors, params, _PARAM_KEYS[exp], f"config.params[{exp}]")

    fmt = document.get("format", "both")
    if fmt not in ("csv", "json", "both"):
        errors.append("config.format: must be csv, json or both")

    out = document.get("out", "runs")
    if not isinstance(out, str) or not out:
        errors.append("config.out: must be a nonempty path")

    if errors:
        raise ConfigError(errors)
    return RunConfig(
        experiment=exp,
        gauge=gauge,
        n=n,
        depth=depth,
        projections=levels,
        weights=dict(weights),
        params=dict(params),
        out=out,
        format=fmt,
    )


def _default_horizon(config: RunConfig) -> int:
    top_level = max(config.projections) if config.projections else config.depth - 1
    base = 2 * (1 << (config.n * top_level))
    if config.experiment == "ampliation":
        level = int(config.params.get("level", config.depth - 2))
        m_top = max(int(m) for m in config.params.get("m_list", [2, 4, 8]))
        base = 2 * (1 << (config.n * level)) * m_top
    return max(base, 1024)


def build_weights(config: RunConfig) -> WeightSequence:
    """Materialize the configured weight sequence at an adequate horizon."""
    spec = config.weights
    kind = spec.get("kind", "rho")
    horizon = spec.get("horizon") or _default_horizon(config)
    if kind == "harmonic":
        return harmonic_weights(horizon)
    if kind == "custom":
        return WeightSequence(spec["values"], generator="custom")
    epsilon = float(spec.get("epsilon", 0.05))
    m_max = int(spec.get("m_max", 16))
    start = choose_start_index(config.gauge, epsilon, m_max, horizon)
    return canonical_weights(config.gauge, start, horizon)


def _gauge_check_result(config: RunConfig) -> ExperimentResult:
    report = validate_gauge(config.gauge, grid_points=config.params.get("grid_points", 64))
    a_list = config.params.get("a_list", [2.0, 4.0, 8.0])
    x_probe = config.params.get("x_probe", 1e-6)
    rows = rv_index_check(config.gauge, a_list, x_probe)
    verdicts = [
        Verdict("fprime-zero-at-origin", 0.0, 0.0 if report.fprime_zero_at_origin else 1.0,
                report.fprime_zero_at_origin, "sampled limit f'(1e-4..1e-12)"),
        Verdict("convexity", 0.0, report.min_second_derivative,
                report.convex, "min f'' on the sampled grid"),
        Verdict("log-concavity", 0.0, report.max_log_second_derivative,
                report.log_concave, "max (log f)'' on the sampled grid"),
    ]
    return ExperimentResult(
        experiment="gauge-check",
        params=dict(config.params, gauge=config.gauge.label()),
        columns=("a", "forward_deviation", "inverse_deviation"),
        rows=[tuple(row) for row in rows],
        verdicts=verdicts,
        notes={
            "largest_verified_t0": report.largest_verified_t0,
            "fprime_limit_samples": list(report.fprime_limit_samples),
            "interval": list(report.interval),
        },
    )


def _cantor_export_result(config: RunConfig) -> ExperimentResult:
    generation = int(config.params.get("generation", min(3, config.depth)))
    comp = build_complex(config.gauge, depth=config.depth, n_override=config.n)
    doc = export_geometry(comp, generation)
    rows = [
        (
            "-".join(str(v) for v in rec["word"]),
            *rec["corner"],
            rec["side"],
            rec["measure"],
        )
        for rec in doc["records"]
    ]
    columns = ("word", *(f"corner_{j}" for j in range(1, comp.n + 1)), "side", "measure")
    total = sum(rec["measure"] for rec in doc["records"])
    verdicts = [
        Verdict("partition-of-unity", 0.0, total - 1.0, total == 1.0,
                "generation measures sum to exactly 1")
    ]
    return ExperimentResult(
        experiment="cantor-export",
        params=dict(config.params, generation=generation),
        columns=columns,
        rows=rows,
        verdicts=verdicts,
        notes={"geometry": doc},
    )


def _rho_export_result(config: RunConfig) -> ExperimentResult:
    pi = build_weights(config)
    count = int(config.params.get("count", min(len(pi), 4096)))
    rows = [(pi.start_index + i, float(pi.values[i])) for i in range(count)]
    verdicts = []
    if pi.generator == "rho":
        m_range = range(pi.start_index, pi.horizon + 1, max(1, len(pi) // 512))
        lo, hi = obstruction_window(config.gauge, pi, list(m_range))
        verdicts.append(
            Verdict("obstruction-window-positive", 0.0, lo, 0.0 < lo <= hi < float("inf"),
                    f"window range [{lo:.6g}, {hi:.6g}]")
        )
    return ExperimentResult(
        experiment="rho",
        params=dict(config.params, weights=pi.generator, start_index=pi.start_index),
        columns=("k", "weight"),
        rows=rows,
        verdicts=verdicts,
        notes={"horizon": len(pi), "divergent_series": pi.diverges},
    )


def dispatch(config: RunConfig) -> ExperimentResult:
    """Run the configured experiment; numeric failures raise CantorlabError."""
    if config.experiment == "gauge-check":
        return _gauge_check_result(config)
    if config.experiment == "cantor-export":
        return _cantor_export_result(config)
    if config.experiment == "rho":
        return _rho_export_result(config)

    pi = build_weights(config)
    g, n, depth = config.gauge, config.n, config.depth
    params = config.params
    if config.experiment == "k-upper":
        return lab.upper_bound_curve(g, n, pi, depth, config.projections)
    if config.experiment == "ampliation":
        return lab.ampliation_check(
            g, n, pi, depth,
            int(params.get("level", depth - 2)),
            params.get("m_list", [2, 4, 8]),
            float(params.get("epsilon", config.weights.get("epsilon", 0.05))),
        )
    if config.experiment == "scaling":
        rel = int(params.get("rel_depth", min(2, depth - 2)))
        lengths = params.get(
            "word_lengths", [ell for ell in (0, 1, 2) if ell + rel <= depth - 1]
        )
        return lab.subcube_scaling_check(g, n, pi, depth, lengths, rel)
    if config.experiment == "small-set":
        rel = int(params.get("rel_depth", 1))
        top = depth - 1 - rel
        families = params.get(
            "families",
            [[length, count] for length in range(1, min(3, top) + 1)
             for count in (1, 2)],
        )
        return lab.small_set_bound_check(g, n, pi, depth, families, rel)
    if config.experiment == "singular-demo":
        rel = int(params.get("rel_depth", 1))
        top = depth - 1 - rel
        families = params.get(
            "families", [[length, 1] for length in range(1, min(4, top) + 1)]
        )
        return lab.singular_concentration_demo(g, n, pi, depth, families, rel)
    if config.experiment == "shift-check":
        return lab.shift_invariance_check(
            g, n, pi, depth, config.projections, params.get("shifts", [0, 1, 2])
        )
    raise ConfigError([f"config.experiment: unknown id {config.experiment!r}"])


def write_outputs(result: ExperimentResult, config: RunConfig) -> list[str]:
    """Write CSV and/or JSON into the output directory; returns the paths."""
    os.makedirs(config.out, exist_ok=True)
    resolved = config.resolved()
    written = []
    if config.format in ("csv", "both"):
        path = os.path.join(config.out, f"{result.experiment}.csv")
        text = serialize.csv_text(
            result.columns,
            result.rows,
            preamble={
                "format_version": serialize.FORMAT_VERSION,
                "config": resolved,
            },
        )
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        written.append(path)
    if config.format in ("json", "both"):
        path = os.path.join(config.out, f"{result.experiment}.json")
        payload = {
            "format_version": serialize.FORMAT_VERSION,
            "config": resolved,
            "columns": list(result.columns),
            "rows": [list(row) for row in result.rows],
            "verdicts": [
                {
                    "invariant": v.invariant,
                    "tolerance": v.tolerance,
                    "measured": v.measured,
                    "passed": bool(v.passed),
                    "detail": v.detail,
                }
                for v in result.verdicts
            ],
            "notes": result.notes,
        }
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(serialize.dumps(payload) + "\n")
        written.append(path)
    return written


def _parse_gauge_flag(text: str) -> dict:
    parts = text.split(":")
    doc: dict = {"family": parts[0]}
    if len(parts) > 1:
        doc["s"] = float(parts[1])
    if len(parts) > 2:
        doc["beta"] = float(parts[2])
    return doc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cantorlab",
        description="Cantor-complex operator-model experiments",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name, help=f"run the {name} experiment")
        cmd.add_argument("--config", help="JSON configuration file")
        cmd.add_argument("--out", help="output directory (default runs/<experiment>)")
        cmd.add_argument("--format", choices=["csv", "json", "both"], dest="fmt")
        cmd.add_argument("--threads", type=int, default=None,
                         help="accepted for interface stability; outputs never depend on it")
        cmd.add_argument("--seed", type=int, default=None,
                         help="reserved; all computations are deterministic")
        cmd.add_argument("--depth", type=int, help="model depth override")
        cmd.add_argument("--gauge", help="gauge override, e.g. power:1.5 or example37")
    return parser


def _load_document(args) -> dict:
    document: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            text = handle.read()
        try:
            document = serialize.loads(text)
        except ValueError as exc:
            raise ConfigError([f"config file: invalid JSON ({exc})"])
        if not isinstance(document, dict):
            raise ConfigError(["config file: top level must be an object"])
    if args.depth is not None:
        document["depth"] = args.depth
    if args.gauge is not None:
        document["gauge"] = _parse_gauge_flag(args.gauge)
    if args.out is not None:
        document["out"] = args.out
    elif "out" not in document:
        document["out"] = os.path.join("runs", args.experiment)
    if args.fmt is not None:
        document["format"] = args.fmt
    return document


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        document = _load_document(args)
        config = parse_config(document, experiment=args.experiment)
        if args.threads is not None and args.threads < 1:
            raise ConfigError(["--threads: must be >= 1"])
        if args.threads is not None:
            config.threads = args.threads
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 1

    started = time.perf_counter()
    try:
        result = dispatch(config)
        paths = write_outputs(result, config)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 1
    except CantorlabError as exc:
        print(f"numeric failure [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - started

    for verdict in result.verdicts:
        status = "pass" if verdict.passed else "FAIL"
        print(f"[{status}] {verdict.invariant}: measured={verdict.measured:.6g} "
              f"tol={verdict.tolerance:.6g}")
    print(f"{result.experiment}: {len(result.rows)} rows in {elapsed:.3f}s "
          f"-> {', '.join(paths)}")
    if not result.all_passed:
        failing = ", ".join(v.invariant for v in result.verdicts if not v.passed)
        print(f"numeric failure: invariant(s) {failing} did not hold", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
