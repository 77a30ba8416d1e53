"""Command line front end.

Three subcommands: ``simulate`` sweeps policies over an arrival-rate grid
and writes one CSV row per (rate, policy); ``compare`` writes paired
differences for exactly two policies; ``verify`` runs the property
suites.  Configs are strict JSON (snake_case keys, unknown keys are
errors).  Exit codes: 0 success, 1 verification failure, 2 config error,
3 output I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .core import ArrivalKind, StochasticConfig
from .policies import PolicyKind
from .sim import PairedComparison, SweepPoint, littles_law_delay, paired_compare, sweep
from .verify import run_all

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3

SWEEP_HEADER = "lambda,policy,mean_occupancy,ci_half_width,replications,diverged"
COMPARE_HEADER = "lambda,mean_diff,ci_half_width"


class ConfigError(ValueError):
    pass


_CONFIG_FIELDS = {
    "n_queues",
    "n_servers",
    "connectivity_p",
    "arrival_kind",
    "service_q",
    "seed",
    "horizon",
    "warmup",
    "replications",
    "rate_grid",
    "policies",
    "output_path",
}


@dataclass(frozen=True)
class RunConfig:
    n_queues: int
    n_servers: int
    connectivity_p: float
    arrival_kind: ArrivalKind
    service_q: float
    horizon: int
    warmup: int
    replications: int
    rate_grid: tuple[float, ...]
    policies: tuple[PolicyKind, ...]
    output_path: str
    seed: int = 0

    def stochastic_config(self, rate: float) -> StochasticConfig:
        return StochasticConfig(
            n_queues=self.n_queues,
            n_servers=self.n_servers,
            connectivity_p=self.connectivity_p,
            arrival_kind=self.arrival_kind,
            arrival_rate=rate,
            service_q=self.service_q,
            seed=self.seed,
        )

    def to_dict(self) -> dict:
        return {
            "n_queues": self.n_queues,
            "n_servers": self.n_servers,
            "connectivity_p": self.connectivity_p,
            "arrival_kind": self.arrival_kind.value,
            "service_q": self.service_q,
            "seed": self.seed,
            "horizon": self.horizon,
            "warmup": self.warmup,
            "replications": self.replications,
            "rate_grid": list(self.rate_grid),
            "policies": [p.value for p in self.policies],
            "output_path": self.output_path,
        }


def _require(data: dict, key: str, kinds, convert=None):
    if key not in data:
        raise ConfigError(f"missing config field '{key}'")
    value = data[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise ConfigError(f"config field '{key}' has the wrong type")
    return convert(value) if convert else value


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")

    try:
        arrival_kind = ArrivalKind(_require(data, "arrival_kind", str))
    except ValueError:
        raise ConfigError(
            f"config field 'arrival_kind' must be one of {[k.value for k in ArrivalKind]}"
        ) from None

    rate_grid = _require(data, "rate_grid", list)
    if not rate_grid or not all(
        isinstance(r, (int, float)) and not isinstance(r, bool) for r in rate_grid
    ):
        raise ConfigError("config field 'rate_grid' must be a non-empty number list")

    raw_policies = _require(data, "policies", list)
    try:
        policies = tuple(PolicyKind(p) for p in raw_policies)
    except ValueError:
        raise ConfigError(
            f"config field 'policies' entries must be in {[p.value for p in PolicyKind]}"
        ) from None
    if not policies:
        raise ConfigError("config field 'policies' must be non-empty")

    cfg = RunConfig(
        n_queues=_require(data, "n_queues", int),
        n_servers=_require(data, "n_servers", int),
        connectivity_p=_require(data, "connectivity_p", (int, float), float),
        arrival_kind=arrival_kind,
        service_q=_require(data, "service_q", (int, float), float),
        horizon=_require(data, "horizon", int),
        warmup=_require(data, "warmup", int),
        replications=_require(data, "replications", int),
        rate_grid=tuple(float(r) for r in rate_grid),
        policies=policies,
        output_path=_require(data, "output_path", str),
        seed=int(data.get("seed", 0)),
    )
    if cfg.warmup < 0 or cfg.horizon <= cfg.warmup:
        raise ConfigError("config requires horizon > warmup >= 0")
    if cfg.replications < 1:
        raise ConfigError("config field 'replications' must be >= 1")
    # Surface per-rate parameter problems (probabilities, rate bounds) now.
    for rate in cfg.rate_grid:
        try:
            cfg.stochastic_config(rate)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data)


def format_number(value: float) -> str:
    """Full-precision decimal text: shortest string that round-trips."""
    return repr(float(value))


def sweep_csv(points: list[SweepPoint]) -> str:
    lines = [SWEEP_HEADER]
    for pt in points:
        lines.append(
            ",".join(
                (
                    format_number(pt.arrival_rate),
                    pt.policy.value,
                    format_number(pt.mean),
                    format_number(pt.ci_half_width),
                    str(pt.n_replications),
                    "true" if pt.diverged else "false",
                )
            )
        )
    return "\n".join(lines) + "\n"


def compare_csv(comparisons: list[PairedComparison]) -> str:
    lines = [COMPARE_HEADER]
    for cmp in comparisons:
        lines.append(
            ",".join(
                (
                    format_number(cmp.arrival_rate),
                    format_number(cmp.mean_diff),
                    format_number(cmp.ci_half_width),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _write_output(text: str, path: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _figure_path(output_path: str) -> str:
    return str(Path(output_path).with_suffix(".png"))


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    points = sweep(
        cfg.stochastic_config(cfg.rate_grid[0]),
        cfg.policies,
        cfg.rate_grid,
        cfg.horizon,
        cfg.warmup,
        cfg.replications,
        cfg.seed,
        workers=args.workers,
    )
    _write_output(sweep_csv(points), cfg.output_path)
    if not args.no_figure:
        from .report import render_sweep_figure

        render_sweep_figure(points, _figure_path(cfg.output_path))
    print(f"wrote {cfg.output_path}" + ("" if args.no_figure else f" and {_figure_path(cfg.output_path)}"))
    print("rate      policy     mean_occupancy  ci_half_width  delay(slots)")
    for pt in points:
        delay = littles_law_delay(pt.mean, cfg.n_queues, pt.arrival_rate)
        delay_text = "-" if delay is None else f"{delay:.3f}"
        flag = " diverged" if pt.diverged else ""
        print(
            f"{pt.arrival_rate:<9g} {pt.policy.value:<10} {pt.mean:<15.4f} "
            f"{pt.ci_half_width:<14.4f} {delay_text}{flag}"
        )
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    if len(cfg.policies) != 2:
        raise ConfigError("compare requires exactly two policies in the config")
    a, b = cfg.policies
    comparisons = [
        paired_compare(
            cfg.stochastic_config(rate),
            a,
            b,
            rate,
            cfg.horizon,
            cfg.warmup,
            cfg.replications,
            cfg.seed,
            workers=args.workers,
        )
        for rate in cfg.rate_grid
    ]
    _write_output(compare_csv(comparisons), cfg.output_path)
    if not args.no_figure:
        from .report import render_compare_figure

        render_compare_figure(comparisons, _figure_path(cfg.output_path))
    print(f"wrote {cfg.output_path}" + ("" if args.no_figure else f" and {_figure_path(cfg.output_path)}"))
    for cmp in comparisons:
        print(
            f"rate {cmp.arrival_rate:g}: {a.value}-{b.value} = "
            f"{cmp.mean_diff:+.4f} +/- {cmp.ci_half_width:.4f}"
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all(
        trials=args.trials,
        max_n=args.max_queues,
        max_k=args.max_servers,
        seed=args.seed,
        coupling_seeds=args.coupling_seeds,
        coupling_slots=args.coupling_slots,
    )
    failed = False
    for res in results:
        print(res.line())
        for example in res.counterexamples:
            print(f"    counterexample: {example}")
        failed = failed or not res.passed
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.output is not None:
        cfg = dataclasses.replace(cfg, output_path=args.output)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="queuematch",
        description="Multi-queue multi-server scheduling experiments and checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (("simulate", cmd_simulate), ("compare", cmd_compare)):
        p = sub.add_parser(name, help=f"{name} experiment from a JSON config")
        p.add_argument("config", help="path to the JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--output", default=None, help="override the output CSV path")
        p.add_argument("--workers", type=int, default=1, help="parallel replication workers")
        p.add_argument("--no-figure", action="store_true", help="skip the PNG figure")
        p.set_defaults(fn=fn)

    v = sub.add_parser("verify", help="run the structural property suites")
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--max-queues", type=int, default=4)
    v.add_argument("--max-servers", type=int, default=4)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--coupling-seeds", type=int, default=10)
    v.add_argument("--coupling-slots", type=int, default=2000)
    v.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        # ConfigError and any invalid parameter surfaced by the library
        # (enumeration guards, probability bounds) are config problems.
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
