"""``opertone`` command line.

Subcommands
-----------
verify          run a verification campaign for every requested dimension
funcalc         evaluate ``f(X)`` for a matrix file
frechet         evaluate ``D^m f(A; B)`` for a pair of Hermitian matrix files
counterexample  search for scalar / 2x2 witnesses

Exit codes: 0 success (all pass / expectation met), 1 usage or config error,
2 a refutation (or a counterexample search that contradicts its expected
outcome), 3 inconclusive campaign, 4 calculus hypothesis not satisfied.
The environment variable ``OPERTONE_TOL`` replaces the default ``tau``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

from .errors import (
    CampaignError,
    DomainError,
    GeometryError,
    OpertoneError,
    PreconditionError,
    SpecConstraintError,
    SpecSyntaxError,
    ValidationError,
)
from .frechet import ENGINE_ALIASES, frechet
from .funcalc.calc import analytic_calc, calc_both
from .matcore import DEFAULT_TAU, load_matrix
from .repfun.parse import parse_spec
from .sampler import SampleConfig
from .verify.campaign import CHECKS, run_campaign
from .verify.counterexamples import DEFAULT_BUDGET, KINDS, counterexample_search

EXIT_OK, EXIT_USAGE, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_HYPOTHESIS = 0, 1, 2, 3, 4
MAX_CLI_DIM = 16


class UsageError(Exception):
    pass


@dataclass
class CampaignConfig:
    check: str
    spec: str
    dims: list
    trials: int
    seed: int = 0
    tau: float = DEFAULT_TAU
    engine: str = "auto"
    path: str = "auto"
    options: dict = field(default_factory=dict)
    output: str | None = None
    jobs: int = 1
    margin: float = 1e-2
    scale: float = 1.0

    def validate(self):
        if self.check not in CHECKS:
            raise UsageError(f"unknown check {self.check!r}; choose from {', '.join(sorted(CHECKS))}")
        if not self.dims or any(not (1 <= int(d) <= MAX_CLI_DIM) for d in self.dims):
            raise UsageError(f"dims must be a non-empty list within [1, {MAX_CLI_DIM}], got {self.dims}")
        if self.trials < 1:
            raise UsageError(f"trials must be >= 1, got {self.trials}")
        if self.engine not in ENGINE_ALIASES:
            raise UsageError(f"unknown engine {self.engine!r}")
        if self.path not in ("auto", "eigen", "contour"):
            raise UsageError(f"unknown path {self.path!r}")
        if not self.tau > 0:
            raise UsageError(f"tau must be positive, got {self.tau}")
        if self.jobs < 1:
            raise UsageError(f"jobs must be >= 1, got {self.jobs}")


def _dumps(obj) -> str:
    # json writes floats with repr, the shortest string that round-trips
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True)


def _emit(text: str, output: str | None):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _env_tau() -> float | None:
    raw = os.environ.get("OPERTONE_TOL")
    if raw is None or raw == "":
        return None
    try:
        tau = float(raw)
    except ValueError:
        raise UsageError(f"OPERTONE_TOL must be a number, got {raw!r}") from None
    if not tau > 0:
        raise UsageError(f"OPERTONE_TOL must be positive, got {raw!r}")
    return tau


def _parse_dims(text) -> list:
    if isinstance(text, list):
        return [int(d) for d in text]
    try:
        return [int(tok) for tok in str(text).replace(" ", "").split(",") if tok]
    except ValueError:
        raise UsageError(f"--dims expects a comma separated list of integers, got {text!r}") from None


def _parse_value(raw: str):
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    return raw


def _load_config(args) -> CampaignConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    for key in ("check", "spec", "seed", "trials", "engine", "path", "output", "jobs", "tau", "margin", "scale"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.dims is not None:
        data["dims"] = args.dims
    options = dict(data.get("options") or {})
    if args.tone is not None:
        options["tone"] = args.tone
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        options[k.strip()] = _parse_value(v.strip())
    env_tau = _env_tau()
    if env_tau is not None and args.tau is None:
        data["tau"] = env_tau
    missing = [k for k in ("check", "spec") if k not in data]
    if missing:
        raise UsageError(f"missing {', '.join(missing)} (use --config or flags)")
    try:
        cfg = CampaignConfig(
            check=str(data["check"]),
            spec=str(data["spec"]),
            dims=_parse_dims(data.get("dims", [2])),
            trials=int(data.get("trials", 100)),
            seed=int(data.get("seed", 0)),
            tau=float(data.get("tau", DEFAULT_TAU)),
            engine=str(data.get("engine", "auto")),
            path=str(data.get("path", "auto")),
            options=options,
            output=data.get("output"),
            jobs=int(data.get("jobs", 1)),
            margin=float(data.get("margin", 1e-2)),
            scale=float(data.get("scale", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config value: {exc}") from None
    cfg.validate()
    return cfg


def _csv_table(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "spec", "n", "trial", "margin", "verdict"])
    for r in reports:
        for t, m in enumerate(r["margins"]):
            w.writerow([r["check"], r["spec"], r["n"], t, "" if m is None else repr(m), r["verdict"]])
    return buf.getvalue()


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    f = parse_spec(cfg.spec)
    check = CHECKS[cfg.check]
    if "tone" in check.needs and "tone" not in cfg.options:
        if not f.tags.tones:
            raise UsageError(f"spec '{cfg.spec}' carries no tone tag; pass --tone K")
        cfg.options["tone"] = min(f.tags.tones)
    reports = []
    for n in cfg.dims:
        sample = SampleConfig(int(n), cfg.seed, cfg.margin, cfg.scale)
        try:
            rep = run_campaign(
                cfg.check,
                f,
                cfg.trials,
                sample,
                cfg.engine,
                cfg.path,
                cfg.options,
                cfg.tau,
                cfg.jobs,
                timestamp=not args.no_timestamp,
            )
        except CampaignError as exc:
            print(f"opertone: campaign aborted at n={n}: {exc}", file=sys.stderr)
            return EXIT_INCONCLUSIVE
        reports.append(rep.to_json())
        if rep.verdict == "refuted":
            w = rep.worst
            print(f"opertone: {cfg.check} refuted at n={n}: trial {w['trial']} seed {w['seed']} margin {w['margin']!r}", file=sys.stderr)
    text = _csv_table(reports) if args.csv else _dumps(reports) + "\n"
    _emit(text, cfg.output)
    verdicts = {r["verdict"] for r in reports}
    if "refuted" in verdicts:
        return EXIT_REFUTED
    if "inconclusive" in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_funcalc(args) -> int:
    f = parse_spec(args.spec)
    X = load_matrix(args.matrix)
    if args.compare:
        both = calc_both(f, X)
        out = {
            "contour": both["contour"].to_json(),
            "eigen": None if both["eigen"] is None else both["eigen"].to_json(),
            "rel_diff": both["rel_diff"],
        }
    else:
        out = analytic_calc(f, X, args.path).to_json()
    _emit(_dumps(out) + "\n", args.output)
    return EXIT_OK


def cmd_frechet(args) -> int:
    f = parse_spec(args.spec)
    A = load_matrix(args.A, hermitian=True)
    B = load_matrix(args.B, hermitian=True)
    if args.order < 0:
        raise UsageError(f"order must be >= 0, got {args.order}")
    res = frechet(f, A, B, args.order, args.engine)
    _emit(_dumps(res.to_json()) + "\n", args.output)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    if args.kind != "remark48" and args.p is None:
        raise UsageError(f"{args.kind} needs --p")
    try:
        res = counterexample_search(args.kind, args.p, args.budget, args.seed or 0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(_dumps(res.to_json()) + "\n", args.output)
    return EXIT_OK if res.matches_expectation else EXIT_REFUTED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opertone", description="Analytic functional calculus and operator k-tone verification.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification campaign")
    v.add_argument("--config", help="JSON campaign config")
    v.add_argument("--check", choices=sorted(CHECKS))
    v.add_argument("--spec", help="function spec text")
    v.add_argument("--seed", type=int)
    v.add_argument("--dims", help="comma separated dimensions, e.g. 2,3,4")
    v.add_argument("--trials", type=int)
    v.add_argument("--engine", choices=sorted(ENGINE_ALIASES))
    v.add_argument("--path", choices=("auto", "eigen", "contour"))
    v.add_argument("--jobs", type=int)
    v.add_argument("--tau", type=float, help="relative PSD tolerance (overrides OPERTONE_TOL)")
    v.add_argument("--margin", type=float, help="spectral margin of sampled matrices")
    v.add_argument("--scale", type=float, help="norm scale of sampled B")
    v.add_argument("--tone", type=int, help="tone order k to test (overrides the spec tags)")
    v.add_argument("--set", action="append", metavar="KEY=VALUE", help="check option, e.g. p=0.5, cone=-1, flavor=convex")
    v.add_argument("--output", help="write the report here instead of stdout")
    v.add_argument("--csv", action="store_true", help="flat margin table instead of JSON")
    v.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("funcalc", help="evaluate f(X)")
    c.add_argument("--spec", required=True)
    c.add_argument("--matrix", required=True, help="matrix JSON file")
    c.add_argument("--path", choices=("auto", "eigen", "contour"), default="auto")
    c.add_argument("--compare", action="store_true", help="print contour and eigen results and their difference")
    c.add_argument("--output")
    c.set_defaults(func=cmd_funcalc)

    d = sub.add_parser("frechet", help="evaluate D^m f(A; B)")
    d.add_argument("--spec", required=True)
    d.add_argument("--A", required=True, help="Hermitian matrix JSON file")
    d.add_argument("--B", required=True, help="Hermitian matrix JSON file")
    d.add_argument("--order", "-m", type=int, default=1)
    d.add_argument("--engine", choices=sorted(ENGINE_ALIASES), default="auto")
    d.add_argument("--output")
    d.set_defaults(func=cmd_frechet)

    x = sub.add_parser("counterexample", help="search for a witness")
    x.add_argument("kind", choices=KINDS)
    x.add_argument("--p", type=float)
    x.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--output")
    x.set_defaults(func=cmd_counterexample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, SpecSyntaxError, SpecConstraintError, ValidationError, OSError) as exc:
        print(f"opertone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PreconditionError, DomainError, GeometryError) as exc:
        margin = getattr(exc, "margin", getattr(exc, "value", None))
        extra = f" (margin {margin!r})" if isinstance(margin, float) else ""
        print(f"opertone: hypothesis not satisfied: {exc}{extra}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except OpertoneError as exc:
        print(f"opertone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
