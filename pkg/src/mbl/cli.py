"""Command-line front end: ``mbl run | sweep | solve | verify | bounds``.

Settings come from a plain ``key = value`` file (``--config``) and are
overridden by flags.  Learner and adversary parameters use dotted keys,
e.g. ``adversary.attempts = 64`` or ``--set learner.base=eliminate-one``.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import math
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import verify
from .adversaries import ADVERSARIES, make_adversary
from .engine.game import (
    CSV_VERSION_LINE, TRANSCRIPT_COLUMNS, AdversaryFault, IllegalFeedback, LearnerFault, run_game,
)
from .engine.protocols import PERMUTATION_MODELS, Protocol, ProtocolError, QueryError
from .families import (
    DEFAULT_PERMUTATION_CAP, DomainError, InvalidFamily, InvalidModulus, SizeError,
    build_avoiding_family, build_linear_family, build_permutation_family,
    build_threshold_family, load_family, spread_thresholds,
)
from .learners import LEARNERS, make_learner
from .oracle import DEFAULT_MAX_HYPOTHESES, DEFAULT_MAX_QUERIES, Solver

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SIZE = 0, 1, 2, 3
DEFAULT_RUN_CAP = 10_000
FAMILY_KINDS = ("threshold", "linear", "permutation", "avoiding", "file")
SWEEP_COLUMNS = ("model", "r", "family", "F", "X", "n", "p", "learner", "adversary", "seed",
                 "mistakes", "rounds", "final_size", "cap", "lower", "ratio")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def parse_value(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    if low in ("none", ""):
        return None
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError("config", str(exc)) from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"line {num} is not key = value")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


@dataclass
class ExperimentConfig:
    model: str = "cart_weak"
    r: int = 1
    reinforcement: str = "weak"
    family: str = "threshold"
    F: int | None = None
    X: int | None = None
    n: int | None = None
    p: int | None = None
    nonzero: bool = False
    pattern: str | None = None
    implicit: bool = False
    path: str | None = None
    learner: str = "halving"
    adversary: str = "threshold-maximin"
    learner_params: dict = field(default_factory=dict)
    adversary_params: dict = field(default_factory=dict)
    budget: int | None = None
    seed: int | None = None
    repetitions: int = 1
    cap: int | None = None

    INT_KEYS = ("r", "F", "X", "n", "p", "budget", "seed", "repetitions", "cap")
    BOOL_KEYS = ("nonzero", "implicit")
    STR_KEYS = ("model", "reinforcement", "family", "pattern", "path", "learner", "adversary")

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "ExperimentConfig":
        cfg = cls()
        for key, text in raw.items():
            cfg.set(key, text)
        cfg.validate()
        return cfg

    def set(self, key: str, text) -> None:
        val = parse_value(text) if isinstance(text, str) else text
        if key.startswith("learner."):
            self.learner_params[key.split(".", 1)[1]] = val
        elif key.startswith("adversary."):
            self.adversary_params[key.split(".", 1)[1]] = val
        elif key in self.INT_KEYS:
            if val is not None and (not isinstance(val, int) or isinstance(val, bool)):
                raise ConfigError(key, f"expected an integer, got {text!r}")
            setattr(self, key, val)
        elif key in self.BOOL_KEYS:
            if not isinstance(val, bool):
                raise ConfigError(key, f"expected true/false, got {text!r}")
            setattr(self, key, val)
        elif key in self.STR_KEYS:
            setattr(self, key, None if val is None else str(text).strip())
        else:
            raise ConfigError(key, "unknown setting")

    def validate(self) -> None:
        if self.family not in FAMILY_KINDS:
            raise ConfigError("family", f"expected one of {', '.join(FAMILY_KINDS)}")
        if self.learner not in LEARNERS:
            raise ConfigError("learner", f"unknown learner {self.learner!r}")
        if self.adversary not in ADVERSARIES:
            raise ConfigError("adversary", f"unknown adversary {self.adversary!r}")
        if self.seed is None:
            raise ConfigError("seed", "a seed is required")
        if self.repetitions < 1:
            raise ConfigError("repetitions", "must be at least 1")
        try:
            self.protocol()
        except ProtocolError as exc:
            raise ConfigError("model", str(exc)) from None

    def protocol(self) -> Protocol:
        return Protocol(self.model, self.r, self.reinforcement)

    def build_family(self):
        kind = self.family
        try:
            if kind == "threshold":
                if self.F is None:
                    raise ConfigError("F", "threshold family needs F")
                X = self.X if self.X is not None else 2 * self.F
                return build_threshold_family(X, spread_thresholds(self.F, X))
            if kind == "linear":
                if self.p is None or self.n is None:
                    raise ConfigError("p" if self.p is None else "n", "linear family needs p and n")
                return build_linear_family(self.p, self.n, self.nonzero)
            if kind == "permutation":
                if self.n is None:
                    raise ConfigError("n", "permutation family needs n")
                cap = self.cap if self.cap is not None else DEFAULT_PERMUTATION_CAP
                return build_permutation_family(self.n, cap=cap, implicit=self.implicit)
            if kind == "avoiding":
                if self.n is None or not self.pattern:
                    raise ConfigError("pattern", "avoiding family needs n and pattern")
                pat = [int(c) for c in str(self.pattern).replace(" ", "").split(",")]
                cap = self.cap if self.cap is not None else DEFAULT_PERMUTATION_CAP
                return build_avoiding_family(self.n, pat, cap=cap)
            if not self.path:
                raise ConfigError("path", "file family needs path")
            with open(self.path, encoding="utf-8") as fh:
                return load_family(fh.read())
        except (InvalidFamily, InvalidModulus, DomainError, ValueError, OSError) as exc:
            if isinstance(exc, (ConfigError, SizeError)):
                raise
            raise ConfigError("family", str(exc)) from None

    def make_learner(self):
        try:
            return make_learner(self.learner, **self.learner_params)
        except TypeError as exc:
            raise ConfigError("learner", str(exc)) from None

    def make_adversary(self):
        try:
            return make_adversary(self.adversary, **self.adversary_params)
        except TypeError as exc:
            raise ConfigError("adversary", str(exc)) from None


# -- bounds attached to a run --------------------------------------------------------


def upper_cap(model: str, r: int, family_size: int, k: int, learner: str) -> int | None:
    if learner == "eliminate-one":
        return family_size - 1
    if learner in ("halving", "greedy-subround"):
        return verify.mistake_cap(model, r, family_size, k)
    return None


def lower_count(cfg: ExperimentConfig, family) -> int | None:
    """Constructive lower count for an adversary playing its intended family, else None."""
    if cfg.adversary == "threshold-maximin" and cfg.model == "cart_weak" and cfg.family == "threshold":
        return verify.threshold_lower_count(len(family), cfg.r)
    if cfg.adversary == "insertion" and cfg.model in PERMUTATION_MODELS and cfg.family == "permutation":
        return verify.p_closed(family.domain_size)
    return None


def _ratio(observed: int, family_size: int, r: int) -> str:
    denom = r * math.log(family_size) if family_size > 1 else 0.0
    return "" if denom == 0 else f"{observed / denom:.6f}"


def play(cfg: ExperimentConfig, seed: int):
    family = cfg.build_family()
    protocol = cfg.protocol()
    tr = run_game(protocol, family, cfg.make_learner(), cfg.make_adversary(), cfg.budget, seed)
    return family, tr


def cmd_run(cfg: ExperimentConfig) -> tuple[str, list[str], int]:
    """Transcript CSV, summary lines and exit status."""
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("repetition",) + TRANSCRIPT_COLUMNS)
    summary, status = [], EXIT_OK
    for rep in range(cfg.repetitions):
        seed = cfg.seed + rep
        family, tr = play(cfg, seed)
        for row in tr.rows():
            w.writerow((rep,) + row)
        F, k = len(family), family.label_count
        cap = upper_cap(cfg.model, cfg.r, F, k, cfg.learner)
        low = lower_count(cfg, family)
        report = verify.bound_table(F, cfg.r, max(k, 2), model=cfg.model)
        entry = report.get(f"{cfg.model}_log")
        parts = [f"repetition={rep}", f"seed={seed}", f"mistakes={tr.mistakes}",
                 f"rounds={len(tr.rounds)}", f"final_size={tr.final_size}",
                 f"{entry.name}={entry.value:.6g}", f"cap={'' if cap is None else cap}",
                 f"lower={'' if low is None else low}",
                 f"ratio={_ratio(tr.mistakes, F, cfg.r)}"]
        if tr.fault:
            parts.append(f"fault={tr.fault!r}")
            status = EXIT_FAIL
        elif cap is not None and tr.mistakes > cap:
            parts.append("violation=above-cap")
            status = EXIT_FAIL
        elif low is not None and tr.mistakes < low:
            parts.append("violation=below-lower-count")
            status = EXIT_FAIL
        summary.append(" ".join(parts))
    return buf.getvalue(), summary, status


# -- sweep ----------------------------------------------------------------------------


def expand_grid(base: dict[str, str], grid: list[tuple[str, list[str]]]) -> list[dict[str, str]]:
    keys = [k for k, _ in grid]
    return [{**base, **dict(zip(keys, combo))} for combo in itertools.product(*(v for _, v in grid))]


def sweep_row(raw: dict[str, str]) -> tuple:
    cfg = ExperimentConfig.from_mapping(raw)
    family, tr = play(cfg, cfg.seed)
    F, k = len(family), family.label_count
    cap = upper_cap(cfg.model, cfg.r, F, k, cfg.learner)
    low = lower_count(cfg, family)
    if tr.fault:
        raise LearnerFault(tr.fault) if tr.fault.startswith("learner") else AdversaryFault(tr.fault)
    return (cfg.model, cfg.r, cfg.family, F, family.domain_size,
            "" if cfg.n is None else cfg.n, "" if cfg.p is None else cfg.p,
            cfg.learner, cfg.adversary, cfg.seed, tr.mistakes, len(tr.rounds),
            tr.final_size, "" if cap is None else cap, "" if low is None else low,
            _ratio(tr.mistakes, F, cfg.r))


def cmd_sweep(base: dict[str, str], grid: list[tuple[str, list[str]]], run_cap: int = DEFAULT_RUN_CAP,
              jobs: int = 1) -> str:
    points = expand_grid(base, grid)
    if len(points) > run_cap:
        raise SizeError(f"grid has {len(points)} points, run cap is {run_cap}")
    for raw in points:
        ExperimentConfig.from_mapping(raw)
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(sweep_row, points))
    else:
        rows = [sweep_row(raw) for raw in points]
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


# -- solve / verify / bounds -----------------------------------------------------------------


def cmd_solve(cfg: ExperimentConfig, tree: bool = False, max_queries: int = DEFAULT_MAX_QUERIES) -> list[str]:
    family = cfg.build_family()
    cap = cfg.cap if cfg.cap is not None else DEFAULT_MAX_HYPOTHESES
    solver = Solver(cfg.protocol(), family, cap, max_queries)
    lines = [str(solver.value())]
    if tree:
        lines.extend(solver.tree())
    return lines


def _verify_uniformity(p, n, r, draws, rng, conditional):
    results = []
    target = Fraction(1, p**r)
    for _ in range(draws):
        d = verify.draw_admissible(p, n, r, rng)
        if d is None:
            if conditional:
                return [("skip", "no admissible (s, t) pair")]
            s = tuple(rng.randrange(1, p) for _ in range(n))
            z = tuple(rng.randrange(p) for _ in range(r))
            t = None
        else:
            s, t, z = d
        got = verify.check_conditional(p, n, r, s, t, z) if conditional else verify.check_uniformity(p, n, r, s, z)
        ok = got == target
        results.append(("pass" if ok else "fail", f"s={s} t={t} z={z} prob={got}"))
    return results


def cmd_verify(target: str, opts: argparse.Namespace) -> list[tuple[str, str, str]]:
    """Rows of (check, result, detail) with result in pass/fail/skip."""
    seed = opts.seed if opts.seed is not None else 0
    rng = random.Random(f"{seed}:verify")
    rows: list[tuple[str, str, str]] = []
    if target == "pn":
        bad = verify.check_pn(opts.max)
        rows.append(("pn", "pass" if bad is None else "fail",
                     f"max={opts.max}" if bad is None else f"first mismatch at n={bad}"))
    elif target in ("uniformity", "conditional"):
        for res, detail in _verify_uniformity(opts.p, opts.n, opts.r, opts.draws, rng, target == "conditional"):
            rows.append((target, res, f"p={opts.p} n={opts.n} r={opts.r} {detail}"))
    elif target == "buckets":
        S = verify.nonzero_points(opts.p, opts.n)
        bound = verify.bucket_bound(len(S), opts.p, opts.r)
        try:
            u, table = verify.find_good_u(opts.p, opts.n, opts.r, S, rng, opts.attempts)
            rows.append(("buckets", "pass", f"u={u} largest={table.largest} bound={bound:.6g}"))
        except verify.SearchFailure as exc:
            rows.append(("buckets", "fail", f"best largest={exc.best.largest} bound={bound:.6g}"))
    elif target == "ceil":
        ok = verify.ceil_identity_check(opts.samples)
        rows.append(("ceil", "pass" if ok else "fail", f"samples={opts.samples}"))
    elif target == "bounds":
        report = verify.bound_table(opts.F, opts.r, opts.k, opts.n, opts.M, opts.model)
        for e in report.entries:
            ok = e.value >= 0 and (e.cap is None or e.cap >= 0)
            rows.append((e.name, "pass" if ok else "fail", f"value={e.value:.12g} cap={e.cap}"))
    return rows


def verify_csv(target: str, rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("target", "check", "result", "detail"))
    w.writerows((target,) + row for row in rows)
    return buf.getvalue()


# -- argument handling --------------------------------------------------------------


RUN_FLAGS = ("model", "r", "reinforcement", "family", "F", "X", "n", "p", "pattern", "path",
             "learner", "adversary", "repetitions")


def _add_experiment_flags(sp: argparse.ArgumentParser) -> None:
    for name in RUN_FLAGS:
        sp.add_argument(f"--{name}", dest=f"x_{name}", default=None)
    sp.add_argument("--nonzero", dest="x_nonzero", action="store_const", const="true", default=None)
    sp.add_argument("--implicit", dest="x_implicit", action="store_const", const="true", default=None)
    sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="any setting, including learner.* and adversary.* parameters")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="write CSV here instead of stdout")
    common.add_argument("--budget", type=int, default=None, help="round budget")
    common.add_argument("--cap", type=int, default=None,
                        help="size cap: hypotheses for solve, grid points for sweep, n for enumeration")
    common.add_argument("--config", default=None, help="key = value settings file")

    parser = argparse.ArgumentParser(prog="mbl", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", parents=[common], help="play one game and write its transcript")
    _add_experiment_flags(sp)

    sp = sub.add_parser("sweep", parents=[common], help="play a grid of games")
    _add_experiment_flags(sp)
    sp.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2,...")
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("solve", parents=[common], help="exact game value on a small family")
    _add_experiment_flags(sp)
    sp.add_argument("--tree", action="store_true", help="print an optimal adversary strategy")
    sp.add_argument("--max-queries", type=int, default=DEFAULT_MAX_QUERIES)

    sp = sub.add_parser("verify", parents=[common], help="check a lemma or identity")
    sp.add_argument("target", choices=("pn", "uniformity", "conditional", "buckets", "ceil", "bounds"))
    sp.add_argument("--max", type=int, default=10**6)
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--draws", type=int, default=50)
    sp.add_argument("--attempts", type=int, default=32)
    sp.add_argument("--samples", type=int, default=10**4)
    sp.add_argument("--F", type=int, default=16)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--model", default=None)

    sp = sub.add_parser("bounds", parents=[common], help="print the bound table as CSV")
    sp.add_argument("--F", type=int, required=True)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--M", type=int, default=None)
    sp.add_argument("--model", default=None)
    return parser


def gather_settings(args: argparse.Namespace) -> dict[str, str]:
    raw = read_config_file(args.config) if args.config else {}
    for key, val in vars(args).items():
        if key.startswith("x_") and val is not None:
            raw[key[2:]] = str(val)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=VALUE")
        key, val = item.split("=", 1)
        raw[key.strip()] = val.strip()
    for key in ("seed", "budget", "cap"):
        val = getattr(args, key)
        if val is not None:
            raw[key] = str(val)
    return raw


def parse_grid(items: list[str]) -> list[tuple[str, list[str]]]:
    grid = []
    for item in items:
        if "=" not in item:
            raise ConfigError(item, "expected KEY=V1,V2,...")
        key, vals = item.split("=", 1)
        grid.append((key.strip(), [v.strip() for v in vals.split(",") if v.strip()]))
    return grid


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = ExperimentConfig.from_mapping(gather_settings(args))
            text, summary, status = cmd_run(cfg)
            _emit(text, args.out)
            stream = sys.stdout if args.out else sys.stderr
            for line in summary:
                print(line, file=stream)
            return status
        if args.command == "sweep":
            raw = gather_settings(args)
            grid = parse_grid(args.grid)
            if args.config:
                file_grid = [(k[5:], v) for k, v in read_config_file(args.config).items() if k.startswith("grid.")]
                flagged = {k for k, _ in grid}
                grid = [(k, [s.strip() for s in v.split(",") if s.strip()])
                        for k, v in file_grid if k not in flagged] + grid
                for k, _ in file_grid:
                    raw.pop(f"grid.{k}", None)
            cap = args.cap if args.cap is not None else DEFAULT_RUN_CAP
            raw.pop("cap", None)
            _emit(cmd_sweep(raw, grid, cap, args.jobs), args.out)
            return EXIT_OK
        if args.command == "solve":
            raw = gather_settings(args)
            raw.setdefault("seed", "0")
            cfg = ExperimentConfig.from_mapping(raw)
            _emit("\n".join(cmd_solve(cfg, args.tree, args.max_queries)) + "\n", None)
            return EXIT_OK
        if args.command == "verify":
            if args.n is None and args.target != "bounds":
                args.n = 2
            rows = cmd_verify(args.target, args)
            for check, res, detail in rows:
                print(f"{res.upper():4} {check} {detail}")
            if args.out:
                _emit(verify_csv(args.target, rows), args.out)
            return EXIT_FAIL if any(res == "fail" for _, res, _ in rows) else EXIT_OK
        if args.command == "bounds":
            report = verify.bound_table(args.F, args.r, args.k, args.n, args.M, args.model)
            _emit(report.to_csv(), args.out)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeError as exc:
        print(f"size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (verify.PreconditionError, ProtocolError, QueryError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LearnerFault, AdversaryFault, IllegalFeedback) as exc:
        print(f"game fault: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
