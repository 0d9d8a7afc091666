"""Command-line entry points: every experiment is one reproducible invocation.

All randomness flows from --seed through per-replication or per-batch
streams, so re-running an invocation reproduces its artifacts byte for
byte regardless of --threads.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__, experiments
from .drop import DropState, InsertionMode, simulate_Ln_coupled
from .engine import SubstitutionMatrix, align_score, lcs_bitparallel, lcs_length, lcs_prefix_curve
from .matchings import blocks, containment_prob_exact, count_ND
from .sequences import RngStream

SUBCOMMANDS = (
    "lcs",
    "align",
    "drop-replay",
    "simulate",
    "events",
    "inclusions",
    "increment",
    "gamma",
    "oracle-l10",
    "blocks",
    "contain",
)


class CliError(Exception):
    """Validation failure; the message names the offending flag."""


_NON_SEMANTIC_KEYS = ("func", "config", "out")


def _effective_config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NON_SEMANTIC_KEYS}


def _meta_preamble(args: argparse.Namespace) -> list[str]:
    return [
        f"# lcslab version={__version__} schema={experiments.SCHEMA_VERSION}",
        "# config=" + json.dumps(_effective_config(args), sort_keys=True, default=str),
    ]


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _table_csv(args, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in _meta_preamble(args):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table_json(args, header: list[str], rows: list[list]) -> str:
    payload = {
        "version": __version__,
        "schema": experiments.SCHEMA_VERSION,
        "config": _effective_config(args),
        "rows": [dict(zip(header, row)) for row in rows],
    }
    return json.dumps(payload, indent=2, default=str)


def _emit_table(args, header: list[str], rows: list[list]) -> None:
    fmt = getattr(args, "format", "csv")
    text = _table_csv(args, header, rows) if fmt == "csv" else _table_json(args, header, rows)
    _emit(text, getattr(args, "out", None))


def _parse_matrix(spec: str, gap: int) -> SubstitutionMatrix:
    if spec == "identity":
        return SubstitutionMatrix.identity(gap=gap)
    scores = {}
    for item in spec.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            pair, value = item.split("=")
            a, b = pair.split(",")
            scores[(a.strip(), b.strip())] = int(value)
        except ValueError:
            raise CliError(f"--matrix entry {item!r} is not of the form a,b=score") from None
    return SubstitutionMatrix(scores, gap=gap)


def _check_prob(args) -> None:
    if not 0.0 < args.p < 1.0:
        raise CliError(f"--p must be in (0, 1), got {args.p}")


def _mode(args) -> InsertionMode:
    return InsertionMode(args.mode)


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_lcs(args) -> None:
    value = lcs_bitparallel(args.a, args.b) if args.fast else lcs_length(args.a, args.b)
    _emit(str(value), args.out)


def _cmd_align(args) -> None:
    matrix = _parse_matrix(args.matrix, args.gap)
    _emit(str(align_score(args.a, args.b, matrix)), args.out)


def _cmd_drop_replay(args) -> None:
    with open(args.history, "r", encoding="utf-8") as fh:
        state = DropState.from_history_csv(fh.read(), mode=_mode(args))
    rows = [[state.k, state.to_binary_sequence().to_text()]]
    if args.y is not None:
        curve = lcs_prefix_curve(state, args.y)
        _emit_table(args, ["k", "value"], [[k, v] for k, v in curve.to_csv_rows()])
        return
    _emit_table(args, ["k", "Z"], rows)


def _simulate_one(task: tuple[int, int, float, int, str]) -> tuple[int, int, int]:
    rep, n, p, seed, mode = task
    ln, na, _ = simulate_Ln_coupled(n, p, RngStream(seed, rep), mode=InsertionMode(mode))
    return rep, ln, na


def _cmd_simulate(args) -> None:
    _check_prob(args)
    if args.n < 2:
        raise CliError(f"--n must be >= 2, got {args.n}")
    if args.reps < 1:
        raise CliError(f"--reps must be >= 1, got {args.reps}")
    tasks = [(r, args.n, args.p, args.seed, args.mode) for r in range(args.reps)]
    threads = args.threads or os.cpu_count() or 1
    if threads > 1 and args.reps > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_simulate_one, tasks, chunksize=max(1, args.reps // (4 * threads))))
    else:
        results = [_simulate_one(t) for t in tasks]
    results.sort()
    rows = [[rep, args.n, args.p, ln, na] for rep, ln, na in results]
    _emit_table(args, ["rep", "n", "p", "Ln", "Na"], rows)


def _experiment_config(args, **overrides) -> experiments.ExperimentConfig:
    kwargs = dict(
        n=args.n,
        p=args.p,
        reps=args.reps,
        seed=args.seed,
        k1=args.k1,
        k2=args.k2,
        epsilon=args.epsilon,
        delta=args.delta,
        D=args.D,
        stride=args.stride,
        mode=InsertionMode(args.mode),
    )
    kwargs.update(overrides)
    return experiments.ExperimentConfig(**kwargs)


def _cmd_events(args) -> None:
    _check_prob(args)
    which = args.which.split(",") if args.which else list(experiments.EVENT_NAMES)
    for name in which:
        if name not in experiments.EVENT_NAMES:
            raise CliError(f"--which contains unknown event {name!r}")
    cfg = _experiment_config(args)
    summary = experiments.run_drop_experiment(cfg)
    if args.per_rep:
        _emit(experiments.replications_csv(summary), args.out)
        return
    if args.format == "json":
        _emit(experiments.summary_json(summary), args.out)
        return
    rows = []
    for name in which:
        est = experiments.estimate_event(cfg, name, summary=summary)
        rows.append([name, est.frequency, est.ci_low, est.ci_high, est.reps])
    _emit_table(args, ["event", "frequency", "ci_low", "ci_high", "reps"], rows)


def _cmd_inclusions(args) -> None:
    _check_prob(args)
    cfg = _experiment_config(args)
    report = experiments.check_inclusions(cfg)
    rows = [
        ["E3&E4k->E6k", report.violations_346, report.checked_346, report.lhs_held_346],
        ["E4&E5&E6k->E2k", report.violations_123, report.checked_123, report.lhs_held_123],
    ]
    if report.vacuous:
        rows = [["vacuous", 0, 0, 0]]
    _emit_table(args, ["inclusion", "violations", "checked", "lhs_held"], rows)


def _cmd_increment(args) -> None:
    rows_out = experiments.increment_probability_check(
        args.n, args.states, args.seed, mode=_mode(args)
    )
    rows = [
        [r.state_id, r.k, r.exact_prob, r.nonempty, r.bound_k, r.bound_km1,
         int(r.ok), int(r.ok_km1)]
        for r in rows_out
    ]
    _emit_table(
        args,
        ["state", "k", "exact_prob", "nonempty", "bound_k", "bound_km1", "ok_k", "ok_km1"],
        rows,
    )


def _cmd_gamma(args) -> None:
    if args.p is not None:
        _check_prob(args)
    est = experiments.estimate_gamma(args.n, args.reps, args.seed, p=args.p)
    _emit_table(
        args,
        ["n", "reps", "mean_ratio", "ci_low", "ci_high"],
        [[est.n, est.reps, est.mean_ratio, est.ci_low, est.ci_high]],
    )


def _cmd_oracle_l10(args) -> None:
    value = experiments.exact_E_L10()
    _emit(f"{float(value):.6f} = {value.numerator}/{value.denominator}", args.out)


def _cmd_blocks(args) -> None:
    if args.D < 1:
        raise CliError(f"--D must be >= 1, got {args.D}")
    blist = blocks(args.y)
    n_d, ntilde = count_ND(args.y, args.D)
    rows = [[b.start, b.end, b.color, b.length] for b in blist]
    rows.append(["N_D", args.D, n_d, ntilde])
    _emit_table(args, ["start", "end", "color", "length"], rows)


def _cmd_contain(args) -> None:
    if args.l < 1:
        raise CliError(f"--l must be >= 1, got {args.l}")
    if args.k < args.l:
        raise CliError(f"--k must be >= --l, got {args.k}")
    p: Fraction = containment_prob_exact(args.l, args.k)
    _emit(f"{float(p):.12g} = {p.numerator}/{p.denominator}", args.out)


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sub: argparse.ArgumentParser, *, rng: bool = True, table: bool = True) -> None:
    if rng:
        sub.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
    if table:
        sub.add_argument("--out", default=None, help="output path (default: stdout)")
        sub.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_experiment_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, required=True, help="sequence length")
    sub.add_argument("--p", type=float, default=0.5, help="a-probability in (0,1)")
    sub.add_argument("--reps", type=int, default=1000, help="replications")
    sub.add_argument("--k1", type=float, default=0.2, help="slope constant")
    sub.add_argument("--k2", type=float, default=12.0, help="log-window constant")
    sub.add_argument("--epsilon", type=float, default=0.001, help="free-bit proportion threshold")
    sub.add_argument("--delta", type=float, default=None,
                     help="containment margin (default: derived from epsilon)")
    sub.add_argument("--D", type=int, default=16, help="block-length cutoff")
    sub.add_argument("--stride", type=int, default=32,
                     help="points in the k-subgrid for matching-based events")
    sub.add_argument("--mode", choices=[m.value for m in InsertionMode],
                     default=InsertionMode.PAPER_INTERIOR.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcslab",
        description="LCS fluctuation laboratory: exact engines plus Monte Carlo drivers",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--config", default=None,
                        help="INI config file with one [section] per subcommand")
    parser.add_argument("--version", action="version", version=f"lcslab {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("lcs", help="LCS length of two strings over 0/1/a", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--fast", action="store_true", help="use the bit-parallel path")
    _add_common(s, rng=False, table=False)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_lcs)

    s = subs.add_parser("align", help="matched-pair alignment score", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--matrix", default="identity",
                   help="'identity' or entries like '0,0=2;0,1=1;1,0=1;1,1=3'")
    s.add_argument("--gap", type=int, default=0, help="per-gap penalty")
    _add_common(s, rng=False, table=False)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_align)

    s = subs.add_parser("drop-replay", help="replay a drop history CSV", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--history", required=True, help="CSV of (j, T, V) rows")
    s.add_argument("--y", default=None, help="emit the score curve against this string")
    s.add_argument("--mode", choices=[m.value for m in InsertionMode],
                   default=InsertionMode.PAPER_INTERIOR.value)
    _add_common(s, rng=False)
    s.set_defaults(func=_cmd_drop_replay)

    s = subs.add_parser("simulate", help="coupled replications of L_n", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=float, default=0.5)
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--threads", type=int, default=1,
                   help="worker processes (0 = machine parallelism)")
    s.add_argument("--mode", choices=[m.value for m in InsertionMode],
                   default=InsertionMode.PAPER_INTERIOR.value)
    _add_common(s)
    s.set_defaults(func=_cmd_simulate)

    s = subs.add_parser("events", help="event frequency estimates", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_experiment_flags(s)
    s.add_argument("--which", default=None, help="comma-separated events (default all)")
    s.add_argument("--per-rep", action="store_true",
                   help="emit one CSV row per replication instead of the summary")
    _add_common(s)
    s.set_defaults(func=_cmd_events)

    s = subs.add_parser("inclusions", help="deterministic event-inclusion check", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_experiment_flags(s)
    _add_common(s)
    s.set_defaults(func=_cmd_inclusions)

    s = subs.add_parser("increment", help="exact conditional increment probabilities", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--states", type=int, default=100)
    s.add_argument("--mode", choices=[m.value for m in InsertionMode],
                   default=InsertionMode.PAPER_INTERIOR.value)
    _add_common(s)
    s.set_defaults(func=_cmd_increment)

    s = subs.add_parser("gamma", help="mean L_n/n estimate", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--reps", type=int, default=100)
    s.add_argument("--p", type=float, default=None,
                   help="a-probability; omit for binary/binary")
    _add_common(s)
    s.set_defaults(func=_cmd_gamma)

    s = subs.add_parser("oracle-l10", help="exact E[LCS] of two 10-bit strings", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_common(s, rng=False, table=False)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_oracle_l10)

    s = subs.add_parser("blocks", help="maximal runs and block-length statistics", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--y", required=True)
    s.add_argument("--D", type=int, default=5)
    _add_common(s, rng=False)
    s.set_defaults(func=_cmd_blocks)

    s = subs.add_parser("contain", help="exact containment probability P(Y^l in Z^k)", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    _add_common(s, rng=False, table=False)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_contain)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold [subcommand] sections of an INI file in as argument defaults."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    try:
        path = argv[at + 1]
    except IndexError:
        raise CliError("--config needs a path") from None
    ini = configparser.ConfigParser()
    if not ini.read(path):
        raise CliError(f"--config file {path!r} not found or unreadable")
    rest = [a for i, a in enumerate(argv) if i not in (at, at + 1)]
    command = next((a for a in rest if not a.startswith("-")), None)
    if command is None or command not in ini:
        return rest
    # config supplies defaults; explicit flags still win
    injected = []
    for key, value in ini[command].items():
        flag = "--" + key
        if flag not in rest:
            if value.lower() in ("true", "false"):
                if value.lower() == "true":
                    injected.append(flag)
            else:
                injected.extend([flag, value])
    cmd_at = rest.index(command)
    return rest[: cmd_at + 1] + injected + rest[cmd_at + 1 :]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
