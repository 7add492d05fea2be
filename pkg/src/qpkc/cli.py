"""Command line: ``qpkc table1 | session | sweep | estimate-sim``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 internal invariant violation.
Flags override values from ``--config FILE`` (``key = value`` lines, keys
named like the long flags), which override built-in defaults.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .protocol import AdversaryStrategy, AttackKind, SessionConfig
from .qsim import QuantumStateError

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3

ADVERSARIES = ("none", "intercept", "entangle", "dos")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _adversary_name(text: str) -> str:
    if text not in ADVERSARIES:
        raise argparse.ArgumentTypeError(f"invalid adversary {text!r}; valid names: {', '.join(ADVERSARIES)}")
    return text


def _k_list(text: str) -> tuple[int, ...]:
    try:
        values = harness.parse_grid(text, int)
    except ValueError:
        values = None
    if not values:
        raise argparse.ArgumentTypeError(f"bad K list {text!r}")
    for k in values:
        if k < 1:
            raise argparse.ArgumentTypeError(f"bad K value {k} in {text!r}: must be >= 1")
    return values


def _u64(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        value = -1
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an integer in [0, 2^64), got {text!r}")
    return value


def _fraction_grid(text: str) -> tuple[float, ...]:
    try:
        values = harness.parse_grid(text, float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values:
        raise argparse.ArgumentTypeError("empty fraction grid")
    return values


def _shared(p: argparse.ArgumentParser, trials: int) -> None:
    p.add_argument("--seed", type=_u64, default=0, help="master seed (u64)")
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", type=Path, default=None, help="key = value defaults file")
    p.add_argument("--show-config", action="store_true", help="print the effective configuration and exit")
    p.add_argument("--workers", type=int, default=1, help="worker processes for trials")


def _session_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--adversary", type=_adversary_name, default="none", metavar="{" + ",".join(ADVERSARIES) + "}")
    p.add_argument("--n", type=int, default=64, help="Bell pairs per key")
    p.add_argument("--decoys", type=int, default=None, help="decoys per transmission (default max(8, ceil(n/4)))")
    p.add_argument("--msg-len", type=int, default=32)
    p.add_argument("--attack-fraction", type=float, default=1.0)
    p.add_argument("--flip-prob", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=None, help="depolarizing probability per transit qubit")
    p.add_argument("--abort-threshold", type=float, default=0.0)
    p.add_argument("--recycle-fraction", type=float, default=0.25)
    p.add_argument("--channels", default=None, help="comma list from keygen,issue,ciphertext,recycle")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpkc", description="Bell-pair quantum public-key cryptography lab")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("table1", help="mutual information and error rate of the state-estimation attack")
    _shared(p, trials=1)
    p.add_argument("--k", type=_k_list, default=harness.DEFAULT_K, help="K values: a,b,c or start:stop:step")
    p.add_argument("--mode", choices=("approx", "exact"), default="approx")
    p.add_argument("--round4", action="store_true", help="round numbers to 4 decimal places on output")

    p = sub.add_parser("session", help="run independent protocol sessions")
    _shared(p, trials=100)
    _session_flags(p)

    p = sub.add_parser("sweep", help="abort probability and Eve accuracy across attack fractions")
    _shared(p, trials=1000)
    _session_flags(p)
    p.add_argument("--fractions", type=_fraction_grid, default=(0.0, 0.25, 0.5, 0.75, 1.0))
    p.set_defaults(adversary="entangle")

    p = sub.add_parser("estimate-sim", help="Monte Carlo state-estimation attack on rotation-based keys")
    _shared(p, trials=100_000)
    p.add_argument("--k", type=_k_list, default=(10,))
    p.add_argument("--msg-len", type=int, default=1)
    p.add_argument("--resolution", type=int, default=16, help="key resolution exponent n")
    p.add_argument("--fidelity", type=float, default=None, help="override Eve's estimation fidelity")
    return parser


def _read_config_file(path: Path) -> dict[str, str]:
    values = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.lstrip("-").replace("-", "_")] = value
    return values


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        values = _read_config_file(args.config)
    except OSError as exc:
        raise OSError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in values.items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        if action.nargs == 0:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _session_config(args) -> SessionConfig:
    return SessionConfig(
        key_length=args.n,
        message_length=args.msg_len,
        decoy_count=args.decoys,
        recycle_test_fraction=args.recycle_fraction,
        abort_threshold=args.abort_threshold,
        noise=args.noise,
        seed=args.seed,
    )


def _adversary(args) -> AdversaryStrategy:
    channels = None
    if args.channels:
        channels = frozenset(c.strip() for c in args.channels.split(",") if c.strip())
    return AdversaryStrategy(AttackKind(args.adversary), args.attack_fraction, args.flip_prob, channels)


def make_config(args):
    if args.workers < 1:
        raise ValueError(f"workers must be >= 1, got {args.workers}")
    if args.command == "table1":
        return harness.Table1Config(args.k, args.mode, args.round4)
    if args.command == "session":
        return harness.SessionRunConfig(_session_config(args), _adversary(args), args.trials, args.seed, args.workers)
    if args.command == "sweep":
        return harness.SweepConfig(_session_config(args), _adversary(args), args.fractions, args.trials, args.seed, args.workers)
    return harness.EstimateSimConfig(args.k, args.msg_len, args.resolution, args.trials, args.seed, args.fidelity)


COMMANDS = {
    "table1": harness.cmd_table1,
    "session": harness.cmd_session,
    "sweep": harness.cmd_sweep,
    "estimate-sim": harness.cmd_estimate_sim,
}


def _show(args) -> str:
    skip = {"show_config", "command"}
    lines = [f"command = {args.command}"]
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {'' if value is None else value}")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        if args.show_config:
            sys.stdout.write(_show(args))
            return EXIT_OK
        config = make_config(args)
    except UsageError as exc:
        print(f"qpkc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"qpkc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qpkc: error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        report = COMMANDS[args.command](config)
        if args.out is None:
            sys.stdout.write(harness.render_report(report, args.format))
        else:
            harness.write_report(report, args.out, args.format)
    except OSError as exc:
        print(f"qpkc: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QuantumStateError, AssertionError) as exc:
        print(f"qpkc: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
