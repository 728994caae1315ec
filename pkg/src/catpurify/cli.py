"""Command-line front end.

Three subcommands: ``yield-curve`` sweeps fidelities to CSV, ``verify``
runs the state-vector oracle checks, ``simulate-hashing`` runs seeded
Monte Carlo hashing trials.  Output is deterministic byte-for-byte for a
fixed configuration; exit codes are 0 (ok), 2 (usage/config), 3
(capacity), 4 (internal invariant violation).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .errors import CapacityError, InternalInvariantError
from .ensemble import werner_single
from .hashing import simulate_hashing
from .oracle import (
    ORACLE_QUBIT_LIMIT,
    corrupted_mxor_rule,
    verify_conjugation_rules,
    verify_mxor,
)
from .strategy import DEFAULT_MAX_ROUNDS, MethodSpec, yield_curve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_INTERNAL = 4


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one CLI invocation (flags merged
    over the optional key=value config file, defaults applied)."""

    subcommand: str
    n_parties: int = 2
    f_min: float = 0.0
    f_max: float = 0.0
    f_step: float = 1.0
    methods: tuple[MethodSpec, ...] = ()
    max_rounds: int = DEFAULT_MAX_ROUNDS
    workers: int = 1
    block_size: int = 0
    fidelity: float = 1.0
    trials: int = 1
    seed: int = 0
    safety_bits: int | None = None
    self_test: bool = False
    party_list: tuple[int, ...] = ()
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "tsv"):
            raise ValueError(f"unknown output format {self.format!r}")
        if self.subcommand == "yield-curve":
            if not self.methods:
                raise ValueError("no methods requested")
            if self.workers < 1:
                raise ValueError("workers must be positive")
        elif self.subcommand == "simulate-hashing":
            if self.n_parties < 2:
                raise ValueError("need at least two parties")
            if self.block_size < 1:
                raise ValueError("block size must be positive")
            if self.trials < 1:
                raise ValueError("need at least one trial")

    @property
    def delimiter(self) -> str:
        return "," if self.format == "csv" else "\t"


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _read_config(path: str) -> dict[str, str]:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _merge_config(args: argparse.Namespace, schema: dict[str, tuple]) -> None:
    """Fill arguments still at None from the --config file; explicit flags
    win because they already overwrote the None sentinel."""
    source = _read_config(args.config) if args.config else {}
    for key, (attr, convert, default) in schema.items():
        if getattr(args, attr) is None:
            if key in source:
                setattr(args, attr, convert(source[key]))
            else:
                setattr(args, attr, default)
    unknown = set(source) - set(schema)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")


def _parse_f_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected min:max:step, got {text!r}")
    f_min, f_max, step = (float(p) for p in parts)
    return f_min, f_max, step


def _parse_bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes"):
        return True
    if text.lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _write_lines(lines: list[str], config: RunConfig) -> None:
    text = "\n".join(config.delimiter.join(row) for row in lines) + "\n"
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_yield_curve(args: argparse.Namespace) -> int:
    _merge_config(
        args,
        {
            "parties": ("parties", int, 2),
            "methods": ("methods", str, "rec-hash"),
            "f": ("f_range", str, "0.5:1.0:0.01"),
            "max-rounds": ("max_rounds", int, DEFAULT_MAX_ROUNDS),
            "workers": ("workers", int, 1),
            "format": ("format", str, "csv"),
            "out": ("out", str, None),
        },
    )
    f_min, f_max, step = _parse_f_range(args.f_range)
    config = RunConfig(
        subcommand="yield-curve",
        n_parties=args.parties,
        f_min=f_min,
        f_max=f_max,
        f_step=step,
        methods=tuple(
            MethodSpec.from_id(token.strip(), max_rounds=args.max_rounds)
            for token in args.methods.split(",")
            if token.strip()
        ),
        max_rounds=args.max_rounds,
        workers=args.workers,
        out=args.out,
        format=args.format,
    )
    curve = yield_curve(
        config.n_parties,
        config.f_min,
        config.f_max,
        config.f_step,
        list(config.methods),
        workers=config.workers,
    )
    header = ["fidelity"]
    for mid in curve.method_ids:
        header += [f"{mid}_raw", f"{mid}_clamped"]
    lines = [header]
    for k, f in enumerate(curve.grid):
        row = [_fmt(float(f))]
        for mid in curve.method_ids:
            row += [_fmt(float(curve.raw[mid][k])), _fmt(float(curve.clamped[mid][k]))]
        lines.append(row)
    _write_lines(lines, config)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    _merge_config(
        args,
        {
            "parties": ("parties", str, "2,3"),
            "self-test": ("self_test", _parse_bool, False),
        },
    )
    config = RunConfig(
        subcommand="verify",
        party_list=tuple(
            int(tok) for tok in str(args.parties).split(",") if tok.strip()
        ),
        self_test=bool(args.self_test),
    )
    for n in config.party_list:
        if 2 * n > ORACLE_QUBIT_LIMIT:
            raise CapacityError(
                f"verification at N={n} needs {2 * n} qubits, "
                f"limit is {ORACLE_QUBIT_LIMIT}"
            )
    if config.self_test:
        report = verify_mxor(2, rule=corrupted_mxor_rule)
        print(f"self-test (corrupted rule): {report.n_fail} pair failures detected")
        if report.n_fail == 0:
            raise InternalInvariantError("corrupted rule passed verification")
        return EXIT_OK
    all_ok = True
    conj = verify_conjugation_rules()
    print(conj)
    all_ok &= conj.ok
    for n in config.party_list:
        report = verify_mxor(n)
        print(report)
        all_ok &= report.ok
    return EXIT_OK if all_ok else 1


def cmd_simulate_hashing(args: argparse.Namespace) -> int:
    _merge_config(
        args,
        {
            "parties": ("parties", int, 3),
            "block-size": ("block_size", int, 1000),
            "fidelity": ("fidelity", float, 0.9),
            "trials": ("trials", int, 1),
            "seed": ("seed", int, 0),
            "safety-bits": ("safety_bits", int, -1),
            "format": ("format", str, "csv"),
            "out": ("out", str, None),
        },
    )
    config = RunConfig(
        subcommand="simulate-hashing",
        n_parties=args.parties,
        block_size=args.block_size,
        fidelity=args.fidelity,
        trials=args.trials,
        seed=args.seed,
        safety_bits=None if args.safety_bits < 0 else args.safety_bits,
        out=args.out,
        format=args.format,
    )
    single = werner_single(config.n_parties, config.fidelity)
    lines = [["seed", "success", "empirical_yield", "rounds_a", "rounds_b", "consumed"]]
    successes = 0
    yields = []
    for k in range(config.trials):
        seed = config.seed + k
        success, empirical_yield, run = simulate_hashing(
            config.n_parties,
            config.block_size,
            single,
            seed,
            safety_bits=config.safety_bits,
        )
        successes += int(success)
        yields.append(empirical_yield)
        lines.append(
            [
                str(seed),
                str(int(success)),
                _fmt(empirical_yield),
                str(run.rounds_a),
                str(run.rounds_b),
                str(len(run.consumed)),
            ]
        )
    mean_yield = sum(yields) / len(yields)
    lines.append(
        ["summary", _fmt(successes / config.trials), _fmt(mean_yield), "", "", ""]
    )
    _write_lines(lines, config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catpurify",
        description="Cat-state purification protocol simulator and yield calculator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("yield-curve", help="fidelity sweep to CSV")
    curve.add_argument("-N", "--parties", type=int, default=None)
    curve.add_argument("--methods", type=str, default=None,
                       help="comma list: rec-hash, block<m>, mp-hash, 2p-hash")
    curve.add_argument("--f", dest="f_range", type=str, default=None,
                       help="fidelity grid as min:max:step")
    curve.add_argument("--max-rounds", type=int, default=None)
    curve.add_argument("--workers", type=int, default=None)
    curve.add_argument("--out", type=str, default=None)
    curve.add_argument("--format", type=str, default=None, choices=(None, "csv", "tsv"))
    curve.add_argument("--config", type=str, default=None)
    curve.set_defaults(func=cmd_yield_curve)

    verify = sub.add_parser("verify", help="state-vector oracle checks")
    verify.add_argument("-N", "--parties", type=str, default=None,
                        help="comma list of party counts")
    verify.add_argument("--self-test", dest="self_test", action="store_const",
                        const=True, default=None,
                        help="run the corrupted-rule harness sanity check")
    verify.add_argument("--config", type=str, default=None)
    verify.set_defaults(func=cmd_verify)

    sim = sub.add_parser("simulate-hashing", help="Monte Carlo hashing trials")
    sim.add_argument("-N", "--parties", type=int, default=None)
    sim.add_argument("-m", "--block-size", dest="block_size", type=int, default=None)
    sim.add_argument("-f", "--fidelity", type=float, default=None)
    sim.add_argument("--trials", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--safety-bits", dest="safety_bits", type=int, default=None,
                     help="extra hash rounds per phase (default: 2*log2(m) rounded up)")
    sim.add_argument("--out", type=str, default=None)
    sim.add_argument("--format", type=str, default=None, choices=(None, "csv", "tsv"))
    sim.add_argument("--config", type=str, default=None)
    sim.set_defaults(func=cmd_simulate_hashing)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
