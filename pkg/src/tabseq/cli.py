"""Command-line front end: prove, translate, check.

Exit status: 0 on success (proof found / Accepted), 1 when the search is
exhausted or a proof is rejected, 2 on I/O, parse, or malformed-file
errors.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import gs3, tableau
from .formula import Not, ParseError, parse
from .tableau import Exhausted, FormatError, render_tableau
from .translate import TranslateError, translate

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple[Path, ...]
    negate: bool = False
    gamma_limit: int = 2
    depth_limit: int = 200
    emit: str = "both"
    eager_close: bool = True
    out: Path | None = None
    pretty: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.gamma_limit < 1:
            raise ValueError("gamma limit must be at least 1")
        if self.depth_limit < 1:
            raise ValueError("depth limit must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabseq",
        description="Refute formulas with free-variable tableaux and compile "
        "the proofs into independently checkable sequent proofs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    prove = sub.add_parser("prove", help="Refute the formula in each input file.")
    prove.add_argument("inputs", nargs="+", type=Path, help="Formula files (.p).")
    prove.add_argument(
        "--negate",
        action="store_true",
        help="Refute the negation of the input, i.e. prove it as a goal.",
    )
    prove.add_argument("--gamma-limit", type=int, default=2, metavar="N",
                       help="Instantiations per universal formula and branch (default 2).")
    prove.add_argument("--depth-limit", type=int, default=200, metavar="N",
                       help="Maximum branch length (default 200).")
    prove.add_argument("--emit", choices=("tableau", "gs3", "both"), default="both",
                       help="Which proof files to write (default both).")
    prove.add_argument("--eager-close", action=argparse.BooleanOptionalAction, default=True,
                       help="Check closure constraints against the global store as they "
                       "are added (default); --no-eager-close defers to one final solve.")
    prove.add_argument("--out", type=Path, default=None, metavar="DIR",
                       help="Output directory (default: next to each input).")
    prove.add_argument("--pretty", action="store_true",
                       help="Print stacked renderings of the proofs.")
    prove.add_argument("--jobs", type=int, default=1, metavar="N",
                       help="Process input files with N parallel workers.")

    trans = sub.add_parser("translate", help="Compile a tableau proof file to a sequent proof.")
    trans.add_argument("inputs", nargs=1, type=Path, help="Tableau proof file (.tab).")
    trans.add_argument("--out", type=Path, default=None, metavar="FILE",
                       help="Output file (default: input with .gs3 suffix).")
    trans.add_argument("--pretty", action="store_true",
                       help="Print a stacked rendering of the sequent proof.")

    check = sub.add_parser("check", help="Verify a sequent proof file.")
    check.add_argument("inputs", nargs=1, type=Path, help="Sequent proof file (.gs3).")

    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")


class InputError(Exception):
    """Input-level failure: reported on stderr with exit status 2."""


def _prove_one(config: RunConfig, path: Path) -> tuple[int, str]:
    text = _read(path)
    goal = parse(text)
    if config.negate:
        goal = Not(goal)
    result = tableau.prove(
        [goal],
        gamma_limit=config.gamma_limit,
        depth_limit=config.depth_limit,
        eager_close=config.eager_close,
    )
    if isinstance(result, Exhausted):
        return EXIT_FAILED, f"{path}: Exhausted after {result.steps} steps: {result.reason}"

    out_dir = config.out if config.out is not None else path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{path}: proved with {tableau.rule_count(result.root)} tableau rules"]
    if config.emit in ("tableau", "both"):
        tab_path = out_dir / (path.stem + ".tab")
        tab_path.write_text(tableau.tableau_to_json(result), encoding="utf-8")
        lines.append(f"wrote {tab_path}")
    if config.emit in ("gs3", "both"):
        proof = translate(result)
        gs3_path = out_dir / (path.stem + ".gs3")
        gs3_path.write_text(gs3.proof_to_json(proof), encoding="utf-8")
        lines.append(f"wrote {gs3_path}")
    if config.pretty:
        lines.append(render_tableau(result).rstrip("\n"))
        if config.emit in ("gs3", "both"):
            lines.append(gs3.render_proof(proof).rstrip("\n"))
    return EXIT_OK, "\n".join(lines)


def _run_prove(config: RunConfig) -> int:
    def worker(path: Path) -> tuple[int, str]:
        try:
            return _prove_one(config, path)
        except (ParseError, InputError) as e:
            return EXIT_BAD_INPUT, f"{path}: error: {e}"

    if config.jobs > 1 and len(config.inputs) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(worker, config.inputs))
    else:
        results = [worker(p) for p in config.inputs]

    status = EXIT_OK
    for code, message in results:
        stream = sys.stdout if code == EXIT_OK else sys.stderr
        print(message, file=stream)
        status = max(status, code)
    return status


def _run_translate(config: RunConfig) -> int:
    path = config.inputs[0]
    try:
        ct = tableau.tableau_from_json(_read(path))
        tableau.audit_closed_tableau(ct)
    except (FormatError, tableau.AuditError) as e:
        print(f"{path}: malformed tableau proof: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    proof = translate(ct)
    out_path = config.out if config.out is not None else path.with_suffix(".gs3")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(gs3.proof_to_json(proof), encoding="utf-8")
    print(f"wrote {out_path}")
    if config.pretty:
        print(gs3.render_proof(proof).rstrip("\n"))
    return EXIT_OK


def _run_check(config: RunConfig) -> int:
    path = config.inputs[0]
    try:
        proof = gs3.proof_from_json(_read(path))
    except gs3.FormatError as e:
        print(f"{path}: malformed sequent proof: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    result = gs3.check(proof)
    print(result.describe())
    return EXIT_OK if result else EXIT_FAILED


def run(config: RunConfig) -> int:
    if config.command == "prove":
        return _run_prove(config)
    if config.command == "translate":
        return _run_translate(config)
    if config.command == "check":
        return _run_check(config)
    raise ValueError(f"unknown command {config.command!r}")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        inputs=tuple(args.inputs),
        negate=getattr(args, "negate", False),
        gamma_limit=getattr(args, "gamma_limit", 2),
        depth_limit=getattr(args, "depth_limit", 200),
        emit=getattr(args, "emit", "both"),
        eager_close=getattr(args, "eager_close", True),
        out=getattr(args, "out", None),
        pretty=getattr(args, "pretty", False),
        jobs=getattr(args, "jobs", 1),
    )


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    try:
        status = run(config_from_args(args))
    except (ParseError, InputError) as e:
        print(f"error: {e}", file=sys.stderr)
        status = EXIT_BAD_INPUT
    except (ValueError, TranslateError) as e:
        print(f"error: {e}", file=sys.stderr)
        status = EXIT_BAD_INPUT
    sys.exit(status)


if __name__ == "__main__":
    main()
