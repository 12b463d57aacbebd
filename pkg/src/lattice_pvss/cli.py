"""Command-line front end.

Exit codes: 0 expected outcome, 1 verification mismatch, 2 configuration
error, 3 malformed input.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .harness import SCENARIOS, make_scenario, run_scenario, verify_transcript
from .modmath import ConfigurationError, Modulus
from .params import ParamRequest, ParamSet, derive_params, validate_params
from .transcript import PvssTranscript, TranscriptFormatError

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_MALFORMED = 0, 1, 2, 3
SEED_ENV = "LATTICE_PVSS_SEED"


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def load_params(path: str) -> ParamSet:
    try:
        ps = ParamSet.from_text(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read parameter file: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"bad parameter file: {exc}") from exc
    problems = validate_params(ps)
    if problems:
        raise ConfigurationError(f"parameter file violates: {', '.join(problems)}")
    return ps


def cmd_params(args) -> int:
    try:
        ps = derive_params(ParamRequest(args.n, args.t, args.v, args.reps, args.max_q_bits))
    except ConfigurationError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    text = ps.to_text()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}: p has {ps.p.bit_length()} bits, q has {ps.q.bit_length()} bits, u={ps.u}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        ps = load_params(args.params)
        scenario = make_scenario(args.scenario, ps, args.seed)
        result = run_scenario(ps, scenario)
    except ConfigurationError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if args.out:
        Path(args.out).write_text(result.transcript.to_text(Modulus(ps.p).width))
    print(result.summary())
    for note in result.notes:
        print(f"  {note}")
    return EXIT_OK if result.expected else EXIT_MISMATCH


def cmd_verify(args) -> int:
    try:
        ps = load_params(args.params)
    except ConfigurationError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        text = Path(args.transcript).read_text()
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(EXIT_MALFORMED, f"cannot read transcript: {exc}")
    try:
        tr = PvssTranscript.from_text(text, ps, Modulus(ps.p).width)
    except TranscriptFormatError as exc:
        return _fail(EXIT_MALFORMED, str(exc))
    except ConfigurationError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        mismatches = verify_transcript(ps, tr)
    except ConfigurationError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    for m in mismatches:
        print(f"mismatch: {m}")
    if mismatches:
        return EXIT_MISMATCH
    print(f"ok: {len(tr.parties)} key proofs, dealer and {len(tr.reveals)} reveals reproduce")
    return EXIT_OK


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-pvss", description="Lattice-based PVSS simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="derive a parameter set")
    p.add_argument("--n", type=int, required=True, help="number of participants")
    p.add_argument("--t", type=int, required=True, help="threshold (t < n/2)")
    p.add_argument("--v", type=int, default=16, help="LWE secret dimension")
    p.add_argument("--reps", type=int, default=16, help="parallel repetitions per proof")
    p.add_argument("--max-q-bits", type=int, default=128)
    p.add_argument("--out", help="output file (stdout if omitted)")
    p.set_defaults(func=cmd_params)

    r = sub.add_parser("run", help="simulate one protocol run")
    r.add_argument("--params", required=True)
    r.add_argument("--scenario", choices=SCENARIOS, default="honest")
    r.add_argument("--seed", type=int, default=_default_seed(), help=f"defaults to ${SEED_ENV} or 0")
    r.add_argument("--out", help="transcript file")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="re-verify a transcript from public data")
    v.add_argument("--params", required=True)
    v.add_argument("--transcript", required=True)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
