"""Command line entry point: single jobs, batches and the module self-test."""

from __future__ import annotations

import argparse
import logging
import sys
import time

from .cohomology import DEFAULT_SEED, h0_length, h1_length, random_modules, verify_restriction_additivity
from .hypotheses import ExternalInputs
from .report import OPTION_DEFAULTS, InputError, JobInput, dumps, parse_batch, render_text, run_batch, run_job

EX_OK, EX_USAGE, EX_DATAERR = 0, 64, 65


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kolycheck", description=__doc__)
    src = ap.add_argument_group("input")
    src.add_argument("--curve", help="five comma-separated integers a1,a2,a3,a4,a6")
    src.add_argument("--p", type=int, help="prime p >= 5")
    src.add_argument("--disc", type=int, metavar="D", help="K = Q(sqrt(-D)); D > 0")
    src.add_argument("--input", help="batch file: JSON array of jobs or CSV a1,a2,a3,a4,a6,p,D")
    ap.add_argument("--output", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--sieve-bound", type=int)
    ap.add_argument("--precision", type=int)
    ap.add_argument("--witness-bound", type=int)
    ap.add_argument("--spade3-exclude-p", action="store_true", default=None,
                    help="do not count p among the primes exactly dividing N+")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for batches")
    ap.add_argument("--selftest", action="store_true", help="run the Frobenius-module property suite")
    ap.add_argument("-v", "--verbose", action="store_true")
    ext = ap.add_argument_group("external inputs (assumed, not computed)")
    for key in ExternalInputs.__dataclass_fields__:
        ext.add_argument(f"--{key.replace('_', '-')}", type=int, dest=key)
    return ap


def selftest(count: int = 200, seed: int = DEFAULT_SEED) -> tuple[bool, str]:
    start = time.perf_counter()
    modules = random_modules(count, seed)
    herbrand = sum(h0_length(M) != h1_length(M) for M in modules)
    additivity = sum(not verify_restriction_additivity(M).holds for M in modules)
    elapsed = time.perf_counter() - start
    ok = herbrand == 0 and additivity == 0
    return ok, (f"selftest seed={seed} modules={count} herbrand_failures={herbrand} "
                f"additivity_failures={additivity} seconds={elapsed:.2f}")


def _options(args) -> dict:
    chosen = {
        "sieve_bound": args.sieve_bound,
        "precision": args.precision,
        "witness_bound": args.witness_bound,
        "spade3_exclude_p": args.spade3_exclude_p,
    }
    return {k: v for k, v in chosen.items() if v is not None}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.selftest:
        ok, line = selftest()
        print(line)
        return EX_OK if ok else 1

    single = (args.curve, args.p, args.disc)
    if args.input and any(x is not None for x in single):
        parser.error("--input cannot be combined with --curve/--p/--disc")
    if args.jobs < 1:
        parser.error("--jobs must be positive")

    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
            fmt = "json" if args.input.endswith(".json") else "csv" if args.input.endswith(".csv") else None
            rows = parse_batch(text, fmt)
        except (OSError, UnicodeDecodeError, InputError) as exc:
            print(f"kolycheck: cannot read {args.input}: {exc}", file=sys.stderr)
            return EX_DATAERR
        batch = run_batch(rows, jobs=args.jobs, options_override=_options(args))
        if args.format == "text":
            parts = []
            for res in batch["results"]:
                if "error" in res:
                    parts.append(f"line {res['line']}: ERROR {res['error']['message']}\n")
                else:
                    parts.append(f"line {res['line']}: " + render_text(res["report"]))
            _emit("".join(parts), args.output)
        else:
            _emit(dumps(batch), args.output)
        return EX_OK

    if any(x is None for x in single):
        parser.error("give --curve, --p and --disc, or --input, or --selftest")
    try:
        curve = [int(a) for a in args.curve.split(",")]
    except ValueError:
        parser.error("--curve must be five comma-separated integers")
    external = {k: getattr(args, k) for k in ExternalInputs.__dataclass_fields__ if getattr(args, k) is not None}
    record = {"curve": curve, "p": args.p, "D": args.disc, "external": external,
              "options": {**OPTION_DEFAULTS, **_options(args)}}
    try:
        job = JobInput.from_record(record)
    except InputError as exc:
        print(f"kolycheck: invalid input: {exc}", file=sys.stderr)
        return EX_DATAERR
    report = run_job(job)
    _emit(render_text(report) if args.format == "text" else dumps(report), args.output)
    return EX_OK


if __name__ == "__main__":
    sys.exit(main())
