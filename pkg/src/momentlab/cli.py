"""Command-line front end.

Exit status: 0 when every verdict passes, 1 on a computational or I/O failure
(or a failed verdict), 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .config import ENV_PREFIX, KINDS, ExperimentSpec, load_spec
from .errors import ConfigError, LabError, NoAdmissibleTangent

log = logging.getLogger("momentlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# flags shared by every subcommand, mapped to spec keys
COMMON = (
    ("--d", "d", "ambient dimension"),
    ("--delta", "delta", "tube radius"),
    ("--deltas", "deltas", "delta ladder, e.g. 2^-3..2^-8 or 2^-4,2^-6"),
    ("--seed", "seed", "master seed"),
    ("--samples", "samples", "Monte Carlo samples per point"),
    ("--workers", "workers", "worker threads (default: all cores)"),
    ("--budget", "budget", "acceptance budget: quick or full"),
)

# extra flags per kind
EXTRA = {
    "tangency": (("--xlast", "last center coordinate"), ("--r", "scale of the tangent curve")),
    "intersect": (("--c1", "first curve 'x1,...,xd@r' (default unit curve)"), ("--c2", "second curve")),
    "tube-volume": (("--curve", "curve 'x1,...,xd@r'"), ("--method", "monte-carlo-box or tube-parametrized")),
    "intersection-volume": (("--c1", "first curve"), ("--c2", "second curve (default @1.5)"),
                            ("--perturb", "offset length as a fraction of delta, e.g. 1/4000 = 0.00025")),
    "example-mass": (("--s", "number of sup parameters"), ("--set", "union or focusing"),
                     ("--method", "voxel or monte-carlo"), ("--inflation", "tube radius in units of delta"),
                     ("--c-f", "focusing ball constant")),
    "maximal": (("--s", "number of sup parameters"), ("--mode", "lower-bound or focusing"),
                ("--inflation", "tube radius in units of delta"), ("--quadrature", "tube quadrature nodes"),
                ("--stride", "evaluate every k-th parameter node"), ("--c-f", "focusing ball constant")),
    "dimension": (("--set", "union, segment or cube"), ("--s-prime", "free parameters of the union set"),
                  ("--scales", "box sizes"), ("--inflation", "tube radius in units of delta")),
    "multiplier-decay": (("--ray", "high0 or high1"), ("--direction", "explicit direction"),
                         ("--r", "dilation"), ("--rs", "frequency ladder")),
    "symbol-check": (("--b", "constant B"), ("--ks", "levels k")),
    "bernstein": (("--s", "dimension of the torus"), ("--p", "exponent"), ("--rs", "band limits"),
                  ("--trials", "random fields per R")),
    "acceptance": (),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser):
    for flag, _, help_ in COMMON:
        p.add_argument(flag, help=help_)
    p.add_argument("--out", help="result file (stdout when absent)")
    p.add_argument("--format", choices=("csv", "json"), help="result format (default csv)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="any other experiment parameter; repeatable")
    p.add_argument("--verbose", "-v", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="momentlab",
        description="Numerical experiments on tubes around moment curves and their maximal averages.",
        epilog=f"Environment variables {ENV_PREFIX}<KEY> (e.g. {ENV_PREFIX}SEED=3) override spec-file "
               "values; command-line flags override both.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--spec", help="specification file (flags win over its values)")
        _add_common(p)
        for flag, help_ in EXTRA[kind]:
            p.add_argument(flag, help=help_)
    p = sub.add_parser("run", help="run an experiment described by a specification file")
    p.add_argument("--spec", required=True, help="specification file")
    _add_common(p)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    out = {}
    for flag, key, _ in COMMON:
        out[key] = getattr(args, flag[2:].replace("-", "_"))
    for key in {flag[2:] for flags in EXTRA.values() for flag, _ in flags}:
        out[key] = getattr(args, key.replace("-", "_"), None)
    for item in args.param:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    out["output"] = args.out
    out["format"] = args.format
    return out


def make_spec(args: argparse.Namespace, environ=None) -> ExperimentSpec:
    if args.spec:
        spec = load_spec(args.spec)
        if args.command != "run" and spec.kind != args.command:
            raise ConfigError(f"specification kind {spec.kind!r} does not match subcommand {args.command!r}")
    else:
        spec = ExperimentSpec(args.command)
    spec = spec.with_env(environ)
    spec = spec.merged(_overrides(args))
    if not spec.has("workers"):
        spec = spec.merged({"workers": os.cpu_count() or 1})
    return spec.validate()


def _write(path: str, text: str):
    Path(path).write_text(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    start = time.perf_counter()
    try:
        spec = make_spec(args)
    except (ConfigError, NoAdmissibleTangent) as err:
        print(f"momentlab: configuration error: {err}", file=sys.stderr)
        return EXIT_USAGE
    log.info("spec:\n%s", spec.serialize().rstrip())
    log.info("config hash %s, seed %d", spec.content_hash(), spec.seed)

    from .experiments import run

    try:
        result = run(spec)
    except (ConfigError, NoAdmissibleTangent) as err:
        print(f"momentlab: configuration error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except LabError as err:
        print(f"momentlab: computation failed ({err.code}): {err}", file=sys.stderr)
        return EXIT_FAIL
    finally:
        log.info("wall time %.2f s", time.perf_counter() - start)

    text = result.render(spec.format)
    if spec.output:
        try:
            _write(spec.output, text)
        except OSError as err:
            print(f"momentlab: cannot write {spec.output}: {err.strerror or err}", file=sys.stderr)
            return EXIT_FAIL
    else:
        sys.stdout.write(text)
    # summaries go to stderr so that stdout stays a clean csv or json document
    for note in result.notes:
        print(note, file=sys.stderr)
    for v in result.verdicts:
        print(v.line(), file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
