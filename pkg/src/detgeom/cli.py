"""Command-line interface: ``detgeom {embed,decode,simulate,distances,figure}``.

Symbol indices are 1-based in everything the CLI prints or writes.

Exit codes: 0 ok, 1 usage, 2 invalid channel spec, 3 erasure (observation
without an embedding), 4 geometric/Bayes decoder disagreement, 5 estimator
failure, 6 figure invariant failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._mathutil import fmt
from .channels import DiscreteChannel, load_channel_spec, log_posterior
from .detection import decide, decide_repetition, decide_sequence, simulate_error_rate
from .distances import (
    DEFAULT_POINTS,
    DEFAULT_SAMPLES,
    codebook_table,
    default_method,
    symbol_distance_table,
    write_symbol_table_csv,
)
from .errors import (
    EnumerationCapError,
    ErasureError,
    EstimatorError,
    NonUniformPriorError,
    SpecError,
    UnknownObservationError,
)
from .figures import figure_discrete, figure_locus
from .geometry import embed_log_posterior, symbol_matrix, symbol_spacing
from .sequence import sequence_posterior
from .tolerances import FIGURE_TOL

DEFAULT_SEED = 0x5EED

EXIT_USAGE, EXIT_SPEC, EXIT_ERASURE, EXIT_DISAGREE, EXIT_ESTIMATOR, EXIT_FIGURE = 1, 2, 3, 4, 5, 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _build_parser():
    parser = _Parser(prog="detgeom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"detgeom {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_default="."):
        p.add_argument("--spec", required=True, help="channel spec JSON file")
        p.add_argument("--seed", type=_u64, default=DEFAULT_SEED, help="64-bit seed (default 0x5EED)")
        p.add_argument("--out", default=out_default, help="output directory")

    p = sub.add_parser("embed", help="symbol and observation embeddings")
    common(p)
    p.add_argument("--obs", nargs="*", default=[], help="observations to embed")
    p.add_argument("--stdin", action="store_true", help="read observations from stdin, one per line")

    p = sub.add_parser("decode", help="MAP decisions")
    common(p, out_default=None)
    p.add_argument("--obs", nargs="*", default=[])
    p.add_argument("--stdin", action="store_true")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--repetition", type=int, metavar="M", help="treat the M observations as repetitions of one symbol")
    group.add_argument("--sequence", action="store_true", help="decode the observations as one codeword")

    p = sub.add_parser("simulate", help="Monte Carlo error rates with dual decoding")
    common(p)
    p.add_argument("--repetitions", type=int, nargs="+", default=[1], metavar="M")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("distances", help="expected squared distance tables")
    common(p)
    p.add_argument("--method", choices=["auto", "exact", "quadrature", "mc", "both"], default="auto")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--codebook", help="file with one codeword per line (comma-separated 1-based indices)")

    p = sub.add_parser("figure", help="SVG/CSV pictures of the embedding plane")
    common(p)
    p.add_argument("--ymin", type=float, default=-5.0)
    p.add_argument("--ymax", type=float, default=5.0)
    p.add_argument("--ypoints", type=int, default=201)
    return parser


def _header(cmd, spec, args, **extra):
    items = " ".join(f"{k}={v}" for k, v in extra.items())
    text = f"detgeom {__version__} command={cmd} spec_sha256={spec.digest} seed={args.seed}"
    return f"{text} {items}".rstrip()


def _observations(args, channel):
    raw = list(args.obs)
    if args.stdin:
        raw += [line.strip() for line in sys.stdin if line.strip()]
    if isinstance(channel, DiscreteChannel):
        return raw
    try:
        return [float(r) for r in raw]
    except ValueError as exc:
        raise UsageError(f"observations must be real numbers: {exc}") from None


def _load(args):
    spec = load_channel_spec(args.spec)
    problems = spec.channel.validate()
    if problems:
        raise SpecError("; ".join(problems))
    return spec


def _write(out, name, text):
    path = Path(out) / name
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def _row(values):
    return ", ".join(fmt(v) for v in values)


# ---------------------------------------------------------------------- embed


def cmd_embed(args):
    spec = _load(args)
    ch, prior = spec.channel, spec.prior
    obs = _observations(args, ch)
    header = _header("embed", spec, args)
    n = ch.n
    coord_cols = ",".join(f"c{k}" for k in range(1, n + 1))
    lines = [f"# {header}", f"index,label,{coord_cols}"]
    for i, (label, x) in enumerate(zip(ch.alphabet.labels, symbol_matrix(n))):
        lines.append(f"{i + 1},{label}," + ",".join(fmt(v) for v in x))
    _write(args.out, "symbols.csv", "\n".join(lines) + "\n")
    print(f"symbols ({n}), spacing {fmt(symbol_spacing(n))}:")
    for i, x in enumerate(symbol_matrix(n)):
        print(f"  x{i + 1}: {_row(x)}")
    if obs:
        lines = [f"# {header}", f"observation,{coord_cols}"]
        print("observations:")
        for o in obs:
            y = embed_log_posterior(log_posterior(ch, o, prior))
            lines.append(f"{o}," + ",".join(fmt(v) for v in y))
            print(f"  {o}: {_row(y)}")
        _write(args.out, "observations.csv", "\n".join(lines) + "\n")
    return 0


# --------------------------------------------------------------------- decode


def _describe(dec):
    name = f"x{dec.chosen_index + 1}"
    if dec.tie:
        others = ", ".join(f"x{i + 1}" for i in dec.tied if i != dec.chosen_index)
        name += f" (TIE with {others})"
    return f"{name}, posterior {fmt(dec.posterior[dec.chosen_index])}"


def cmd_decode(args):
    spec = _load(args)
    ch, prior = spec.channel, spec.prior
    obs = _observations(args, ch)
    if not obs:
        raise UsageError("no observations given (use --obs or --stdin)")
    rows = []
    if args.repetition is not None:
        if args.repetition != len(obs):
            raise UsageError(f"--repetition {args.repetition} needs exactly that many observations, got {len(obs)}")
        dec = decide_repetition(ch, obs, prior)
        decisions = [(" ".join(str(o) for o in obs), dec)]
    elif args.sequence:
        cw = decide_sequence(ch, obs, prior)
        p = sequence_posterior(ch, obs, cw, prior)
        word = " ".join(f"x{c + 1}" for c in cw)
        print(f"{word}, posterior {fmt(p)}")
        rows.append(f"{' '.join(str(o) for o in obs)},{word},{fmt(p)},,")
        decisions = []
    else:
        decisions = [(str(o), decide(ch, o, prior)) for o in obs]
    for label, dec in decisions:
        prefix = "" if args.repetition is not None else f"{label}: "
        print(prefix + _describe(dec))
        print(f"  posterior: {_row(dec.posterior)}")
        print(f"  margin: {fmt(dec.margin)}")
        print(f"  tie: {'true' if dec.tie else 'false'}")
        rows.append(
            f"{label},x{dec.chosen_index + 1},{fmt(dec.posterior[dec.chosen_index])},"
            f"{fmt(dec.margin)},{int(dec.tie)}"
        )
    if args.out is not None:
        text = f"# {_header('decode', spec, args)}\nobservations,decision,posterior,margin,tie\n"
        _write(args.out, "decisions.csv", text + "\n".join(rows) + "\n")
    return 0


# ------------------------------------------------------------------- simulate


def cmd_simulate(args):
    spec = _load(args)
    ch, prior = spec.channel, spec.prior
    if args.trials < 1 or any(m < 1 for m in args.repetitions) or args.workers < 1:
        raise UsageError("trials, repetitions and workers must be positive")
    status = 0
    parts = []
    for m in args.repetitions:
        res = simulate_error_rate(ch, m, args.trials, args.seed, prior, workers=args.workers)
        csv = res.to_csv()
        parts.append(csv if not parts else csv.split("\n", 1)[1])
        print(
            f"M={m}: error rate {fmt(res.error_rate)}, erasures {int(res.erasures.sum())}, "
            f"agreement {res.agreements}/{res.decoded}"
        )
        if not res.all_agree:
            print(f"geometric and Bayes decoders disagreed at M={m}", file=sys.stderr)
            status = EXIT_DISAGREE
    header = _header("simulate", spec, args, trials=args.trials, repetitions=",".join(map(str, args.repetitions)))
    _write(args.out, "simulation.csv", f"# {header}\n" + "".join(parts))
    return status


# ------------------------------------------------------------------ distances


def _read_codebook(path, n):
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            word = tuple(int(t) - 1 for t in line.replace(" ", "").split(","))
        except ValueError:
            raise UsageError(f"bad codeword line {line!r}") from None
        if any(not 0 <= c < n for c in word):
            raise UsageError(f"codeword {line!r} has indices outside 1..{n}")
        words.append(word)
    return words


def cmd_distances(args):
    spec = _load(args)
    ch, prior = spec.channel, spec.prior
    if args.method == "both":
        methods = [default_method(ch), "mc"]
    elif args.method == "auto":
        methods = [default_method(ch)]
    else:
        methods = [args.method]
    codebook = _read_codebook(args.codebook, ch.n) if args.codebook else None
    opts = dict(samples=args.samples, points=args.points, seed=args.seed)
    tables = [symbol_distance_table(ch, prior, method=m, **opts) for m in methods]
    header = _header("distances", spec, args, method=args.method, samples=args.samples, points=args.points)
    _write(args.out, "ds.csv", write_symbol_table_csv(tables, header))
    for t in tables:
        print(f"d_s ({t.method}):")
        for i, row in enumerate(t.values):
            print(f"  x{i + 1}: {_row(row)}")
        for i, j in t.self_distance_violations():
            print(f"  note: d_s(x{i + 1},x{i + 1}) exceeds d_s(x{i + 1},x{j + 1})")
    if codebook is not None:
        books = [codebook_table(ch, codebook, prior, method=m, **opts) for m in methods]
        text = books[0].to_csv(header)
        for b in books[1:]:
            text += b.to_csv().split("\n", 1)[1]
        _write(args.out, "dv.csv", text)
        for b in books:
            a, c = b.min_pair
            print(
                f"d_v ({b.method}) minimum off-diagonal pair: codewords {a + 1} and {c + 1}, "
                f"value {fmt(b.values[a, c])}"
            )
    return 0


# --------------------------------------------------------------------- figure


def cmd_figure(args):
    spec = _load(args)
    ch, prior = spec.channel, spec.prior
    header = _header("figure", spec, args, ymin=fmt(args.ymin), ymax=fmt(args.ymax), ypoints=args.ypoints)
    failures = []
    spacing = symbol_spacing(ch.n)
    if isinstance(ch, DiscreteChannel):
        name = "figure1"
        fig = figure_discrete(ch, prior)
    else:
        if args.ypoints < 1:
            raise UsageError("--ypoints must be positive")
        name = "figure2" if ch.kind == "awgn" else "figure3"
        fig = figure_locus(ch, np.linspace(args.ymin, args.ymax, args.ypoints), prior)
    c = fig.checks
    print(f"triangle side: {fmt(c['triangle_side'])} (expected {fmt(spacing)})")
    if abs(c["triangle_side"] - spacing) > FIGURE_TOL or c["side_spread"] > FIGURE_TOL:
        failures.append("symbol embeddings are not equidistant")
    if isinstance(ch, DiscreteChannel):
        ties = " ".join(c["tie_observations"]) or "none"
        print(f"tie observations: {ties}; bisector residual: {fmt(c['bisector_residual'])}")
        if c["bisector_residual"] > FIGURE_TOL:
            failures.append("tie observations off their bisectors")
    elif ch.kind == "awgn":
        print(f"collinearity residual: {fmt(c['collinearity_residual'])}")
        if c["collinearity_residual"] > FIGURE_TOL:
            failures.append("AWGN locus is not a line")
    else:
        print(f"pieces: {c['pieces']}, saturation points: {c['saturation_points']}")
        if args.ypoints > 1:
            values = ch.alphabet.values
            inner = sum(args.ymin < v < args.ymax for v in values)
            want_sat = int(args.ymin < min(values)) + int(args.ymax > max(values))
            if c["pieces"] != inner + 1 or c["saturation_points"] != want_sat:
                failures.append(f"expected {inner + 1} pieces and {want_sat} saturation points")
    _write(args.out, f"{name}.csv", fig.to_csv(header))
    written = [f"{name}.csv"]
    if ch.n == 3:
        _write(args.out, f"{name}.svg", fig.to_svg(header))
        written.insert(0, f"{name}.svg")
    print("wrote " + ", ".join(written))
    if failures:
        for f in failures:
            print(f"invariant check failed: {f}", file=sys.stderr)
        return EXIT_FIGURE
    return 0


COMMANDS = {
    "embed": cmd_embed,
    "decode": cmd_decode,
    "simulate": cmd_simulate,
    "distances": cmd_distances,
    "figure": cmd_figure,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out = getattr(args, "out", None)
    try:
        if not Path(args.spec).is_file():
            raise UsageError(f"spec file {args.spec} not found")
        if out is not None and not Path(out).is_dir():
            raise UsageError(f"output directory {out} does not exist")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"detgeom: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnknownObservationError, EnumerationCapError) as exc:
        print(f"detgeom: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecError, NonUniformPriorError) as exc:
        print(f"detgeom: invalid channel spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except ErasureError as exc:
        print(
            f"detgeom: {exc}\n  the representation needs every posterior to be positive; "
            "observations that rule out an input symbol (e.g. erasures) cannot be embedded",
            file=sys.stderr,
        )
        return EXIT_ERASURE
    except EstimatorError as exc:
        print(f"detgeom: estimator failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR


if __name__ == "__main__":
    sys.exit(main())
