"""Command-line interface.

Exit codes: 0 success, 1 usage or parse error, 2 violated mathematical
precondition (non-monotone filtration, incompatible map).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .complexes import (
    ComplexError,
    FiltrationError,
    ParseError,
    SimplicialMap,
    build_extended,
    parse_complex,
    parse_map,
)
from .decomposition import decompose
from .diagram import diagram_svg
from .distances import bottleneck, certificate_to_text, construct_certificate
from .experiments import MODES, run_stability
from .homology import extended_module, morphism_module, persistence_module
from .modules import Barcode, barcode_from_csv, barcode_to_csv, cokernel, image, kernel, synthesize
from .scalars import ext, is_prime

EXIT_USAGE = 1
EXIT_MATH = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_field() -> int:
    raw = os.environ.get("PERSIST_FIELD", "2")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PERSIST_FIELD must be an integer, got {raw!r}") from None


def _field(p: int | None) -> int:
    p = _default_field() if p is None else p
    if not is_prime(p):
        raise UsageError(f"field characteristic must be prime, got {p}")
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(str(exc)) from None


def _degrees(args, dim: int) -> list[int]:
    return [args.degree] if args.degree is not None else list(range(max(dim, 0) + 1))


def cmd_barcode(args) -> int:
    fc = parse_complex(_read(args.complex))
    p = _field(args.field)
    b = Barcode()
    if len(fc.complex):
        for k in _degrees(args, fc.complex.dimension):
            b = b + decompose(persistence_module(fc, k, p), k)
    sys.stdout.write(barcode_to_csv(b))
    return 0


def cmd_extended(args) -> int:
    s = ext(args.spacing)
    if not s.is_finite or s <= 0:
        raise UsageError(f"--spacing must be positive, got {args.spacing}")
    fc = parse_complex(_read(args.complex))
    p = _field(args.field)
    pf = build_extended(fc, s)
    b = Barcode()
    if len(fc.complex):
        for k in _degrees(args, fc.complex.dimension):
            b = b + decompose(extended_module(pf, k, p), k)
    sys.stdout.write(barcode_to_csv(b))
    return 0


def _read_barcode(path: str) -> Barcode:
    try:
        return barcode_from_csv(_read(path))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def cmd_bottleneck(args) -> int:
    a, b = _read_barcode(args.a), _read_barcode(args.b)
    degrees = [args.degree] if args.degree is not None else sorted(set(a.degrees()) | set(b.degrees())) or [0]
    results = {k: bottleneck(a, b, k) for k in degrees}
    overall = max(d for d, _ in results.values())
    print(overall)
    if args.per_degree:
        for k, (d, _) in results.items():
            print(f"H{k} {d}")
    if args.witness:
        for k, (_, m) in results.items():
            for x, y in m.pairs:
                print(f"H{k} match {x} {y}")
            for x in m.unmatched_a:
                print(f"H{k} unmatched-a {x}")
            for y in m.unmatched_b:
                print(f"H{k} unmatched-b {y}")
    return 0


def cmd_certificate(args) -> int:
    a, b = _read_barcode(args.a), _read_barcode(args.b)
    p = _field(args.field)
    f, g = synthesize(a, args.degree, p), synthesize(b, args.degree, p)
    cert = construct_certificate(f, g, ext(args.eps))
    if cert is None:
        print(f"no {args.eps}-interleaving", file=sys.stderr)
        return 3
    sys.stdout.write(certificate_to_text(cert))
    return 0


def cmd_kic(args) -> int:
    x = parse_complex(_read(args.complex_x))
    y = parse_complex(_read(args.complex_y))
    try:
        h = SimplicialMap(y.complex, x.complex, parse_map(_read(args.map)))
    except ComplexError as exc:
        raise ParseError(str(exc)) from None
    p = _field(args.field)
    out = {"kernel": Barcode(), "image": Barcode(), "cokernel": Barcode()}
    top = max(x.complex.dimension, y.complex.dimension)
    for k in _degrees(args, top):
        mor = morphism_module(h, x, y, k, p)
        out["kernel"] += decompose(kernel(mor), k)
        out["image"] += decompose(image(mor), k)
        out["cokernel"] += decompose(cokernel(mor), k)
    if args.out_prefix:
        for name, b in out.items():
            Path(f"{args.out_prefix}{name}.csv").write_text(barcode_to_csv(b), encoding="utf-8")
    else:
        for name, b in out.items():
            sys.stdout.write(f"# {name}\n{barcode_to_csv(b)}")
    return 0


def cmd_stability(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    fields = [int(v) for v in args.field.split(",")] if args.field else [_default_field()]
    for p in fields:
        _field(p)
    report = run_stability(args.mode, args.trials, args.seed, args.vertices, args.dim, fields, args.jobs)
    sys.stdout.write(report.summary())
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    return 0 if report.violations == 0 else EXIT_MATH


def cmd_diagram(args) -> int:
    b = _read_barcode(args.csv)
    svg = diagram_svg(b, args.degree)
    if args.out:
        Path(args.out).write_text(svg, encoding="utf-8")
    else:
        sys.stdout.write(svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="persmod", description="Persistence modules, barcodes and interleaving distances.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, degree=True):
        if degree:
            sp.add_argument("--degree", type=int, default=None, help="homology degree (default: all)")
        sp.add_argument("--field", type=int, default=None, help="prime p (default: $PERSIST_FIELD or 2)")

    sp = sub.add_parser("barcode", help="barcode of a sublevel filtration")
    sp.add_argument("complex")
    common(sp)
    sp.set_defaults(func=cmd_barcode)

    sp = sub.add_parser("extended", help="extended-persistence barcode")
    sp.add_argument("complex")
    common(sp)
    sp.add_argument("--spacing", default="1")
    sp.set_defaults(func=cmd_extended)

    sp = sub.add_parser("bottleneck", help="bottleneck distance of two barcode CSVs")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--witness", action="store_true", help="dump an optimal matching")
    sp.add_argument("--per-degree", action="store_true")
    sp.set_defaults(func=cmd_bottleneck)

    sp = sub.add_parser("certificate", help="eps-interleaving certificate for two barcodes")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--degree", type=int, default=0)
    sp.add_argument("--field", type=int, default=None)
    sp.set_defaults(func=cmd_certificate)

    sp = sub.add_parser("kic", help="kernel, image and cokernel barcodes of a map Y -> X")
    sp.add_argument("complex_x")
    sp.add_argument("complex_y")
    sp.add_argument("map")
    common(sp)
    sp.add_argument("--out-prefix", default=None)
    sp.set_defaults(func=cmd_kic)

    sp = sub.add_parser("stability", help="randomised stability experiment")
    sp.add_argument("--mode", choices=MODES, default="ordinary")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", default="0")
    sp.add_argument("--vertices", type=int, default=8)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--field", default=None, help="prime or comma-separated primes, cycled over trials")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--csv", default=None, help="write per-trial records here")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("diagram", help="SVG persistence diagram of a barcode CSV")
    sp.add_argument("csv")
    sp.add_argument("--out", default=None)
    sp.add_argument("--degree", type=int, default=None)
    sp.set_defaults(func=cmd_diagram)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FiltrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MATH
    except (ParseError, UsageError, ComplexError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
