"""Command line interface: ``trusskit <command> ...``.

Exit codes: 0 success, 1 a check or validation failed, 2 malformed input.
Reports go to standard output as JSON; documents can be sent to a file with
``--out``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .computad import typecheck
from .diagram import canonicalise, is_canonical, progressive_failures, submersive_failures
from .normalize import normalize, normalize_oracle
from .ops import (
    atoms,
    compactify,
    compose,
    dualize,
    factorize,
    grid,
    is_atom,
    is_cell,
    sdepth,
    stype,
)
from .order import enumerate_monotone
from .render import emit_svg, realize, slices
from .truss import CLOSED, OPEN, TrussError, fiber_element, hom_intervals, validate

EXIT_OK, EXIT_FAIL, EXIT_MALFORMED = 0, 1, 2


class Malformed(Exception):
    pass


def _emit(args, payload, text: str | None = None):
    text = text if text is not None else io.dumps(payload)
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_valid(path):
    T = io.load_truss(path)
    errors = validate(T)
    if errors:
        raise _Invalid(errors)
    return T


class _Invalid(Exception):
    def __init__(self, violations):
        super().__init__("invalid truss")
        self.violations = violations


# -- commands -------------------------------------------------------------------


def cmd_validate(args):
    T = io.load_truss(args.file)
    errors = validate(T)
    _emit(args, {"valid": not errors, "violations": errors})
    return EXIT_FAIL if errors else EXIT_OK


def cmd_normalize(args):
    T = _load_valid(args.file)
    if args.oracle:
        nf = normalize_oracle(T, args.bound)
        _emit(args, io.truss_to_json(nf))
        return EXIT_OK
    res = normalize(T)
    if args.witness:
        _emit(args, {"nf": io.truss_to_json(res.nf), "witness": io.truss_to_json(res.witness)})
    else:
        _emit(args, io.truss_to_json(res.nf))
    return EXIT_OK


def cmd_dualize(args):
    _emit(args, io.truss_to_json(dualize(_load_valid(args.file))))
    return EXIT_OK


def cmd_compactify(args):
    _emit(args, io.truss_to_json(compactify(_load_valid(args.file))))
    return EXIT_OK


def cmd_grid(args):
    try:
        ms = [int(v) for v in args.sizes.split(",") if v.strip() != ""]
    except ValueError:
        raise Malformed(f"grid sizes must be comma separated integers, got {args.sizes!r}") from None
    if any(m < 0 for m in ms):
        raise Malformed("grid sizes must be nonnegative")
    _emit(args, io.truss_to_json(grid(args.flavor, *ms)))
    return EXIT_OK


def _atom_report(A):
    return {"stype": list(stype(A)), "sdepth": sdepth(A), "size": len(A.top)}


def cmd_atoms(args):
    T = _load_valid(args.file)
    if T.flavor != OPEN:
        T = dualize(T)
    _emit(args, {T.path(p): _atom_report(A) for p, A in atoms(T).items()})
    return EXIT_OK


def cmd_stype(args):
    T = _load_valid(args.file)
    if not (is_atom(T) or is_cell(T)):
        _emit(args, {"atom": False, "cell": False, "error": "not an atom or a cell"})
        return EXIT_FAIL
    rep = _atom_report(T)
    rep.update(atom=is_atom(T), cell=is_cell(T))
    _emit(args, rep)
    return EXIT_OK


def cmd_factorize(args):
    f = _load_valid(args.file)
    fz = factorize(f)
    N = fz.middle.ambient
    _emit(args, {"active": io.truss_to_json(fz.active), "inert": io.truss_to_json(fz.inert),
                 "middle": sorted(N.path(z) for z in fz.middle.top_set)})
    return EXIT_OK


def cmd_compose(args):
    f, g = _load_valid(args.first), _load_valid(args.second)
    _emit(args, io.truss_to_json(compose(f, g)))
    return EXIT_OK


def cmd_check_diagrammatic(args):
    T = _load_valid(args.file)
    bad = progressive_failures(T)
    _emit(args, {"diagrammatic": not bad, "failures": [T.path(p) for p in bad]})
    return EXIT_FAIL if bad else EXIT_OK


def cmd_check_submersive(args):
    f = _load_valid(args.file)
    bad = submersive_failures(f, exhaustive=args.exhaustive, bound=args.bound)
    _emit(args, {"submersive": not bad, "mode": "exhaustive" if args.exhaustive else "atoms",
                 "failures": [[f.path(x) for x in s] for s in bad]})
    return EXIT_FAIL if bad else EXIT_OK


def cmd_canonicalize(args):
    d = io.diagram_from_json(io.load_json(args.file))
    c = canonicalise(d)
    doc = io.diagram_to_json(c)
    doc["was_canonical"] = is_canonical(d)
    _emit(args, doc)
    return EXIT_OK


def cmd_typecheck(args):
    M = _load_valid(args.file)
    if M.labels is None:
        raise Malformed("typecheck needs a truss labelled by generator ids")
    sig = io.signature_from_json(io.load_json(args.signature))
    violations = typecheck(M.unlabelled(), M.labels, sig)
    _emit(args, {"ok": not violations, "violations": violations})
    return EXIT_FAIL if violations else EXIT_OK


def cmd_render(args):
    T = _load_valid(args.file)
    if T.dim <= 2:
        parts = [("", realize(T))]
    else:
        parts = slices(T)
        if T.dim > 3:
            raise Malformed("render handles trusses of dimension at most 3")
    if args.format == "json":
        payload = {p or "*": {"box": list(d.box), "points": {k: list(v) for k, v in d.points.items()},
                              "vertices": {k: list(v) for k, v in d.vertices.items()},
                              "wires": {k: [list(q) for q in v] for k, v in d.wires.items()},
                              "regions": {k: [list(q) for q in v] for k, v in d.regions.items()}}
                   for p, d in parts}
        _emit(args, payload)
        return EXIT_OK
    if len(parts) == 1:
        data = emit_svg(parts[0][1])
        if args.out:
            Path(args.out).write_bytes(data)
        else:
            sys.stdout.buffer.write(data)
        return EXIT_OK
    if not args.out:
        raise Malformed("rendering the slices of a 3-truss needs --out")
    out = Path(args.out)
    written = []
    for path, d in parts:
        name = "".join(ch if ch.isalnum() else "-" for ch in path)
        target = out.with_name(f"{out.stem}_{name}{out.suffix or '.svg'}")
        target.write_bytes(emit_svg(d))
        written.append(str(target))
    sys.stdout.write(io.dumps({"written": written}))
    return EXIT_OK


def cmd_homs(args):
    """All monotone maps between [n] and [m] with the hom relation they induce."""
    n, m = args.n, args.m
    out = []
    # open transitions run [n] -> [m]; closed ones [m] -> [n] for fibres [n] -> [m]
    dom, cod = (n, m) if args.flavor == OPEN else (m, n)
    for alpha in enumerate_monotone(dom, cod):
        iv = hom_intervals(args.flavor, alpha.values, n, m)
        pairs = [f"{fiber_element(args.flavor, p)}{io.ARROW}{fiber_element(args.flavor, q)}"
                 for p, (lo, hi) in enumerate(iv) for q in range(lo, hi + 1)]
        out.append({"map": list(alpha.values), "homs": pairs})
    _emit(args, {"flavor": args.flavor, "source": n, "target": m, "maps": out})
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trusskit", description="Framed combinatorial topology kernel.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *files, help=None):
        sp = sub.add_parser(name, help=help)
        for f in files:
            sp.add_argument(f)
        sp.add_argument("--out", help="write the result to this file")
        sp.set_defaults(fn=fn)
        return sp

    add("validate", cmd_validate, "file", help="check every truss law; exit 1 on violations")
    sp = add("normalize", cmd_normalize, "file", help="labelled normal form")
    sp.add_argument("--witness", action="store_true", help="also print the degeneracy witness")
    sp.add_argument("--oracle", action="store_true", help="use the exhaustive oracle")
    sp.add_argument("--bound", type=int, default=64)
    add("dualize", cmd_dualize, "file")
    add("compactify", cmd_compactify, "file")
    sp = add("grid", cmd_grid, "sizes", help="grid truss, sizes like 1,1")
    sp.add_argument("--flavor", choices=(OPEN, CLOSED), default=OPEN)
    add("atoms", cmd_atoms, "file")
    add("stype", cmd_stype, "file")
    add("factorize", cmd_factorize, "file")
    add("compose", cmd_compose, "first", "second")
    add("check-diagrammatic", cmd_check_diagrammatic, "file")
    sp = add("check-submersive", cmd_check_submersive, "file")
    sp.add_argument("--exhaustive", action="store_true")
    sp.add_argument("--bound", type=int, default=64)
    add("canonicalize", cmd_canonicalize, "file")
    add("typecheck", cmd_typecheck, "file", "signature")
    sp = add("render", cmd_render, "file")
    sp.add_argument("--format", choices=("svg", "json"), default="svg")
    sp = add("homs", cmd_homs, help="hom relation of every monotone map between two fibres")
    sp.add_argument("n", type=int)
    sp.add_argument("m", type=int)
    sp.add_argument("--flavor", choices=(OPEN, CLOSED), default=OPEN)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (io.DocumentError, Malformed) as exc:
        sys.stderr.write(f"malformed input: {exc}\n")
        return EXIT_MALFORMED
    except _Invalid as exc:
        sys.stdout.write(io.dumps({"valid": False, "violations": exc.violations}))
        return EXIT_FAIL
    except TrussError as exc:
        sys.stdout.write(io.dumps({"error": str(exc), "violations": exc.violations}))
        return EXIT_FAIL
    except ValueError as exc:
        sys.stderr.write(f"malformed input: {exc}\n")
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
