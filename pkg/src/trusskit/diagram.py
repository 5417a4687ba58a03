"""Diagrammatic trusses, submersive bordisms and combinatorial manifold diagrams.

A diagrammatic n-truss is an open truss labelled in [n] (the dimension of
each stratum's codimension complement) in which every atom is progressive:
the normalized subatom at each element has singular depth equal to the
element's label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .normalize import normalize
from .ops import (
    Subtruss,
    TrussError,
    classify,
    compose,
    dualize,
    factorize,
    inert_embedding,
    is_atom,
    is_bordism,
    is_subtruss_set,
    sdepth,
    source,
    subtower,
    target,
)
from .truss import CLOSED, OPEN, TrussTower, validate


def _check_dimension_labels(T: TrussTower):
    if T.flavor != OPEN:
        raise TrussError("diagrammatic trusses are open")
    if T.labels is None:
        raise TrussError("diagrammatic trusses need dimension labels")
    for x, v in T.labels.items():
        if not isinstance(v, (int, np.integer)) or not 0 <= v <= T.dim:
            raise TrussError(f"label {v!r} of {T.path(x)} is not in [{T.dim}]")
    for a, b in T.top.covers():
        if T.labels[a] > T.labels[b]:
            raise TrussError(f"labels decrease along {T.path(a)} <= {T.path(b)}")


def nf_depth(A: TrussTower) -> int:
    """Singular depth of the normal form of a labelled atom."""
    N = normalize(A).nf
    if not is_atom(N):
        raise TrussError("normal form of an atom is not an atom")
    return sdepth(N)


def progressive_failures(T: TrussTower) -> list:
    """Elements p whose atom normalizes to a depth other than the label of p."""
    _check_dimension_labels(T)
    bad = []
    for p in T.top.elements:
        A = subtower(T, T.top.upward_closure({p})).sub
        if nf_depth(A) != T.labels[p]:
            bad.append(p)
    return bad


def is_progressive(A: TrussTower) -> bool:
    """Whether every element of the labelled atom A is progressive."""
    if not is_atom(A):
        raise TrussError("is_progressive expects an atom")
    return not progressive_failures(A)


def is_diagrammatic(T: TrussTower) -> bool:
    if validate(T):
        return False
    try:
        return not progressive_failures(T)
    except TrussError:
        return False


def dimension_labels_of_atoms(T: TrussTower) -> dict:
    """The labelling p -> sdepth(atom(p)); makes any grid diagrammatic."""
    from .ops import atom_at

    return {p: sdepth(atom_at(T, p)) for p in T.top.elements}


# -- submersive bordisms ------------------------------------------------------


class BoundError(ValueError):
    pass


def _restricted_active(f: TrussTower, sub: Subtruss):
    """Active part of f restricted to a subtruss of its source, and its middle."""
    g = compose(inert_embedding(sub), f)
    fz = factorize(g)
    return fz.active, fz.middle


def _nf_match(f: TrussTower, sub: Subtruss) -> bool:
    _, Z = _restricted_active(f, sub)
    return normalize(sub.sub).nf == normalize(Z.sub).nf


def upsets(P, bound: int = 4096) -> list:
    """All nonempty upward closed subsets of P (as frozensets)."""
    principal = {frozenset(P.upward_closure({x})) for x in P.elements}
    seen = set(principal)
    frontier = list(principal)
    while frontier:
        nxt = []
        for U in frontier:
            for V in principal:
                W = U | V
                if W not in seen:
                    seen.add(W)
                    nxt.append(W)
                    if len(seen) > bound:
                        raise BoundError(f"more than {bound} upward closed sets")
        frontier = nxt
    return sorted(seen, key=lambda s: (len(s), sorted(map(repr, s))))


def submersive_failures(f: TrussTower, exhaustive: bool = False, bound: int = 64) -> list:
    """Checked subtrusses (as top sets of the source) where normal forms differ."""
    if not is_bordism(f) or f.flavor != OPEN:
        raise TrussError("is_submersive expects an open bordism")
    if f.labels is None:
        raise TrussError("is_submersive expects a labelled bordism")
    S0 = source(f)
    if exhaustive:
        if len(S0.top) > bound:
            raise BoundError(f"source has {len(S0.top)} elements, bound is {bound}")
        candidates = []
        for U in upsets(S0.top):
            if is_subtruss_set(S0, U):
                sub = subtower(S0, U)
                if is_atom(normalize(sub.sub).nf):
                    candidates.append(sub)
    else:
        candidates = [subtower(S0, S0.top.upward_closure({p})) for p in S0.top.elements]
    return [sorted(sub.top_set, key=repr) for sub in candidates if not _nf_match(f, sub)]


def is_submersive(f: TrussTower, exhaustive: bool = False, bound: int = 64) -> bool:
    return not submersive_failures(f, exhaustive, bound)


# -- combinatorial diagrams -----------------------------------------------------


@dataclass
class CombinatorialDiagram:
    X: TrussTower  # closed, unlabelled
    S: TrussTower  # diagrammatic
    frame: TrussTower  # open bordism dualize(X) -> S, unlabelled


def make_diagram(X: TrussTower, S: TrussTower, frame: TrussTower, check_diagrammatic: bool = True):
    if X.flavor != CLOSED:
        raise TrussError("the frame truss must be closed")
    if not is_bordism(frame) or frame.flavor != OPEN:
        raise TrussError("the frame must be an open bordism")
    errors = validate(frame)
    if errors:
        raise TrussError(f"invalid frame: {errors[0]}", errors)
    frame = frame.unlabelled()
    if source(frame) != dualize(X.unlabelled()):
        raise TrussError("frame source is not the dual of X")
    if target(frame) != S.unlabelled():
        raise TrussError("frame target is not the diagram truss")
    if check_diagrammatic and not is_diagrammatic(S):
        raise TrussError("diagram truss is not diagrammatic")
    return CombinatorialDiagram(X.unlabelled(), S, frame)


def is_canonical(d: CombinatorialDiagram) -> bool:
    return classify(d.frame).active


def canonicalise(d: CombinatorialDiagram) -> CombinatorialDiagram:
    """Restrict the diagram to the part the frame reaches."""
    fz = factorize(d.frame)
    sub = subtower(d.S, fz.middle.top_set)
    return CombinatorialDiagram(d.X, sub.sub, fz.active.unlabelled())


def canonical_inclusion(d: CombinatorialDiagram):
    """The inert bordism from canonicalise(d).S into d.S."""
    fz = factorize(d.frame)
    return inert_embedding(subtower(d.S, fz.middle.top_set))


@dataclass
class DiagramMap:
    src: CombinatorialDiagram
    dst: CombinatorialDiagram
    bordism: TrussTower  # labelled bordism src.S -> dst.S


def diagram_map(d0: CombinatorialDiagram, d1: CombinatorialDiagram, h: TrussTower,
                check_submersive: bool = True) -> DiagramMap:
    if d0.X != d1.X:
        raise TrussError("diagrams live on different frames")
    if source(h) != d0.S or target(h) != d1.S:
        raise TrussError("map endpoints do not match the diagrams")
    if compose(d0.frame, h.unlabelled()) != d1.frame:
        raise TrussError("map does not commute with the frames")
    if check_submersive and not is_submersive(h):
        raise TrussError("map is not submersive")
    return DiagramMap(d0, d1, h)


def compose_diagram_map(m1: DiagramMap, m2: DiagramMap) -> DiagramMap:
    if m1.dst.S != m2.src.S or m1.dst.X != m2.src.X:
        raise TrussError("maps are not composable")
    h = compose(m1.bordism, m2.bordism)
    return diagram_map(m1.src, m2.dst, h, check_submersive=False)


def identity_map(d: CombinatorialDiagram) -> DiagramMap:
    from .ops import identity_bordism

    return DiagramMap(d, d, identity_bordism(d.S))
