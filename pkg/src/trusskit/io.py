"""JSON documents for trusses, diagrams and signatures.

Element names are canonical paths ("r0/s1", "*" for the point, "1:s0" over
a non-point base).  Transitions are keyed "p→q"; reflexive pairs are
omitted on output and filled with identities on input.
"""

from __future__ import annotations

import json

from .computad import Generator, Signature, free_signature
from .diagram import CombinatorialDiagram, make_diagram
from .order import FinitePoset, PosetError
from .truss import FLAVORS, TrussTower, identity_values

ARROW = "→"


class DocumentError(ValueError):
    """The input is not a well-formed document."""


def _base_to_json(P: FinitePoset):
    if len(P) == 1 and P.elements == (0,):
        return "point"
    k = len(P) - 1
    if P == FinitePoset.chain(k) and P.elements == tuple(range(k + 1)):
        return f"chain:{k}"
    return {"elements": list(P.elements), "leq": [[a, b] for a, b in P.covers()]}


def _base_from_json(obj) -> FinitePoset:
    if obj == "point":
        return FinitePoset.point()
    if isinstance(obj, str) and obj.startswith("chain:"):
        try:
            k = int(obj[6:])
        except ValueError:
            raise DocumentError(f"bad base {obj!r}") from None
        if k < 0:
            raise DocumentError(f"bad base {obj!r}")
        return FinitePoset.chain(k)
    if isinstance(obj, dict) and "elements" in obj:
        elems = obj["elements"]
        if not isinstance(elems, list) or not all(isinstance(e, (str, int)) for e in elems):
            raise DocumentError("base elements must be a list of strings or integers")
        try:
            return FinitePoset.from_relation(elems, [tuple(p) for p in obj.get("leq", [])])
        except (PosetError, TypeError) as exc:
            raise DocumentError(f"bad base poset: {exc}") from None
    raise DocumentError(f"bad base {obj!r}")


def truss_to_json(T: TrussTower) -> dict:
    levels = []
    for k in range(1, T.dim + 1):
        P = T.poset(k - 1)
        fib = {T.path(x): T.fibers[k - 1][x] for x in P.elements}
        tr = {f"{T.path(p)}{ARROW}{T.path(q)}": list(T.transitions[k - 1][(p, q)])
              for p, q in P.relations() if p != q}
        levels.append({"fibers": fib, "transitions": tr})
    doc = {"kind": T.flavor, "dim": T.dim, "base": _base_to_json(T.base), "levels": levels}
    if T.labels is not None:
        doc["labels"] = {T.path(x): T.labels[x] for x in T.top.elements}
        if T.label_order is not None:
            doc["label_order"] = T.label_order
    return doc


def truss_from_json(doc) -> TrussTower:
    """Parse a truss document.  Structural problems raise DocumentError;
    violations of the truss laws are left for validate()."""
    if not isinstance(doc, dict):
        raise DocumentError("a truss document is a JSON object")
    kind = doc.get("kind")
    if kind not in FLAVORS:
        raise DocumentError(f"kind must be one of {FLAVORS}, got {kind!r}")
    levels = doc.get("levels")
    if not isinstance(levels, list):
        raise DocumentError("levels must be a list")
    if "dim" in doc and doc["dim"] != len(levels):
        raise DocumentError(f"dim is {doc['dim']} but {len(levels)} levels are given")
    base = _base_from_json(doc.get("base", "point"))
    T = TrussTower(kind, base, [], [])
    fibers, trans = [], []
    for k, lv in enumerate(levels, start=1):
        if not isinstance(lv, dict) or not isinstance(lv.get("fibers"), dict):
            raise DocumentError(f"level {k} needs a fibers object")
        fib = {}
        for key, n in lv["fibers"].items():
            if not isinstance(n, int) or isinstance(n, bool):
                raise DocumentError(f"level {k}: fibre length of {key!r} is not an integer")
            fib[_element(T, key, k)] = n
        tr = {}
        for key, vals in lv.get("transitions", {}).items():
            parts = key.replace("->", ARROW).split(ARROW)
            if len(parts) != 2:
                raise DocumentError(f"level {k}: bad transition key {key!r}")
            if not isinstance(vals, list) or not all(isinstance(v, int) for v in vals):
                raise DocumentError(f"level {k}: transition {key!r} is not a list of integers")
            tr[(_element(T, parts[0], k), _element(T, parts[1], k))] = tuple(vals)
        for x, n in fib.items():
            tr.setdefault((x, x), identity_values(n))
        fibers.append(fib)
        trans.append(tr)
        T = TrussTower(kind, base, fibers, trans)
    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, dict):
            raise DocumentError("labels must be an object")
        lab = {_element(T, key, T.dim + 1): v for key, v in labels.items()}
        T = T.with_labels(lab, doc.get("label_order"))
    return T


def _element(T: TrussTower, key: str, k: int):
    """Element named ``key`` of the level-(k-1) poset."""
    try:
        x = T.element(key)
    except (ValueError, KeyError) as exc:
        raise DocumentError(f"level {k}: unknown element {key!r} ({exc})") from None
    depth = len(x) - 1 if isinstance(x, tuple) else 0
    if depth != k - 1:
        raise DocumentError(f"level {k}: {key!r} is not an element of level {k - 1}")
    return x


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from None


def load_truss(path: str) -> TrussTower:
    return truss_from_json(load_json(path))


# -- diagrams and signatures ------------------------------------------------------


def diagram_to_json(d: CombinatorialDiagram) -> dict:
    return {"X": truss_to_json(d.X), "S": truss_to_json(d.S), "frame": truss_to_json(d.frame)}


def diagram_from_json(doc) -> CombinatorialDiagram:
    if not isinstance(doc, dict) or not {"X", "S", "frame"} <= set(doc):
        raise DocumentError("a diagram document has keys X, S and frame")
    return make_diagram(truss_from_json(doc["X"]), truss_from_json(doc["S"]), truss_from_json(doc["frame"]))


def signature_from_json(doc) -> Signature:
    if not isinstance(doc, dict) or not isinstance(doc.get("dim"), int):
        raise DocumentError("a signature document needs an integer dim")
    if doc.get("free"):
        return free_signature(doc["dim"])
    gens = doc.get("generators")
    if not isinstance(gens, list):
        raise DocumentError("signature generators must be a list")
    sig = Signature(doc["dim"])
    for g in gens:
        if not isinstance(g, dict) or not {"id", "dim", "model"} <= set(g):
            raise DocumentError("each generator needs id, dim and model")
        sig.add(Generator(g["id"], g["dim"], truss_from_json(g["model"])))
    return sig


def signature_to_json(sig: Signature) -> dict:
    return {"dim": sig.n, "generators": [
        {"id": g.id, "dim": g.dim, "model": truss_to_json(g.model)} for g in sig.generators.values()]}
