"""Finite computad signatures and atom-wise type checking of labelled diagrams.

A generator carries a local model: a normal, progressive atom labelled by
generator ids whose minimum is the generator itself.  A labelling of a
truss by generator ids typechecks when, at every element p, the decorated
atom at p normalizes to the local model of the generator at p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .diagram import is_progressive
from .normalize import is_normal, normalize
from .ops import (
    TrussError,
    atom_at,
    classify,
    compose,
    factorize,
    grid,
    inert_embedding,
    is_atom,
    sdepth,
    source,
    stype,
    subtower,
    target,
)
from .truss import OPEN, TrussTower


@dataclass(frozen=True)
class Generator:
    id: str
    dim: int
    model: TrussTower


@dataclass
class Signature:
    n: int
    generators: dict = field(default_factory=dict)

    def __post_init__(self):
        for g in self.generators.values():
            check_generator(self, g)

    def add(self, g: Generator):
        if g.id in self.generators:
            raise TrussError(f"duplicate generator id {g.id!r}")
        check_generator(self, g)
        self.generators[g.id] = g

    def remove(self, gid) -> "Signature":
        """A copy without one generator (models mentioning it are kept as they are)."""
        out = Signature(self.n)
        out.generators = {k: v for k, v in self.generators.items() if k != gid}
        return out

    def dimension_labels(self, labelling: dict) -> dict:
        return {x: self.n - self.generators[g].dim for x, g in labelling.items()}


def check_generator(sig: Signature, g: Generator):
    M = g.model
    if M.dim != sig.n or M.flavor != OPEN:
        raise TrussError(f"model of {g.id!r} is not an open {sig.n}-truss")
    if not is_atom(M) or M.labels is None:
        raise TrussError(f"model of {g.id!r} is not a labelled atom")
    if M.labels[M.top.minimum()] != g.id:
        raise TrussError(f"minimum of the model of {g.id!r} carries {M.labels[M.top.minimum()]!r}")
    if not 0 <= g.dim <= sig.n:
        raise TrussError(f"generator {g.id!r} has dimension {g.dim} outside 0..{sig.n}")
    if not is_normal(M):
        raise TrussError(f"model of {g.id!r} is not in normal form")
    dims = {}
    for x, h in M.labels.items():
        if h == g.id:
            dims[x] = sig.n - g.dim
        elif h in sig.generators:
            dims[x] = sig.n - sig.generators[h].dim
        else:
            raise TrussError(f"model of {g.id!r} mentions unknown generator {h!r}")
    if not is_progressive(M.with_labels(dims)):
        raise TrussError(f"model of {g.id!r} is not progressive")


def _type_id(t) -> str:
    return "g" + "".join(map(str, t))


def free_signature(n: int) -> Signature:
    """One generator per singularity type t in {0,1}^n, with model grid(t).

    Generators are added in order of increasing dimension so every model
    only mentions generators that already exist.
    """
    types = sorted(product((0, 1), repeat=n), key=lambda t: (sum(t), t))
    sig = Signature(n)
    for t in types:
        G = grid(OPEN, *t)
        lab = {q: _type_id(stype(atom_at(G, q))) for q in G.top.elements}
        sig.add(Generator(_type_id(t), n - sdepth(G), G.with_labels(lab)))
    return sig


def grid_dimension_labels(T: TrussTower) -> TrussTower:
    """T labelled by q -> sdepth(atom(q))."""
    return T.with_labels({q: sdepth(atom_at(T, q)) for q in T.top.elements})


# -- type checking ------------------------------------------------------------


def _decorated_atom(M: TrussTower, labelling: dict, p) -> TrussTower:
    sub = subtower(M.unlabelled(), M.top.upward_closure({p}))
    return sub.sub.with_labels({x: labelling[y] for x, y in sub.emb[-1].items()})


def check_element(M: TrussTower, labelling: dict, sig: Signature, p) -> str | None:
    """None if the labelling is valid at p, otherwise a reason."""
    gid = labelling[p]
    if gid not in sig.generators:
        return f"unknown generator {gid!r}"
    g = sig.generators[gid]
    if M.labels is not None and M.labels[p] != sig.n - g.dim:
        return f"generator {gid!r} has dimension {g.dim} but the stratum has label {M.labels[p]}"
    A = _decorated_atom(M, labelling, p)
    if normalize(A).nf != g.model:
        return f"atom does not normalize to the model of {gid!r}"
    return None


def typecheck(M: TrussTower, labelling: dict, sig: Signature) -> list:
    """All violations as dicts {path, generator, reason}; empty means ok."""
    missing = [p for p in M.top.elements if p not in labelling]
    if missing:
        raise TrussError(f"labelling is undefined at {M.path(missing[0])}")
    unknown = sorted({g for g in labelling.values() if g not in sig.generators}, key=repr)
    if unknown:
        raise TrussError(f"unknown generator id {unknown[0]!r}")
    out = []
    for p in M.top.elements:
        reason = check_element(M, labelling, sig, p)
        if reason is not None:
            out.append({"path": M.path(p), "generator": labelling[p], "reason": reason})
    return out


def valid_labellings(M: TrussTower, sig: Signature, limit: int = 100000) -> list:
    """Every labelling of M that typechecks, by backtracking from the maximal elements down.

    Each element is checked as soon as its atom is fully labelled.  When M
    carries dimension labels, only generators of matching dimension are tried.
    """
    P = M.top
    order = sorted(P.elements, key=lambda x: (len(P.up(x)), repr(x)))
    gens = sorted(sig.generators)
    out = []
    cur = {}

    def candidates(p):
        if M.labels is None:
            return gens
        return [g for g in gens if sig.n - sig.generators[g].dim == M.labels[p]]

    def go(i):
        if i == len(order):
            out.append(dict(cur))
            if len(out) > limit:
                raise TrussError("too many valid labellings")
            return
        p = order[i]
        for g in candidates(p):
            cur[p] = g
            if check_element(M, cur, sig, p) is None:
                go(i + 1)
            del cur[p]

    go(0)
    return out


# -- transport along active bordisms ------------------------------------------


def transport(labelling: dict, f: TrussTower) -> dict:
    """Pull a labelling of target(f) back along the active bordism f.

    The atom of source(f) at p has an active image Z_p in the target; the
    label at p is the generator at the minimum of nf(Z_p) decorated by the
    labelling.
    """
    if not classify(f).active:
        raise TrussError("transport needs an active bordism")
    f = f.unlabelled()
    M = source(f)
    N = target(f).with_labels(labelling)
    out = {}
    for p in M.top.elements:
        sub = subtower(M, M.top.upward_closure({p}))
        h = compose(inert_embedding(sub), f)
        Z = subtower(N, factorize(h).middle.top_set).sub
        nf = normalize(Z).nf
        out[p] = nf.labels[nf.top.minimum()]
    return out


# -- axiom harness --------------------------------------------------------------


@dataclass
class AxiomReport:
    isotopy_checked: int = 0
    sheaf_checked: int = 0
    violations: list = field(default_factory=list)
    empty_families: list = field(default_factory=list)  # trusses with no valid labelling

    @property
    def ok(self) -> bool:
        return not self.violations


def _key(labelling: dict):
    return tuple(sorted(((repr(k), v) for k, v in labelling.items())))


def compatible_families(M: TrussTower, sig: Signature) -> list:
    """Families (one valid labelling per atom) agreeing on overlaps, glued into global labellings."""
    P = M.top
    local = {}
    for p in P.elements:
        sub = subtower(M, P.upward_closure({p}))
        A = sub.sub
        emb = sub.emb[-1]
        local[p] = [{emb[x]: v for x, v in lab.items()} for lab in valid_labellings(A, sig)]
    order = sorted(P.elements, key=lambda x: (len(P.up(x)), repr(x)))
    out = []
    cur = {}

    def go(i):
        if i == len(order):
            out.append(dict(cur))
            return
        for lab in local[order[i]]:
            if all(cur.get(x, v) == v for x, v in lab.items()):
                added = [x for x in lab if x not in cur]
                cur.update(lab)
                go(i + 1)
                for x in added:
                    del cur[x]

    go(0)
    return out


def axiom_harness(sig: Signature, trusses=(), bordisms=()) -> AxiomReport:
    """Check the sheaf axiom on each truss and the isotopy axiom on each active bordism."""
    rep = AxiomReport()
    for M in trusses:
        rep.sheaf_checked += 1
        glob = {_key(l) for l in valid_labellings(M, sig)}
        fam = {_key(l) for l in compatible_families(M, sig)}
        if not glob:
            rep.empty_families.append(M)
        if glob != fam:
            rep.violations.append({"axiom": "sheaf", "truss": repr(M),
                                   "global": len(glob), "families": len(fam)})
    for f in bordisms:
        rep.isotopy_checked += 1
        if not classify(f).active:
            rep.violations.append({"axiom": "isotopy", "bordism": repr(f), "reason": "not active"})
            continue
        M, N = source(f), target(f)
        vN = valid_labellings(N, sig)
        vM = {_key(l) for l in valid_labellings(M, sig)}
        image = [transport(l, f) for l in vN]
        bad = [l for l in image if typecheck(M, l, sig)]
        keys = {_key(l) for l in image}
        if bad or len(keys) != len(image) or keys != vM:
            rep.violations.append({"axiom": "isotopy", "bordism": repr(f), "valid_source": len(vM),
                                   "valid_target": len(vN), "image": len(keys), "invalid_images": len(bad)})
    return rep


def stuttered_grid(ms, coord: int) -> TrussTower:
    """grid(ms) with coordinate ``coord`` (1-based) widened by one, dimension
    labelled through the collapse of the new last singular height.

    Its normal form is the dimension-labelled grid(ms); the normalize witness
    is an active bordism onto it.
    """
    ms = list(ms)
    n = len(ms)
    G = grid_dimension_labels(grid(OPEN, *ms))
    wide = list(ms)
    wide[coord - 1] += 1
    W = grid(OPEN, *wide)
    idx = n + 1 - coord  # tuple index of the widened coordinate
    top = 2 * ms[coord - 1]

    def collapse(x):
        return x[:idx] + (min(x[idx], top),) + x[idx + 1:]

    return W.with_labels({x: G.labels[collapse(x)] for x in W.top.elements})


def grid_corpus(n: int, max_m: int = 2):
    """Dimension-labelled grids with all m_i <= max_m, plus isotopy bordisms
    (identities and the stutter witnesses of each grid)."""
    from .ops import identity_bordism

    trusses, bordisms = [], []
    for ms in product(range(max_m + 1), repeat=n):
        G = grid_dimension_labels(grid(OPEN, *ms))
        trusses.append(G)
        bordisms.append(identity_bordism(G))
        for c in range(1, n + 1):
            M = stuttered_grid(ms, c)
            res = normalize(M)
            if res.nf != G:
                raise TrussError(f"stuttered grid {ms} at {c} does not normalize to the grid")
            bordisms.append(res.witness)
    return trusses, bordisms
