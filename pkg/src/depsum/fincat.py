"""Finite categories, oplax colimits and the Cat adder.

Categories are stored by index: objects and morphisms carry hashable labels
and composition is a lookup table.  Everything is validated on
construction, so a FinCat, FinFunctor or CatFamily that exists is lawful.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache

from .core import (
    AdderInstance,
    CheckResult,
    EqualityNotion,
    Family,
    FiberDescriptor,
    RightModuleInstance,
    Skip,
    drive_cases,
    failure_record,
    max_size,
)


class CategoryError(ValueError):
    """A category, functor or transformation violates its laws."""


class CapError(Skip, ValueError):
    """A constructed category exceeds the size caps."""


def object_cap() -> int:
    return max_size(6)


def morphism_cap() -> int:
    return max(20, 20 * object_cap() // 6)


def _freeze(label):
    if isinstance(label, list):
        return tuple(_freeze(v) for v in label)
    return label


def _thaw(label):
    if isinstance(label, tuple):
        return [_thaw(v) for v in label]
    return label


class FinCat:
    """A finite category.

    ``morphisms`` is a list of (label, source object, target object);
    ``identities`` maps each object to the label of its identity;
    ``compose`` maps (g, f) label pairs to the label of g o f.  Composites
    involving an identity may be omitted.
    """

    def __init__(self, objects, morphisms, identities, compose, name: str | None = None,
                 enforce_caps: bool = True):
        self.objects = tuple(_freeze(o) for o in objects)
        self.name = name
        if len(set(self.objects)) != len(self.objects):
            raise CategoryError("duplicate object labels")
        self._oidx = {o: k for k, o in enumerate(self.objects)}
        mors = [(_freeze(m), _freeze(s), _freeze(t)) for m, s, t in morphisms]
        self.mor_ids = tuple(m for m, _, _ in mors)
        if len(set(self.mor_ids)) != len(self.mor_ids):
            raise CategoryError("duplicate morphism labels")
        self._midx = {m: k for k, m in enumerate(self.mor_ids)}
        try:
            self.src = tuple(self._oidx[s] for _, s, _ in mors)
            self.tgt = tuple(self._oidx[t] for _, _, t in mors)
        except KeyError as exc:
            raise CategoryError(f"morphism endpoint {exc.args[0]!r} is not an object") from exc
        if isinstance(identities, dict):
            ids = [identities.get(o) for o in self.objects]
        else:
            ids = [_freeze(v) for v in identities]
        if len(ids) != len(self.objects) or any(v not in self._midx for v in ids):
            raise CategoryError("every object needs an identity morphism")
        self.ident = tuple(self._midx[_freeze(v)] for v in ids)
        if enforce_caps and (len(self.objects) > object_cap() or len(self.mor_ids) > morphism_cap()):
            raise CapError(f"category has {len(self.objects)} objects and {len(self.mor_ids)} morphisms; "
                           f"caps are {object_cap()} / {morphism_cap()}")
        n = len(self.mor_ids)
        table = [[None] * n for _ in range(n)]
        for (g, f), h in dict(compose).items():
            g, f, h = _freeze(g), _freeze(f), _freeze(h)
            table[self._midx[g]][self._midx[f]] = self._midx[h]
        for f in range(n):
            table[self.ident[self.tgt[f]]][f] = f
            table[f][self.ident[self.src[f]]] = f
        self.comp = tuple(tuple(row) for row in table)
        self._hom = {}
        for k in range(n):
            self._hom.setdefault((self.src[k], self.tgt[k]), []).append(k)
        self._hom = {key: tuple(v) for key, v in self._hom.items()}
        self.validate()

    # structure

    def validate(self) -> None:
        n = len(self.mor_ids)
        for o, i in enumerate(self.ident):
            if self.src[i] != o or self.tgt[i] != o:
                raise CategoryError(f"identity of {self.objects[o]!r} has wrong endpoints")
        for g in range(n):
            for f in range(n):
                h = self.comp[g][f]
                if self.tgt[f] == self.src[g]:
                    if h is None:
                        raise CategoryError(f"missing composite {self.mor_ids[g]!r} o {self.mor_ids[f]!r}")
                    if self.src[h] != self.src[f] or self.tgt[h] != self.tgt[g]:
                        raise CategoryError(f"composite {self.mor_ids[g]!r} o {self.mor_ids[f]!r} has wrong endpoints")
                elif h is not None:
                    raise CategoryError(f"composite given for non-composable {self.mor_ids[g]!r}, {self.mor_ids[f]!r}")
        for h in range(n):
            for g in self.out_of(self.tgt[h]):
                gh = self.comp[g][h]
                for f in self.out_of(self.tgt[g]):
                    if self.comp[f][gh] != self.comp[self.comp[f][g]][h]:
                        raise CategoryError("composition is not associative")

    def out_of(self, obj: int) -> list:
        return [k for k in range(len(self.mor_ids)) if self.src[k] == obj]

    def hom(self, a: int, b: int) -> tuple:
        return self._hom.get((a, b), ())

    def compose_idx(self, g: int, f: int) -> int:
        h = self.comp[g][f]
        if h is None:
            raise CategoryError("morphisms are not composable")
        return h

    def obj_index(self, label) -> int:
        return self._oidx[_freeze(label)]

    def mor_index(self, label) -> int:
        return self._midx[_freeze(label)]

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_morphisms(self) -> int:
        return len(self.mor_ids)

    def is_discrete(self) -> bool:
        return self.n_morphisms == self.n_objects

    def non_identities(self) -> list:
        ids = set(self.ident)
        return [k for k in range(self.n_morphisms) if k not in ids]

    def key(self):
        return (self.objects, tuple(zip(self.mor_ids, self.src, self.tgt)), self.ident, self.comp)

    def __eq__(self, other):
        return isinstance(other, FinCat) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<FinCat{tag}: {self.n_objects} objects, {self.n_morphisms} morphisms>"

    # constructions

    def opposite(self) -> "FinCat":
        morphs = [(m, self.objects[self.tgt[k]], self.objects[self.src[k]]) for k, m in enumerate(self.mor_ids)]
        comp = {}
        for g in range(self.n_morphisms):
            for f in range(self.n_morphisms):
                h = self.comp[g][f]
                if h is not None:
                    comp[(self.mor_ids[f], self.mor_ids[g])] = self.mor_ids[h]
        ids = [self.mor_ids[i] for i in self.ident]
        return FinCat(self.objects, morphs, ids, comp, name=f"{self.name}^op" if self.name else None,
                      enforce_caps=False)

    def to_json(self) -> dict:
        return {
            "objects": [_thaw(o) for o in self.objects],
            "morphisms": [{"id": _thaw(m), "src": _thaw(self.objects[s]), "tgt": _thaw(self.objects[t])}
                          for m, s, t in zip(self.mor_ids, self.src, self.tgt)],
            "compose": [[None if h is None else _thaw(self.mor_ids[h]) for h in row] for row in self.comp],
            "identities": [_thaw(self.mor_ids[i]) for i in self.ident],
        }

    @classmethod
    def from_json(cls, data: dict, name: str | None = None) -> "FinCat":
        """Inverse of to_json; ``compose[g][f]`` is the label of g o f or null."""
        for key in ("objects", "morphisms", "compose", "identities"):
            if key not in data:
                raise CategoryError(f"category JSON lacks {key!r}")
        morphs = [(m["id"], m["src"], m["tgt"]) for m in data["morphisms"]]
        ids = [_freeze(m[0]) for m in morphs]
        rows = data["compose"]
        if len(rows) != len(ids) or any(len(r) != len(ids) for r in rows):
            raise CategoryError("compose table must be square over the morphisms")
        comp = {}
        for g, row in zip(ids, rows):
            for f, h in zip(ids, row):
                if h is not None:
                    comp[(g, f)] = h
        cat = cls(data["objects"], morphs, data["identities"], comp, name=name or data.get("name"))
        # explicit entries must agree with the table rebuilt from them
        if [[None if h is None else _freeze(h) for h in row] for row in rows] != \
                [[None if h is None else cat.mor_ids[h] for h in row] for row in cat.comp]:
            raise CategoryError("compose table omits composites with identities")
        return cat


# catalog

def discrete(n: int, labels=None) -> FinCat:
    objs = list(labels) if labels is not None else list(range(n))
    return FinCat(objs, [(("id", o), o, o) for o in objs], [("id", o) for o in objs], {},
                  name=f"discrete{len(objs)}")


def terminal() -> FinCat:
    return FinCat([0], [(("id", 0), 0, 0)], [("id", 0)], {}, name="terminal")


def empty() -> FinCat:
    return FinCat([], [], [], {}, name="empty")


def from_poset(elements, leq, name: str | None = None) -> FinCat:
    elements = list(elements)
    morphs = [((a, b), a, b) for a in elements for b in elements if leq(a, b)]
    comp = {}
    for a, b in itertools.product(elements, repeat=2):
        if not leq(a, b):
            continue
        for c in elements:
            if leq(b, c):
                comp[((b, c), (a, b))] = (a, c)
    return FinCat(elements, morphs, [(a, a) for a in elements], comp, name=name)


def from_monoid(elements, mul, unit, name: str | None = None) -> FinCat:
    elements = list(elements)
    morphs = [(e, 0, 0) for e in elements]
    comp = {(g, f): mul(g, f) for g in elements for f in elements}
    return FinCat([0], morphs, [unit], comp, name=name)


def arrow() -> FinCat:
    return from_poset([0, 1], lambda a, b: a <= b, name="arrow")


def chain(n: int) -> FinCat:
    return from_poset(list(range(n)), lambda a, b: a <= b, name=f"chain{n}")


def span() -> FinCat:
    return from_poset(["c", "l", "r"], lambda a, b: a == b or a == "c", name="span")


def cospan() -> FinCat:
    return from_poset(["l", "r", "c"], lambda a, b: a == b or b == "c", name="cospan")


def parallel_pair() -> FinCat:
    return FinCat([0, 1], [("id0", 0, 0), ("id1", 1, 1), ("a", 0, 1), ("b", 0, 1)], ["id0", "id1"], {},
                  name="parallel")


def idempotent() -> FinCat:
    return from_monoid(["e", "t"], lambda g, f: "e" if g == f == "e" else "t", "e", name="idempotent")


def cyclic_group(n: int = 2) -> FinCat:
    return from_monoid(list(range(n)), lambda g, f: (g + f) % n, 0, name=f"Z{n}")


def isomorphism_pair() -> FinCat:
    comp = {("g", "f"): "id0", ("f", "g"): "id1"}
    return FinCat([0, 1], [("id0", 0, 0), ("id1", 1, 1), ("f", 0, 1), ("g", 1, 0)], ["id0", "id1"], comp,
                  name="iso")


def catalog() -> dict:
    """Named small categories used as indices and fibers."""
    cats = [empty(), terminal(), discrete(2), discrete(3), arrow(), chain(3), span(), cospan(),
            parallel_pair(), idempotent(), cyclic_group(2), isomorphism_pair()]
    return {c.name: c for c in cats}


def product(c: FinCat, d: FinCat) -> FinCat:
    objs = [(a, b) for a in c.objects for b in d.objects]
    morphs = [((f, g), (c.objects[c.src[i]], d.objects[d.src[j]]), (c.objects[c.tgt[i]], d.objects[d.tgt[j]]))
              for i, f in enumerate(c.mor_ids) for j, g in enumerate(d.mor_ids)]
    comp = {}
    for g1, f1 in itertools.product(range(c.n_morphisms), repeat=2):
        h1 = c.comp[g1][f1]
        if h1 is None:
            continue
        for g2, f2 in itertools.product(range(d.n_morphisms), repeat=2):
            h2 = d.comp[g2][f2]
            if h2 is not None:
                comp[((c.mor_ids[g1], d.mor_ids[g2]), (c.mor_ids[f1], d.mor_ids[f2]))] = \
                    (c.mor_ids[h1], d.mor_ids[h2])
    ids = [(c.mor_ids[c.ident[a]], d.mor_ids[d.ident[b]]) for a in range(c.n_objects) for b in range(d.n_objects)]
    return FinCat(objs, morphs, ids, comp)


# functors and natural transformations

class FinFunctor:
    """Strict functor given by index maps on objects and morphisms."""

    def __init__(self, src: FinCat, tgt: FinCat, obj_map, mor_map, validate: bool = True):
        self.src, self.tgt = src, tgt
        self.obj_map = tuple(obj_map)
        self.mor_map = tuple(mor_map)
        if validate:
            self.validate()

    @classmethod
    def from_labels(cls, src: FinCat, tgt: FinCat, obj_map: dict, mor_map: dict) -> "FinFunctor":
        return cls(src, tgt, [tgt.obj_index(obj_map[o]) for o in src.objects],
                   [tgt.mor_index(mor_map[m]) for m in src.mor_ids])

    @classmethod
    def identity(cls, c: FinCat) -> "FinFunctor":
        return cls(c, c, range(c.n_objects), range(c.n_morphisms), validate=False)

    def validate(self) -> None:
        s, t = self.src, self.tgt
        if len(self.obj_map) != s.n_objects or len(self.mor_map) != s.n_morphisms:
            raise CategoryError("functor maps have the wrong length")
        for k in range(s.n_morphisms):
            m = self.mor_map[k]
            if t.src[m] != self.obj_map[s.src[k]] or t.tgt[m] != self.obj_map[s.tgt[k]]:
                raise CategoryError(f"functor sends {s.mor_ids[k]!r} to a morphism with wrong endpoints")
        for o in range(s.n_objects):
            if self.mor_map[s.ident[o]] != t.ident[self.obj_map[o]]:
                raise CategoryError("functor does not preserve identities")
        for g in range(s.n_morphisms):
            for f in range(s.n_morphisms):
                h = s.comp[g][f]
                if h is not None and self.mor_map[h] != t.comp[self.mor_map[g]][self.mor_map[f]]:
                    raise CategoryError("functor does not preserve composition")

    def then(self, other: "FinFunctor") -> "FinFunctor":
        """other o self."""
        return FinFunctor(self.src, other.tgt, [other.obj_map[o] for o in self.obj_map],
                          [other.mor_map[m] for m in self.mor_map], validate=False)

    def opposite(self) -> "FinFunctor":
        return FinFunctor(self.src.opposite(), self.tgt.opposite(), self.obj_map, self.mor_map, validate=False)

    def is_identity(self) -> bool:
        return (self.src == self.tgt and self.obj_map == tuple(range(self.src.n_objects))
                and self.mor_map == tuple(range(self.src.n_morphisms)))

    def __eq__(self, other):
        return (isinstance(other, FinFunctor) and self.obj_map == other.obj_map
                and self.mor_map == other.mor_map and self.src == other.src and self.tgt == other.tgt)

    def __hash__(self):
        return hash((self.obj_map, self.mor_map))

    def on_object(self, label):
        return self.tgt.objects[self.obj_map[self.src.obj_index(label)]]

    def on_morphism(self, label):
        return self.tgt.mor_ids[self.mor_map[self.src.mor_index(label)]]

    def to_json(self) -> dict:
        return {"objects": {str(_thaw(o)): _thaw(self.tgt.objects[k]) for o, k in zip(self.src.objects, self.obj_map)},
                "morphisms": {str(_thaw(m)): _thaw(self.tgt.mor_ids[k]) for m, k in zip(self.src.mor_ids, self.mor_map)}}


class FinNatTrans:
    """Natural transformation F => G given by components (morphism indices of the target)."""

    def __init__(self, F: FinFunctor, G: FinFunctor, components):
        self.F, self.G = F, G
        self.components = tuple(components)
        self.validate()

    def validate(self) -> None:
        F, G, C, D = self.F, self.G, self.F.src, self.F.tgt
        if G.src != C or G.tgt != D:
            raise CategoryError("natural transformation between functors with different ends")
        for o in range(C.n_objects):
            c = self.components[o]
            if D.src[c] != F.obj_map[o] or D.tgt[c] != G.obj_map[o]:
                raise CategoryError("component has wrong endpoints")
        for k in range(C.n_morphisms):
            a, b = C.src[k], C.tgt[k]
            if D.comp[G.mor_map[k]][self.components[a]] != D.comp[self.components[b]][F.mor_map[k]]:
                raise CategoryError(f"naturality square fails at {C.mor_ids[k]!r}")


@lru_cache(maxsize=4096)
def all_functors(c: FinCat, d: FinCat) -> tuple:
    """Every strict functor c -> d, by backtracking on objects then morphisms."""
    out = []
    order = sorted(range(c.n_morphisms), key=lambda k: (k not in c.ident, k))
    for omap in itertools.product(range(d.n_objects), repeat=c.n_objects):
        mmap = [None] * c.n_morphisms

        def consistent(k):
            for g in range(c.n_morphisms):
                for f in range(c.n_morphisms):
                    h = c.comp[g][f]
                    if h is None or k not in (g, f, h):
                        continue
                    if mmap[g] is None or mmap[f] is None or mmap[h] is None:
                        continue
                    if d.comp[mmap[g]][mmap[f]] != mmap[h]:
                        return False
            return True

        def assign(pos):
            if pos == len(order):
                out.append(FinFunctor(c, d, omap, list(mmap), validate=False))
                return
            k = order[pos]
            if k in c.ident:
                cands = (d.ident[omap[c.src[k]]],)
            else:
                cands = d.hom(omap[c.src[k]], omap[c.tgt[k]])
            for m in cands:
                mmap[k] = m
                if consistent(k):
                    assign(pos + 1)
                mmap[k] = None
        assign(0)
    return tuple(out)


# isomorphism search

@dataclass
class IsoWitness:
    forward: FinFunctor
    backward: FinFunctor

    def to_json(self) -> dict:
        return {"forward": self.forward.to_json(), "backward": self.backward.to_json()}


def _hom_profile(c: FinCat, a: int) -> tuple:
    return (len(c.hom(a, a)), tuple(sorted(len(c.hom(a, b)) for b in range(c.n_objects))),
            tuple(sorted(len(c.hom(b, a)) for b in range(c.n_objects))))


def cat_iso(c: FinCat, d: FinCat):
    """An isomorphism c -> d with its inverse, or None."""
    if c.n_objects != d.n_objects or c.n_morphisms != d.n_morphisms:
        return None
    prof_c = [_hom_profile(c, a) for a in range(c.n_objects)]
    prof_d = [_hom_profile(d, a) for a in range(d.n_objects)]
    if sorted(prof_c) != sorted(prof_d):
        return None
    n = c.n_objects
    omap = [None] * n
    used = [False] * n

    def morphisms_for(omap):
        mmap = [None] * c.n_morphisms
        taken = set()
        order = []
        for a in range(n):
            for b in range(n):
                order.extend(c.hom(a, b))

        def ok(k):
            for g in range(c.n_morphisms):
                for f in range(c.n_morphisms):
                    h = c.comp[g][f]
                    if h is None or k not in (g, f, h):
                        continue
                    if mmap[g] is None or mmap[f] is None or mmap[h] is None:
                        continue
                    if d.comp[mmap[g]][mmap[f]] != mmap[h]:
                        return False
            return True

        def assign(pos):
            if pos == len(order):
                return True
            k = order[pos]
            if k in c.ident:
                cands = (d.ident[omap[c.src[k]]],)
            else:
                cands = [m for m in d.hom(omap[c.src[k]], omap[c.tgt[k]]) if m not in d.ident]
            for m in cands:
                if m in taken:
                    continue
                mmap[k] = m
                taken.add(m)
                if ok(k) and assign(pos + 1):
                    return True
                taken.discard(m)
                mmap[k] = None
            return False
        return list(mmap) if assign(0) else None

    def place(a):
        if a == n:
            return morphisms_for(omap)
        for b in range(n):
            if used[b] or prof_c[a] != prof_d[b]:
                continue
            if any(len(c.hom(a, x)) != len(d.hom(b, omap[x])) or len(c.hom(x, a)) != len(d.hom(omap[x], b))
                   for x in range(a)):
                continue
            omap[a], used[b] = b, True
            found = place(a + 1)
            if found is not None:
                return found
            omap[a], used[b] = None, False
        return None

    mmap = place(0)
    if mmap is None:
        return None
    fwd = FinFunctor(c, d, omap, mmap)
    inv_o = [0] * n
    for a, b in enumerate(omap):
        inv_o[b] = a
    inv_m = [0] * c.n_morphisms
    for k, m in enumerate(mmap):
        inv_m[m] = k
    bwd = FinFunctor(d, c, inv_o, inv_m)
    return IsoWitness(fwd, bwd)


# families and oplax colimits

class CatFamily:
    """A strict functor from ``index`` into finite categories."""

    def __init__(self, index: FinCat, cats, functors):
        self.index = index
        self.cats = tuple(cats)
        self.functors = tuple(functors)
        self.validate()

    def validate(self) -> None:
        I = self.index
        if len(self.cats) != I.n_objects or len(self.functors) != I.n_morphisms:
            raise CategoryError("family sizes do not match the index category")
        for k, F in enumerate(self.functors):
            if F.src != self.cats[I.src[k]] or F.tgt != self.cats[I.tgt[k]]:
                raise CategoryError(f"functor for {I.mor_ids[k]!r} has the wrong ends")
        for o in range(I.n_objects):
            if not self.functors[I.ident[o]].is_identity():
                raise CategoryError("family does not send identities to identities")
        for g in range(I.n_morphisms):
            for f in range(I.n_morphisms):
                h = I.comp[g][f]
                if h is not None and self.functors[f].then(self.functors[g]) != self.functors[h]:
                    raise CategoryError("family is not strictly functorial")

    @classmethod
    def constant(cls, index: FinCat, value: FinCat) -> "CatFamily":
        ident = FinFunctor.identity(value)
        return cls(index, [value] * index.n_objects, [ident] * index.n_morphisms)

    def at(self, label) -> FinCat:
        return self.cats[self.index.obj_index(label)]

    def opposite(self) -> "CatFamily":
        return CatFamily(self.index, [c.opposite() for c in self.cats], [F.opposite() for F in self.functors])

    def to_json(self) -> dict:
        return {"index": self.index.to_json(),
                "values": [c.to_json() for c in self.cats],
                "functors": [F.to_json() for F in self.functors]}


@dataclass
class OplaxColimit:
    cat: FinCat
    injections: dict = field(default_factory=dict)
    connecting: dict = field(default_factory=dict)


def oplax_colim(I: FinCat, F: CatFamily, with_cocone: bool = False) -> OplaxColimit:
    """Objects (i, j) with j in F(i); morphisms (a, b) with a: i -> i' and
    b: F(a)(j) -> j'; (a', b') o (a, b) = (a' o a, b' o F(a')(b))."""
    if F.index != I:
        raise CategoryError("family is indexed by a different category")
    objs, mors, comp = [], [], {}
    for i, il in enumerate(I.objects):
        objs.extend((il, jl) for jl in F.cats[i].objects)
    if len(objs) > object_cap():
        raise CapError(f"oplax colimit would have {len(objs)} objects (cap {object_cap()})")
    triples = []     # (alpha, j, beta) indices
    for a in range(I.n_morphisms):
        i, i2 = I.src[a], I.tgt[a]
        Fi, Fi2, Fa = F.cats[i], F.cats[i2], F.functors[a]
        for j in range(Fi.n_objects):
            fj = Fa.obj_map[j]
            for j2 in range(Fi2.n_objects):
                for b in Fi2.hom(fj, j2):
                    triples.append((a, j, b))
    if len(triples) > morphism_cap():
        raise CapError(f"oplax colimit would have {len(triples)} morphisms (cap {morphism_cap()})")
    label, used = {}, set()
    for a, j, b in triples:
        i, i2 = I.src[a], I.tgt[a]
        Fi2 = F.cats[i2]
        lab = (I.mor_ids[a], Fi2.mor_ids[b])
        src = (I.objects[i], F.cats[i].objects[j])
        tgt = (I.objects[i2], Fi2.objects[Fi2.tgt[b]])
        if lab in used:
            # the same (alpha, beta) pair from different sources: disambiguate by source
            lab = (I.mor_ids[a], Fi2.mor_ids[b], F.cats[i].objects[j])
        used.add(lab)
        label[(a, j, b)] = lab
        mors.append((lab, src, tgt))
    by_src = {}
    for t in triples:
        by_src.setdefault((I.src[t[0]], t[1]), []).append(t)
    for (a, j, b) in triples:
        i2 = I.tgt[a]
        j2 = F.cats[i2].tgt[b]
        for (a2, j_, b2) in by_src.get((i2, j2), []):
            Fa2 = F.functors[a2]
            Fi3 = F.cats[I.tgt[a2]]
            ac = I.comp[a2][a]
            bc = Fi3.comp[b2][Fa2.mor_map[b]]
            comp[(label[(a2, j_, b2)], label[(a, j, b)])] = label[(ac, j, bc)]
    ids = [label[(I.ident[i], j, F.cats[i].ident[j])]
           for i in range(I.n_objects) for j in range(F.cats[i].n_objects)]
    cat = FinCat(objs, mors, ids, comp)
    res = OplaxColimit(cat)
    if with_cocone:
        for i in range(I.n_objects):
            Fi = F.cats[i]
            res.injections[I.objects[i]] = FinFunctor(
                Fi, cat, [cat.obj_index((I.objects[i], jl)) for jl in Fi.objects],
                [cat.mor_index(label[(I.ident[i], Fi.src[b], b)]) for b in range(Fi.n_morphisms)])
        for a in range(I.n_morphisms):
            i, i2 = I.src[a], I.tgt[a]
            Fa = F.functors[a]
            src_f = res.injections[I.objects[i]]
            tgt_f = Fa.then(res.injections[I.objects[i2]])
            comps = [cat.mor_index(label[(a, j, F.cats[i2].ident[Fa.obj_map[j]])]) for j in range(F.cats[i].n_objects)]
            res.connecting[I.mor_ids[a]] = FinNatTrans(src_f, tgt_f, comps)
    return res


def lax_colim(I: FinCat, F: CatFamily) -> FinCat:
    """(oplax colimit of the opposite categories)^op."""
    inner = oplax_colim(I, F.opposite()).cat
    return inner.opposite()


def reindex_family(F: CatFamily, G: FinFunctor) -> CatFamily:
    """F o G, a family over G.src."""
    return CatFamily(G.src, [F.cats[o] for o in G.obj_map], [F.functors[m] for m in G.mor_map])


def align_family(I: FinCat, F: CatFamily, G: CatFamily) -> CatFamily:
    """Return G as a family over the oplax colimit of F.

    When F is constantly terminal, a family over I itself is accepted and
    reindexed along the canonical isomorphism (i, *) -> i.  A family over a
    left-nested sum ((i, j), k) is reindexed along the reassociation
    isomorphism."""
    total = oplax_colim(I, F).cat
    if G.index == total:
        return G
    if G.index != I or not all(c.n_objects == 1 and c.n_morphisms == 1 for c in F.cats):
        # a family over the left-nested sum, with F itself a boxtimes value
        return reindex_family(G, _inverse(_reassociate(G.index, total)))
    proj = FinFunctor(total, I, [I.obj_index(o[0]) for o in total.objects],
                      [I.mor_index(m[0]) for m in total.mor_ids])
    return reindex_family(G, proj)


def pullback_family(I: FinCat, F: CatFamily, G: CatFamily, i) -> CatFamily:
    """j -> G(i, j) over F(i), with G(id_i, b) on morphisms."""
    G = align_family(I, F, G)
    total = G.index
    ii = I.obj_index(i)
    Fi = F.cats[ii]
    omap = [total.obj_index((I.objects[ii], jl)) for jl in Fi.objects]
    mmap = [_total_morphism(total, I, F, I.ident[ii], Fi.src[b], b) for b in range(Fi.n_morphisms)]
    return reindex_family(G, FinFunctor(Fi, total, omap, mmap, validate=False))


def _total_morphism(total: FinCat, I: FinCat, F: CatFamily, a: int, j: int, b: int) -> int:
    """Index in the oplax colimit of the morphism (alpha, beta) out of (i, j)."""
    i2 = I.tgt[a]
    lab = (I.mor_ids[a], F.cats[i2].mor_ids[b])
    k = total._midx.get(lab)
    if k is None or total.objects[total.src[k]] != (I.objects[I.src[a]], F.cats[I.src[a]].objects[j]):
        k = total.mor_index((I.mor_ids[a], F.cats[i2].mor_ids[b], F.cats[I.src[a]].objects[j]))
    return k


def boxtimes_family(I: FinCat, F: CatFamily, G: CatFamily) -> CatFamily:
    """(F (x) G)(i) = oplax colimit over F(i) of G(i, -), with the induced
    functors (j, k) -> (F(a)(j), G(a, id)(k)) along a: i -> i'."""
    G = align_family(I, F, G)
    total = G.index
    values, cocones = [], []
    for i in range(I.n_objects):
        pb = pullback_family(I, F, G, I.objects[i])
        values.append(oplax_colim(F.cats[i], pb).cat)
        cocones.append(pb)
    functors = []
    for a in range(I.n_morphisms):
        i, i2 = I.src[a], I.tgt[a]
        Fa, Fi, Fi2 = F.functors[a], F.cats[i], F.cats[i2]
        src, tgt = values[i], values[i2]

        def conn(jl):
            # G applied to the connecting morphism (a, id) out of (i, j)
            j = Fi.obj_index(jl)
            return G.functors[_total_morphism(total, I, F, a, j, Fi2.ident[Fa.obj_map[j]])]

        omap_idx = [tgt.obj_index((Fa.on_object(jl), conn(jl).on_object(kl))) for jl, kl in src.objects]
        mor_map = []
        for m in range(src.n_morphisms):
            beta, gamma = src.mor_ids[m][:2]
            j2 = src.objects[src.tgt[m]][0]
            src_obj = tgt.objects[omap_idx[src.src[m]]]
            mor_map.append(_find_pair_morphism(tgt, Fa.on_morphism(beta), conn(j2).on_morphism(gamma), src_obj))
        functors.append(FinFunctor(src, tgt, omap_idx, mor_map))
    return CatFamily(I, values, functors)


def _find_pair_morphism(cat: FinCat, a_label, b_label, src_obj) -> int:
    k = cat._midx.get((a_label, b_label))
    if k is not None and cat.objects[cat.src[k]] == src_obj:
        return k
    return cat.mor_index((a_label, b_label, src_obj[1]))


def reassociation_functor(I: FinCat, F: CatFamily, G: CatFamily) -> FinFunctor:
    """sum over (sum_I F) of G  ->  sum over I of (F (x) G):
    ((i, j), k) -> (i, (j, k)) and ((a, b), c) -> (a, (b, c))."""
    lhs = oplax_colim(G.index, G).cat
    rhs = oplax_colim(I, boxtimes_family(I, F, G)).cat
    return _reassociate(lhs, rhs)


def _reassociate(lhs: FinCat, rhs: FinCat) -> FinFunctor:
    """The relabelling functor ((i, j), k) -> (i, (j, k)) between nested sums."""
    try:
        omap = [rhs.obj_index((ij[0], (ij[1], k))) for ij, k in lhs.objects]
    except (KeyError, TypeError, IndexError) as exc:
        raise CategoryError("categories are not nested sums of the same data") from exc
    mmap = []
    for m in range(lhs.n_morphisms):
        lab = lhs.mor_ids[m]
        a, inner = lab[0][0], (lab[0][1], lab[1])
        cand = [x for x in range(rhs.n_morphisms)
                if rhs.src[x] == omap[lhs.src[m]] and rhs.tgt[x] == omap[lhs.tgt[m]]
                and rhs.mor_ids[x][0] == a and _strip(rhs.mor_ids[x][1]) == inner]
        if len(cand) != 1:
            raise CategoryError(f"no unique image for {lab!r}")
        mmap.append(cand[0])
    return FinFunctor(lhs, rhs, omap, mmap)


def _inverse(F: FinFunctor) -> FinFunctor:
    if not is_isomorphism(F):
        raise CategoryError("functor is not invertible")
    omap = [0] * F.tgt.n_objects
    mmap = [0] * F.tgt.n_morphisms
    for a, b in enumerate(F.obj_map):
        omap[b] = a
    for a, b in enumerate(F.mor_map):
        mmap[b] = a
    return FinFunctor(F.tgt, F.src, omap, mmap, validate=False)


def _strip(label):
    """Drop the source disambiguator from a pair label."""
    if isinstance(label, tuple) and len(label) == 3:
        return label[:2]
    return label


def is_isomorphism(F: FinFunctor) -> bool:
    return sorted(F.obj_map) == list(range(F.tgt.n_objects)) and \
        sorted(F.mor_map) == list(range(F.tgt.n_morphisms)) and \
        F.src.n_objects == F.tgt.n_objects and F.src.n_morphisms == F.tgt.n_morphisms


# random families

FIBER_POOL = ("empty", "terminal", "discrete2", "arrow", "idempotent", "Z2")
INDEX_POOL = ("terminal", "discrete2", "arrow", "span", "cospan", "parallel", "idempotent", "Z2", "iso", "chain3")


def random_cat_family(index: FinCat, rng: random.Random, pool=FIBER_POOL, max_total: int | None = None,
                      tries: int = 30) -> CatFamily:
    """A random strict functor from ``index`` into the pool, found by
    backtracking over functor choices for each morphism."""
    cat_lib = catalog()
    budget = max_total if max_total is not None else object_cap()
    I = index
    nonid = I.non_identities()
    for _ in range(tries):
        names = [rng.choice(pool) for _ in range(I.n_objects)]
        cats = [cat_lib[nm] for nm in names]
        if sum(c.n_objects for c in cats) > budget:
            continue
        choice = {}

        def consistent():
            for g in range(I.n_morphisms):
                for f in range(I.n_morphisms):
                    h = I.comp[g][f]
                    if h is None:
                        continue
                    fg, ff, fh = (_functor_of(I, cats, choice, x) for x in (g, f, h))
                    if fg is None or ff is None or fh is None:
                        continue
                    if ff.then(fg) != fh:
                        return False
            return True

        def assign(pos):
            if pos == len(nonid):
                return True
            k = nonid[pos]
            cands = list(all_functors(cats[I.src[k]], cats[I.tgt[k]]))
            rng.shuffle(cands)
            for F in cands:
                choice[k] = F
                if consistent() and assign(pos + 1):
                    return True
                del choice[k]
            return False

        if assign(0):
            functors = [_functor_of(I, cats, choice, k) for k in range(I.n_morphisms)]
            return CatFamily(I, cats, functors)
    raise Skip("no strict family found within the size budget")


def _functor_of(I, cats, choice, k):
    if k in I.ident:
        return FinFunctor.identity(cats[I.src[k]])
    return choice.get(k)


def random_index(rng: random.Random, pool=INDEX_POOL) -> FinCat:
    return catalog()[rng.choice(pool)]


# the Cat adder

def _cat_fiber(c: FinCat) -> FiberDescriptor:
    return FiberDescriptor("categorical", category=c)


def _family(F: CatFamily) -> Family:
    return Family(_cat_fiber(F.index), F.at, "functor", F)


def serialize_cat(obj):
    if isinstance(obj, FinCat):
        return obj.to_json()
    if isinstance(obj, Family):
        return obj.data.to_json() if hasattr(obj.data, "to_json") else {"family": obj.rep}
    if isinstance(obj, (CatFamily, FinFunctor, IsoWitness, SetFamily, FinSetColimit)):
        return obj.to_json()
    if isinstance(obj, tuple):
        return [serialize_cat(v) for v in obj]
    if isinstance(obj, list):
        return [serialize_cat(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): serialize_cat(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted((serialize_cat(v) for v in obj), key=repr)
    return obj


def _cat_family_equality(h: Family, f: Family, rng):
    for i in f.domain.category.objects:
        a, b = h(i), f(i)
        if cat_iso(a, b) is None:
            return i, a, b
    return None


def make_cat_adder() -> AdderInstance:
    def sum_op(x, f):
        return oplax_colim(x, f.data).cat

    def flatten_op(x, f, pair):
        return (pair.outer, pair.inner)

    def family_gen(x, rng):
        return _family(random_cat_family(x, rng, max_total=max(1, object_cap() // 2)))

    def g_family_gen(x, rng):
        return _family(random_cat_family(x, rng))

    def boxtimes_op(x, f, g):
        return _family(boxtimes_family(x, f.data, g.data))

    def pullback_op(x, f, g, i):
        return _family(pullback_family(x, f.data, g.data, i))

    def transport_op(x, f, g):
        return lambda p: (p[0][0], (p[0][1], p[1]))

    def bifamily(x, y, rng):
        prod = product(y, x)
        return _family(random_cat_family(prod, rng, pool=("empty", "terminal", "discrete2", "arrow"),
                                         max_total=object_cap()))

    def partial_sum(x, y, F, over):
        return _family(partial_family(x, y, F.data, over))

    def elem_gen(rng):
        return random_index(rng)

    def gen(x, rng):
        # families over sums may be larger than first-level families
        if x.n_objects > 3:
            return g_family_gen(x, rng)
        return family_gen(x, rng)

    return AdderInstance(
        name="cat",
        elem_kind="finite categories up to isomorphism",
        unit_elem=terminal(),
        zero_elem=empty(),
        has_zero=True,
        fiber_of=_cat_fiber,
        sum_op=sum_op,
        flatten_op=flatten_op,
        equality=EqualityNotion.isomorphism(cat_iso),
        elem_gen=elem_gen,
        family_gen=gen,
        commutative_flag=True,
        const_family_op=lambda x, v: _family(CatFamily.constant(x, v)),
        boxtimes_op=boxtimes_op,
        pullback_op=pullback_op,
        transport_op=transport_op,
        bifamily_gen=bifamily,
        partial_sum_op=partial_sum,
        family_equality=_cat_family_equality,
        point_equality=lambda p, q: p == q,
        serializer=serialize_cat,
        description="oplax colimits of strict functors into finite categories",
    )


def partial_family(x: FinCat, y: FinCat, F: CatFamily, over: str) -> CatFamily:
    """Sum a family on y x x over one factor, keeping the other as index."""
    prod = F.index
    keep, summed = (y, x) if over == "x" else (x, y)

    def pair(k, s):
        return (k, s) if over == "x" else (s, k)

    def pair_mor(km, sm):
        return (km, sm) if over == "x" else (sm, km)

    values = []
    slices = []
    for k in keep.objects:
        omap = [prod.obj_index(pair(k, s)) for s in summed.objects]
        kid = keep.mor_ids[keep.ident[keep.obj_index(k)]]
        mmap = [prod.mor_index(pair_mor(kid, m)) for m in summed.mor_ids]
        sl = reindex_family(F, FinFunctor(summed, prod, omap, mmap, validate=False))
        slices.append(sl)
        values.append(oplax_colim(summed, sl).cat)
    functors = []
    for m in range(keep.n_morphisms):
        a, b = keep.src[m], keep.tgt[m]
        src, tgt = values[a], values[b]
        # (s, z) -> (s, F(m, id_s)(z)); (sigma, tau) -> (sigma, F(m, id)(tau))
        def along(s_label):
            sid = summed.mor_ids[summed.ident[summed.obj_index(s_label)]]
            return F.functors[prod.mor_index(pair_mor(keep.mor_ids[m], sid))]
        omap = [tgt.obj_index((s, along(s).on_object(z))) for s, z in src.objects]
        mmap = []
        for q in range(src.n_morphisms):
            lab = src.mor_ids[q]
            s_to = src.objects[src.tgt[q]][0]
            new = (lab[0], along(s_to).on_morphism(lab[1]))
            mmap.append(_find_pair_morphism(tgt, new[0], new[1], tgt.objects[omap[src.src[q]]]))
        functors.append(FinFunctor(src, tgt, omap, mmap))
    return CatFamily(keep, values, functors)


def check_cardinality_oracle(cases: int = 100, seed: int = 0) -> CheckResult:
    """For discrete inputs the object count of a sum equals the natural-number
    sum of the fiber sizes."""
    from .discrete import nat_sum, table_family
    adder = make_cat_adder()

    def case(rng):
        x = discrete(rng.randint(0, 3))
        F = random_cat_family(x, rng, pool=("empty", "terminal", "discrete2", "discrete3"))
        got = oplax_colim(x, F).cat
        sizes = [c.n_objects for c in F.cats]
        want = nat_sum(len(sizes), table_family(sizes))
        if got.n_objects != want or not got.is_discrete():
            return failure_record(adder, {"x": x, "f": F}, got.n_objects, want)
        return None
    return drive_cases("cardinality_oracle", adder, cases, seed, case)


def check_reassociation(cases: int = 30, seed: int = 0) -> CheckResult:
    """The explicit reassociation functor is an isomorphism, and the search
    finds an isomorphism between the two sums independently."""
    adder = make_cat_adder()

    def case(rng):
        x = adder.elem_gen(rng)
        f = adder.family_gen(x, rng)
        s = adder.sum_op(x, f)
        g = adder.family_gen(s, rng)
        R = reassociation_functor(x, f.data, g.data)
        if not is_isomorphism(R):
            return failure_record(adder, {"x": x, "f": f, "g": g}, "reassociation not bijective", "iso")
        if cat_iso(R.src, R.tgt) is None:
            return failure_record(adder, {"x": x, "f": f, "g": g}, "no isomorphism found", "iso")
        return None
    return drive_cases("reassociation", adder, cases, seed, case)


def check_flatten_functors(cases: int = 30, seed: int = 0) -> CheckResult:
    """Flatten associativity as an equality of functors: for every (i, j),
    the injection of g(i, j) into the left-nested sum followed by the
    reassociation functor equals the composite of the inner injection into
    (f (x) g)(i) and the outer injection."""
    adder = make_cat_adder()

    def case(rng):
        x = adder.elem_gen(rng)
        f = adder.family_gen(x, rng)
        s = adder.sum_op(x, f)
        g = adder.family_gen(s, rng)
        F, G = f.data, g.data
        R = reassociation_functor(x, F, G)
        lhs = oplax_colim(s, G, with_cocone=True)
        box = boxtimes_family(x, F, G)
        rhs = oplax_colim(x, box, with_cocone=True)
        for i in x.objects:
            inner = oplax_colim(F.at(i), pullback_family(x, F, G, i), with_cocone=True)
            if inner.cat != box.at(i):
                return failure_record(adder, {"x": x, "f": f, "g": g, "i": i}, inner.cat, box.at(i))
            outer = rhs.injections[i]
            for j in F.at(i).objects:
                route1 = lhs.injections[(i, j)].then(R)
                route2 = inner.injections[j].then(outer)
                if route1 != route2:
                    return failure_record(adder, {"x": x, "f": f, "g": g, "point": (i, j)},
                                          route1, route2)
        return None
    return drive_cases("flatten_functors", adder, cases, seed, case)


def check_unit_colimits() -> CheckResult:
    """The oplax colimit of the constant terminal family is isomorphic to its
    index, for every catalog category."""
    res = CheckResult("unit_colimit", "cat")
    one = terminal()
    for name, I in catalog().items():
        res.cases_run += 1
        C = oplax_colim(I, CatFamily.constant(I, one)).cat
        if cat_iso(C, I) is None:
            res.failures.append({"index": name, "colimit": C.to_json()})
    return res


# FinSet colimits and the Cat-module of finite sets

class SetFamily:
    """A functor from ``index`` into finite sets: a tuple of elements per
    object and a function (dict) per morphism."""

    def __init__(self, index: FinCat, sets, maps):
        self.index = index
        self.sets = tuple(tuple(s) for s in sets)
        self.maps = tuple(dict(m) for m in maps)
        self.validate()

    def validate(self) -> None:
        I = self.index
        if len(self.sets) != I.n_objects or len(self.maps) != I.n_morphisms:
            raise CategoryError("set family sizes do not match the index")
        for k, m in enumerate(self.maps):
            S, T = self.sets[I.src[k]], set(self.sets[I.tgt[k]])
            if set(m) != set(S) or any(v not in T for v in m.values()):
                raise CategoryError(f"map for {I.mor_ids[k]!r} is not a function between the sets")
        for o in range(I.n_objects):
            if any(v != a for a, v in self.maps[I.ident[o]].items()):
                raise CategoryError("identity morphism does not act as the identity")
        for g in range(I.n_morphisms):
            for f in range(I.n_morphisms):
                h = I.comp[g][f]
                if h is None:
                    continue
                for a in self.sets[I.src[f]]:
                    if self.maps[g][self.maps[f][a]] != self.maps[h][a]:
                        raise CategoryError("set family is not functorial")

    @classmethod
    def constant(cls, index: FinCat, S) -> "SetFamily":
        S = tuple(S)
        return cls(index, [S] * index.n_objects, [{a: a for a in S}] * index.n_morphisms)

    def to_json(self) -> dict:
        return {"index": self.index.to_json(), "sets": [list(map(_thaw, s)) for s in self.sets]}


@dataclass
class FinSetColimit:
    """Quotient of the disjoint union with its cocone maps."""
    elements: tuple
    cocone: dict

    @property
    def size(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        return {"size": self.size, "elements": [serialize_cat(e) for e in self.elements]}


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb, key=repr)] = min(ra, rb, key=repr)


def finset_colim(I: FinCat, F: SetFamily) -> FinSetColimit:
    """Disjoint union of the F(i) modulo x ~ F(a)(x)."""
    items = [(i, a) for i in I.objects for a in F.sets[I.obj_index(i)]]
    uf = _UnionFind(items)
    for k in range(I.n_morphisms):
        i, i2 = I.objects[I.src[k]], I.objects[I.tgt[k]]
        for a, b in F.maps[k].items():
            uf.union((i, a), (i2, b))
    classes = {}
    for it in items:
        classes.setdefault(uf.find(it), []).append(it)
    elements = tuple(frozenset(v) for _, v in sorted(classes.items(), key=lambda kv: repr(kv[0])))
    where = {it: cls for cls in elements for it in cls}
    cocone = {i: {a: where[(i, a)] for a in F.sets[I.obj_index(i)]} for i in I.objects}
    return FinSetColimit(elements, cocone)


def random_set_family(index: FinCat, rng: random.Random, max_size_: int = 3, tries: int = 50) -> SetFamily:
    I = index
    for _ in range(tries):
        sets = [tuple(f"{o}.{k}" if not isinstance(o, tuple) else (o, k) for k in range(rng.randint(0, max_size_)))
                for o in I.objects]
        maps = [None] * I.n_morphisms
        for o in range(I.n_objects):
            maps[I.ident[o]] = {a: a for a in sets[o]}
        order = I.non_identities()

        def ok():
            for g in range(I.n_morphisms):
                for f in range(I.n_morphisms):
                    h = I.comp[g][f]
                    if h is None or maps[g] is None or maps[f] is None or maps[h] is None:
                        continue
                    if any(maps[g][maps[f][a]] != maps[h][a] for a in sets[I.src[f]]):
                        return False
            return True

        def assign(pos):
            if pos == len(order):
                return True
            k = order[pos]
            S, T = sets[I.src[k]], sets[I.tgt[k]]
            if S and not T:
                return False
            options = list(itertools.product(T, repeat=len(S)))
            rng.shuffle(options)
            for img in options[:64]:
                maps[k] = dict(zip(S, img))
                if ok() and assign(pos + 1):
                    return True
                maps[k] = None
            return False

        if assign(0):
            return SetFamily(I, sets, maps)
    raise Skip("no functor into finite sets found")


def nested_colimit_comparison(I: FinCat, F: CatFamily, G: SetFamily):
    """Compare colim over (sum_I F) of G with colim_i colim_{j in F(i)} G(i, j).

    Returns (lhs, rhs, mapping) where mapping sends each lhs class to the rhs
    class of the same generators, or raises CategoryError if the canonical
    comparison is not a well-defined bijection."""
    total = G.index
    lhs = finset_colim(total, G)
    inner_cols = []
    for i in range(I.n_objects):
        pb_idx = F.cats[i]
        omap = [total.obj_index((I.objects[i], jl)) for jl in F.cats[i].objects]
        mmap = [_total_morphism(total, I, F, I.ident[i], F.cats[i].src[b], b) for b in range(F.cats[i].n_morphisms)]
        sl = SetFamily(pb_idx, [G.sets[o] for o in omap], [G.maps[m] for m in mmap])
        inner_cols.append(finset_colim(pb_idx, sl))
    H_sets = [c.elements for c in inner_cols]
    H_maps = []
    for a in range(I.n_morphisms):
        i, i2 = I.src[a], I.tgt[a]
        Fa = F.functors[a]
        m = {}
        for cls in inner_cols[i].elements:
            images = set()
            for jl, elem in cls:
                j = F.cats[i].obj_index(jl)
                conn = G.maps[_total_morphism(total, I, F, a, j, F.cats[i2].ident[Fa.obj_map[j]])]
                images.add(inner_cols[i2].cocone[F.cats[i2].objects[Fa.obj_map[j]]][conn[elem]])
            if len(images) != 1:
                raise CategoryError("induced map on inner colimits is not well defined")
            m[cls] = images.pop()
        H_maps.append(m)
    rhs = finset_colim(I, SetFamily(I, H_sets, H_maps))
    mapping = {}
    for cls in lhs.elements:
        images = set()
        for (ij, elem) in cls:
            i, jl = ij
            images.add(rhs.cocone[i][inner_cols[I.obj_index(i)].cocone[jl][elem]])
        if len(images) != 1:
            raise CategoryError("comparison map is not well defined")
        mapping[cls] = images.pop()
    if len(set(mapping.values())) != len(mapping) or len(mapping) != rhs.size:
        raise CategoryError("comparison map is not a bijection")
    return lhs, rhs, mapping


def make_cat_set_module() -> RightModuleInstance:
    """Finite sets as a right module over the Cat adder: sums are colimits."""
    base = make_cat_adder()

    def msum(x, G):
        return finset_colim(x, G.data)

    def mfam(x, rng):
        return Family(_cat_fiber(x), lambda i: None, "set-functor", random_set_family(x, rng))

    def const(x, m):
        return Family(_cat_fiber(x), lambda i: m, "set-functor", SetFamily.constant(x, m))

    def mbox(x, f, g):
        # (f (x) g)(i) = colim over f(i) of g(i, -)
        F, G = f.data, g.data
        total = G.index
        sets, cols = [], []
        for i in range(x.n_objects):
            omap = [total.obj_index((x.objects[i], jl)) for jl in F.cats[i].objects]
            mmap = [_total_morphism(total, x, F, x.ident[i], F.cats[i].src[b], b) for b in range(F.cats[i].n_morphisms)]
            col = finset_colim(F.cats[i], SetFamily(F.cats[i], [G.sets[o] for o in omap], [G.maps[m] for m in mmap]))
            cols.append(col)
            sets.append(col.elements)
        maps = []
        for a in range(x.n_morphisms):
            i, i2 = x.src[a], x.tgt[a]
            Fa = F.functors[a]
            m = {}
            for cls in cols[i].elements:
                jl, elem = next(iter(sorted(cls, key=repr)))
                j = F.cats[i].obj_index(jl)
                conn = G.maps[_total_morphism(total, x, F, a, j, F.cats[i2].ident[Fa.obj_map[j]])]
                m[cls] = cols[i2].cocone[F.cats[i2].objects[Fa.obj_map[j]]][conn[elem]]
            maps.append(m)
        return Family(_cat_fiber(x), lambda i: None, "set-functor", SetFamily(x, sets, maps))

    def equal(a, b):
        # colimits are compared as sets up to bijection
        return a.size == b.size if isinstance(a, FinSetColimit) and isinstance(b, FinSetColimit) else \
            _size(a) == _size(b)

    return RightModuleInstance(
        name="cat-finset",
        base=base,
        elem_kind="finite sets",
        msum_op=msum,
        equality=EqualityNotion.isomorphism(lambda a, b: True if equal(a, b) else None),
        melem_gen=lambda rng: tuple(range(rng.randint(0, 4))),
        mfamily_gen=mfam,
        const_mfamily_op=const,
        mboxtimes_op=mbox,
        serializer=serialize_cat,
        description="finite sets with colimits as sums",
    )


def _size(v):
    if isinstance(v, FinSetColimit):
        return v.size
    return len(v)


def cat_module_suite(cases: int = 30, seed: int = 0) -> CheckResult:
    """Unit: the colimit over the terminal category is the set itself.
    Sum associativity: the canonical comparison between the colimit over an
    oplax colimit and the iterated colimit is a bijection."""
    base = make_cat_adder()
    mod = make_cat_set_module()

    def unit_case(rng):
        S = tuple(range(rng.randint(0, 5)))
        col = finset_colim(terminal(), SetFamily.constant(terminal(), S))
        if col.size != len(S) or any(len(c) != 1 for c in col.elements):
            return failure_record(mod, {"m": S}, col, S)
        return None

    def assoc_case(rng):
        x = base.elem_gen(rng)
        f = base.family_gen(x, rng)
        total = oplax_colim(x, f.data).cat
        G = random_set_family(total, rng)
        try:
            nested_colimit_comparison(x, f.data, G)
        except CategoryError as exc:
            return failure_record(mod, {"x": x, "f": f, "g": G}, str(exc), "bijection")
        return None

    res = CheckResult("module", "cat-finset")
    for part in (drive_cases("module_unit", mod, cases, seed, unit_case),
                 drive_cases("module_sum_assoc", mod, cases, seed, assoc_case)):
        for fail in part.failures:
            fail["clause"] = part.axiom
        res.merge(part)
    return res


class SetFunctor:
    """An endofunctor of finite sets: on_set(S) and on_map(function, S, T)."""

    def __init__(self, name: str, on_set, on_map):
        self.name, self.on_set, self.on_map = name, on_set, on_map


def identity_set_functor() -> SetFunctor:
    return SetFunctor("identity", lambda S: tuple(S), lambda m, S, T: dict(m))


def product_set_functor(k: int = 2) -> SetFunctor:
    """S -> S x {0..k-1}; left adjoint to the k-th power, so cocontinuous."""
    return SetFunctor(f"times{k}", lambda S: tuple((a, t) for a in S for t in range(k)),
                      lambda m, S, T: {(a, t): (m[a], t) for a in S for t in range(k)})


def square_set_functor() -> SetFunctor:
    """S -> S x S; does not preserve coproducts."""
    return SetFunctor("square", lambda S: tuple((a, b) for a in S for b in S),
                      lambda m, S, T: {(a, b): (m[a], m[b]) for a in S for b in S})


def pointed_set_functor() -> SetFunctor:
    """S -> S + {*}; collapses coproducts wrongly (two points where one is needed)."""
    return SetFunctor("plus_point", lambda S: tuple(S) + ("*",),
                      lambda m, S, T: {**{a: m[a] for a in S}, "*": "*"})


def _apply_diagram(phi: SetFunctor, G: SetFamily) -> SetFamily:
    I = G.index
    sets = [phi.on_set(S) for S in G.sets]
    maps = [phi.on_map(G.maps[k], G.sets[I.src[k]], G.sets[I.tgt[k]]) for k in range(I.n_morphisms)]
    return SetFamily(I, sets, maps)


def cocone_comparison(phi: SetFunctor, I: FinCat, G: SetFamily):
    """The map colim(phi o G) -> phi(colim G) induced by phi of the colimit
    cocone; returns (mapping or None, reason)."""
    col = finset_colim(I, G)
    C = col.elements
    phiC = phi.on_set(C)
    phiG = _apply_diagram(phi, G)
    col2 = finset_colim(I, phiG)
    mapping = {}
    for cls in col2.elements:
        images = set()
        for i, e in cls:
            idx = I.obj_index(i)
            tau = col.cocone[i]
            images.add(phi.on_map(tau, G.sets[idx], C)[e])
        if len(images) != 1:
            return None, "comparison not well defined"
        mapping[cls] = images.pop()
    if len(set(mapping.values())) != len(mapping):
        return None, "comparison not injective"
    if set(mapping.values()) != set(phiC):
        return None, f"comparison not surjective: {len(mapping)} classes onto {len(phiC)} elements"
    return mapping, ""


def cat_linear_check(phi: SetFunctor, cases: int = 50, seed: int = 0) -> CheckResult:
    """phi sends colimit cocones to colimit cocones on generated diagrams,
    including the empty diagram and discrete (coproduct) diagrams.  The
    arrow-category form of the argument is checked as well: over x = I x arrow
    with g0 = G and g1 the constant diagram at colim G, the linearity square
    commutes."""
    mod = make_cat_set_module()
    fixed = [empty(), discrete(2)]

    def case(rng):
        k = rng.randrange(len(fixed) + 3)
        I = fixed[k] if k < len(fixed) else random_index(rng)
        G = random_set_family(I, rng)
        mapping, why = cocone_comparison(phi, I, G)
        if mapping is None:
            return failure_record(mod, {"functor": phi.name, "index": I, "diagram": G}, why, "colimit cocone")
        # arrow trick: the morphism sum_x g(0 -> 1) must match phi of the cocone
        col = finset_colim(I, G)
        for i in I.objects:
            idx = I.obj_index(i)
            tau_phi = phi.on_map(col.cocone[i], G.sets[idx], col.elements)
            for e in phi.on_set(G.sets[idx]):
                cls = finset_colim(I, _apply_diagram(phi, G)).cocone[i][e]
                if mapping[cls] != tau_phi[e]:
                    return failure_record(mod, {"functor": phi.name, "index": I, "object": i}, mapping[cls],
                                          tau_phi[e])
        return None

    res = drive_cases("cat_linear", mod, cases, seed, case)
    res.instance = f"cat-finset/{phi.name}"
    return res


__all__ = [
    "CategoryError",
    "CapError",
    "FinCat",
    "FinFunctor",
    "FinNatTrans",
    "CatFamily",
    "IsoWitness",
    "OplaxColimit",
    "all_functors",
    "cat_iso",
    "oplax_colim",
    "lax_colim",
    "reindex_family",
    "pullback_family",
    "boxtimes_family",
    "partial_family",
    "reassociation_functor",
    "is_isomorphism",
    "discrete",
    "terminal",
    "empty",
    "arrow",
    "chain",
    "span",
    "cospan",
    "parallel_pair",
    "idempotent",
    "cyclic_group",
    "isomorphism_pair",
    "from_poset",
    "from_monoid",
    "product",
    "catalog",
    "random_cat_family",
    "random_index",
    "make_cat_adder",
    "check_cardinality_oracle",
    "check_reassociation",
    "check_flatten_functors",
    "check_unit_colimits",
    "SetFamily",
    "FinSetColimit",
    "finset_colim",
    "random_set_family",
    "nested_colimit_comparison",
    "make_cat_set_module",
    "cat_module_suite",
    "SetFunctor",
    "identity_set_functor",
    "product_set_functor",
    "square_set_functor",
    "pointed_set_functor",
    "cocone_comparison",
    "cat_linear_check",
]
