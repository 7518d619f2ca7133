"""Finite polynomial functors, their morphisms and the monoidal closed structure.

A polynomial is stored as one direction count per position.  Positions and
directions are index ranges ``0..n-1``; labels are display metadata only.

Flattening conventions (fixed, since indices are serialized):

* ``p ⊗ q`` position ``(i, j)`` is ``i * len(q) + j``; direction ``(d, e)`` at
  that position is ``d * q[j] + e``.
* Disjoint unions of direction sets (in ``p ◁ q`` and ``[p, q]``) are laid out
  summand after summand, so ``(summand, local)`` becomes ``offset + local``.
* Hom-sets are enumerated lexicographically in ``(fwd, bwd_0, bwd_1, ...)``.
"""
from __future__ import annotations

import bisect
import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import prod
from typing import Iterator, Sequence

DEFAULT_SIZE_GUARD = 10**6


class HomTooLarge(ValueError):
    """A hom-set has more elements than the configured size guard."""


class InterfaceMismatch(ValueError):
    """Two objects that should share an interface do not."""


def _size(x: int | FinSet) -> int:
    return x.size if isinstance(x, FinSet) else int(x)


@dataclass(frozen=True)
class FinSet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.size < 0:
            raise ValueError(f"negative set size {self.size}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.size or len(set(labels)) != len(labels):
                raise ValueError("labels must be distinct and one per element")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(range(self.size))


@dataclass(frozen=True)
class FinPoly:
    """A polynomial ``sum_i y^{directions[i]}`` with finitely many positions.

    Labels are for display only and take no part in equality.
    """

    directions: tuple[int, ...]
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        dirs = tuple(int(d) for d in self.directions)
        if any(d < 0 for d in dirs):
            raise ValueError("direction counts must be non-negative")
        object.__setattr__(self, "directions", dirs)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != len(dirs) or len(set(labels)) != len(labels):
                raise ValueError("labels must be distinct and one per position")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.directions)

    def __getitem__(self, i: int) -> int:
        return self.directions[i]

    @property
    def positions(self) -> FinSet:
        return FinSet(len(self.directions), self.labels)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def position_of(self, label: str) -> int:
        if self.labels is None:
            return int(label)
        return self.labels.index(label)

    def is_monomial(self) -> bool:
        return len(set(self.directions)) <= 1

    def __call__(self, n: int) -> int:
        """Cardinality of ``p(X)`` for a set ``X`` with ``n`` elements."""
        return sum(n**d for d in self.directions)

    def __add__(self, other: FinPoly) -> FinPoly:
        labels = None
        if self.labels is not None and other.labels is not None:
            labels = self.labels + other.labels
        return FinPoly(self.directions + other.directions, labels)

    def sorted_positions(self) -> list[int]:
        """Positions ordered by direction count, then label."""
        return sorted(range(len(self)), key=lambda i: (self[i], self.label(i)))

    def canonical(self) -> tuple[int, ...]:
        return tuple(sorted(self.directions))

    def isomorphic(self, other: FinPoly) -> bool:
        return self.canonical() == other.canonical()

    def coefficients(self) -> dict[int, int]:
        coeffs: dict[int, int] = {}
        for d in self.directions:
            coeffs[d] = coeffs.get(d, 0) + 1
        return coeffs

    def __str__(self):
        if not self.directions:
            return "0"
        terms = []
        for exp, coeff in sorted(self.coefficients().items(), reverse=True):
            mono = "" if exp == 0 else ("y" if exp == 1 else f"y^{exp}")
            if not mono:
                terms.append(str(coeff))
            else:
                terms.append(mono if coeff == 1 else f"{coeff}{mono}")
        return " + ".join(terms)

    def to_dict(self) -> dict:
        out = []
        for i, d in enumerate(self.directions):
            entry: dict = {"directions": d}
            if self.labels is not None:
                entry = {"label": self.labels[i], **entry}
            out.append(entry)
        return {"positions": out}

    @classmethod
    def from_dict(cls, data: dict) -> FinPoly:
        positions = data["positions"]
        dirs = tuple(int(p["directions"]) for p in positions)
        labels = None
        if positions and all("label" in p for p in positions):
            labels = tuple(str(p["label"]) for p in positions)
        return cls(dirs, labels)


def monomial(a: int | FinSet, b: int | FinSet, labels: Sequence[str] | None = None) -> FinPoly:
    """``A y^B``: one position per element of ``A``, each with ``|B|`` directions."""
    if labels is None and isinstance(a, FinSet):
        labels = a.labels
    return FinPoly((_size(b),) * _size(a), None if labels is None else tuple(labels))


def constant(n: int | FinSet) -> FinPoly:
    return monomial(n, 0)


Y = monomial(1, 1)
ONE = constant(1)
ZERO = FinPoly(())

_TERM = re.compile(r"^(\d*)(y(?:\^(\d+))?)?$")


def parse(text: str) -> FinPoly:
    """Parse sums like ``"y^2 + 2y + 1"``; positions follow the written order."""
    text = text.replace(" ", "").replace("**", "^")
    if text == "0":
        return ZERO
    dirs: list[int] = []
    for term in text.split("+"):
        m = _TERM.match(term)
        if not term or m is None:
            raise ValueError(f"cannot parse polynomial term {term!r}")
        coeff_s, mono, exp_s = m.groups()
        coeff = int(coeff_s) if coeff_s else 1
        exp = 0 if mono is None else (int(exp_s) if exp_s else 1)
        if mono is None and not coeff_s:
            raise ValueError(f"cannot parse polynomial term {term!r}")
        dirs.extend([exp] * coeff)
    return FinPoly(tuple(dirs))


@dataclass(frozen=True)
class PolyMap:
    """A morphism ``source -> target``.

    ``fwd[i]`` is the target position of source position ``i`` and
    ``bwd[i][e]`` is the source direction at ``i`` assigned to target
    direction ``e`` at ``fwd[i]``.
    """

    source: FinPoly
    target: FinPoly
    fwd: tuple[int, ...]
    bwd: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        fwd = tuple(int(j) for j in self.fwd)
        bwd = tuple(tuple(int(d) for d in row) for row in self.bwd)
        object.__setattr__(self, "fwd", fwd)
        object.__setattr__(self, "bwd", bwd)
        p, q = self.source, self.target
        if len(fwd) != len(p) or len(bwd) != len(p):
            raise InterfaceMismatch("forward/backward tables must cover every source position")
        for i, j in enumerate(fwd):
            if not 0 <= j < len(q):
                raise InterfaceMismatch(f"position {i} sent outside the target")
            if len(bwd[i]) != q[j]:
                raise InterfaceMismatch(f"backward map at {i} must cover {q[j]} directions")
            if any(not 0 <= d < p[i] for d in bwd[i]):
                raise InterfaceMismatch(f"backward map at {i} leaves the source directions")

    @property
    def key(self) -> tuple:
        return (self.fwd, self.bwd)

    def then(self, other: PolyMap) -> PolyMap:
        return compose_maps(self, other)

    __rshift__ = then

    def to_dict(self) -> dict:
        return {"fwd": list(self.fwd), "bwd": [list(row) for row in self.bwd]}

    @classmethod
    def from_dict(cls, data: dict, source: FinPoly, target: FinPoly) -> PolyMap:
        return cls(source, target, tuple(data["fwd"]), tuple(tuple(r) for r in data["bwd"]))


def _unchecked(source: FinPoly, target: FinPoly, fwd: tuple, bwd: tuple) -> PolyMap:
    # Hot path for enumeration; inputs are valid by construction.
    m = object.__new__(PolyMap)
    object.__setattr__(m, "source", source)
    object.__setattr__(m, "target", target)
    object.__setattr__(m, "fwd", fwd)
    object.__setattr__(m, "bwd", bwd)
    return m


def identity_map(p: FinPoly) -> PolyMap:
    return _unchecked(p, p, tuple(range(len(p))), tuple(tuple(range(d)) for d in p.directions))


def compose_maps(phi: PolyMap, psi: PolyMap) -> PolyMap:
    """Diagrammatic composite ``phi ; psi``."""
    if phi.target != psi.source:
        raise InterfaceMismatch(f"cannot compose: {phi.target} is not {psi.source}")
    fwd = tuple(psi.fwd[j] for j in phi.fwd)
    bwd = tuple(
        tuple(phi.bwd[i][e] for e in psi.bwd[j]) for i, j in enumerate(phi.fwd)
    )
    return _unchecked(phi.source, psi.target, fwd, bwd)


# --- tensor ---------------------------------------------------------------


def tensor(p: FinPoly, q: FinPoly) -> FinPoly:
    return FinPoly(tuple(a * b for a in p.directions for b in q.directions))


def tensor_all(polys: Sequence[FinPoly]) -> FinPoly:
    """Left-folded ``p_1 ⊗ ... ⊗ p_k``; the empty product is ``y``."""
    if not polys:
        return Y
    out = polys[0]
    for p in polys[1:]:
        out = tensor(out, p)
    return out


def tensor_maps(phi: PolyMap, psi: PolyMap) -> PolyMap:
    p, q = phi.source, phi.target
    p2, q2 = psi.source, psi.target
    fwd = []
    bwd = []
    for i in range(len(p)):
        for i2 in range(len(p2)):
            j, j2 = phi.fwd[i], psi.fwd[i2]
            fwd.append(j * len(q2) + j2)
            bwd.append(tuple(
                phi.bwd[i][e] * p2[i2] + psi.bwd[i2][e2]
                for e in range(q[j]) for e2 in range(q2[j2])
            ))
    return _unchecked(tensor(p, p2), tensor(q, q2), tuple(fwd), tuple(bwd))


def tensor_all_maps(maps: Sequence[PolyMap]) -> PolyMap:
    if not maps:
        return identity_map(Y)
    out = maps[0]
    for m in maps[1:]:
        out = tensor_maps(out, m)
    return out


def swap(p: FinPoly, q: FinPoly) -> PolyMap:
    """Symmetry ``p ⊗ q -> q ⊗ p``."""
    fwd = []
    bwd = []
    for i in range(len(p)):
        for j in range(len(q)):
            fwd.append(j * len(p) + i)
            bwd.append(tuple(d * q[j] + e for e in range(q[j]) for d in range(p[i])))
    return _unchecked(tensor(p, q), tensor(q, p), tuple(fwd), tuple(bwd))


def permute_tensor(polys: Sequence[FinPoly], order: Sequence[int]) -> PolyMap:
    """Symmetry ``p_0 ⊗ ... ⊗ p_{k-1} -> p_{order[0]} ⊗ ... ⊗ p_{order[k-1]}``."""
    if sorted(order) != list(range(len(polys))):
        raise ValueError("order must be a permutation of the factors")
    targets = [polys[k] for k in order]
    src, tgt = tensor_all(polys), tensor_all(targets)
    fwd = []
    bwd = []
    for k in range(len(src)):
        idx = split_position(polys, k)
        moved = [idx[o] for o in order]
        fwd.append(join_position(targets, moved))
        counts = [p[i] for p, i in zip(polys, idx)]
        moved_counts = [counts[o] for o in order]
        row = []
        for e in range(tgt[fwd[-1]]):
            parts = split_direction(moved_counts, e)
            d = [0] * len(polys)
            for o, part in zip(order, parts):
                d[o] = part
            row.append(join_direction(counts, d))
        bwd.append(tuple(row))
    return _unchecked(src, tgt, tuple(fwd), tuple(bwd))


def split_position(polys: Sequence[FinPoly], k: int) -> tuple[int, ...]:
    """Inverse of the row-major position flattening of ``tensor_all``."""
    out = []
    for p in reversed(polys):
        k, i = divmod(k, len(p))
        out.append(i)
    return tuple(reversed(out))


def join_position(polys: Sequence[FinPoly], idx: Sequence[int]) -> int:
    k = 0
    for p, i in zip(polys, idx):
        k = k * len(p) + i
    return k


def split_direction(counts: Sequence[int], d: int) -> tuple[int, ...]:
    """Split a flattened ⊗-direction given the per-factor direction counts."""
    out = []
    for n in reversed(counts):
        d, e = divmod(d, n)
        out.append(e)
    return tuple(reversed(out))


def join_direction(counts: Sequence[int], idx: Sequence[int]) -> int:
    d = 0
    for n, e in zip(counts, idx):
        d = d * n + e
    return d


# --- composition product --------------------------------------------------


def composite_positions(p: FinPoly, q: FinPoly) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Positions ``(i, j)`` of ``p ◁ q`` in flattening order."""
    for i, n in enumerate(p.directions):
        for j in itertools.product(range(len(q)), repeat=n):
            yield i, j


def compose_poly(p: FinPoly, q: FinPoly) -> FinPoly:
    """Substitution product ``p ◁ q``."""
    return FinPoly(tuple(sum(q[x] for x in j) for _, j in composite_positions(p, q)))


# --- hom-sets and the internal hom ------------------------------------------


def hom_count(p: FinPoly, q: FinPoly) -> int:
    return prod(sum(a**b for b in q.directions) for a in p.directions)


def iter_maps(p: FinPoly, q: FinPoly) -> Iterator[PolyMap]:
    """All maps ``p -> q`` in canonical order, without a size check."""
    # Backward blocks depend only on (source dir count, target dir count).
    blocks: dict[tuple[int, int], list] = {}

    def block(a: int, b: int) -> list:
        if (a, b) not in blocks:
            blocks[(a, b)] = list(itertools.product(range(a), repeat=b))
        return blocks[(a, b)]

    for fwd in itertools.product(range(len(q)), repeat=len(p)):
        choices = [block(p[i], q[j]) for i, j in enumerate(fwd)]
        for bwd in itertools.product(*choices):
            yield _unchecked(p, q, fwd, bwd)


def enumerate_maps(p: FinPoly, q: FinPoly, limit: int = DEFAULT_SIZE_GUARD) -> list[PolyMap]:
    n = hom_count(p, q)
    if n > limit:
        raise HomTooLarge(f"hom-set too large: |poly({p}, {q})| = {n} > {limit}")
    return list(iter_maps(p, q))


@dataclass(frozen=True)
class HomWitness:
    index: int
    map: PolyMap


class HomSet:
    """An enumerated hom-set ``poly(p, q)``; its elements are the positions of ``[p, q]``."""

    def __init__(self, source: FinPoly, target: FinPoly, limit: int = DEFAULT_SIZE_GUARD):
        self.source = source
        self.target = target
        self.maps = enumerate_maps(source, target, limit)
        self._index = {m.key: k for k, m in enumerate(self.maps)}
        self._offsets = [self._offsets_for(m.fwd) for m in self.maps]
        self.poly = FinPoly(tuple(offs[-1] for offs in self._offsets))

    def _offsets_for(self, fwd: tuple[int, ...]) -> list[int]:
        offs = [0]
        for j in fwd:
            offs.append(offs[-1] + self.target[j])
        return offs

    def __len__(self):
        return len(self.maps)

    def index(self, phi: PolyMap) -> int:
        if phi.source != self.source or phi.target != self.target:
            raise InterfaceMismatch("map does not belong to this hom-set")
        return self._index[phi.key]

    def index_of(self, fwd: tuple, bwd: tuple) -> int:
        return self._index[(fwd, bwd)]

    def witness(self, phi: PolyMap) -> HomWitness:
        k = self.index(phi)
        return HomWitness(k, self.maps[k])

    def encode(self, k: int, i: int, e: int) -> int:
        """Flattened direction of ``[p, q]`` at map ``k`` for source position ``i``, target direction ``e``."""
        return self._offsets[k][i] + e

    def decode(self, k: int, d: int) -> tuple[int, int]:
        offs = self._offsets[k]
        # bisect_right lands past empty summands that share an offset.
        i = bisect.bisect_right(offs, d) - 1
        return i, d - offs[i]


@lru_cache(maxsize=256)
def hom_set(p: FinPoly, q: FinPoly, limit: int = DEFAULT_SIZE_GUARD) -> HomSet:
    return HomSet(p, q, limit)


def internal_hom(p: FinPoly, q: FinPoly, limit: int = DEFAULT_SIZE_GUARD) -> FinPoly:
    """``[p, q]``: one position per map ``p -> q``; directions ``sum_i q[phi(i)]``."""
    return hom_set(p, q, limit).poly


def curry(f: PolyMap, r: FinPoly, p: FinPoly, limit: int = DEFAULT_SIZE_GUARD) -> PolyMap:
    """Transpose ``f: r ⊗ p -> q`` to ``r -> [p, q]``."""
    if f.source != tensor(r, p):
        raise InterfaceMismatch("curry expects a map out of r ⊗ p")
    q = f.target
    hs = hom_set(p, q, limit)
    fwd = []
    bwd = []
    np_ = len(p)
    for k in range(len(r)):
        rows = [f.bwd[k * np_ + i] for i in range(np_)]
        phi_fwd = tuple(f.fwd[k * np_ + i] for i in range(np_))
        phi_bwd = tuple(tuple(d % p[i] for d in rows[i]) for i in range(np_))
        fwd.append(hs.index_of(phi_fwd, phi_bwd))
        bwd.append(tuple(d // p[i] for i in range(np_) for d in rows[i]))
    return _unchecked(r, hs.poly, tuple(fwd), tuple(bwd))


def uncurry(g: PolyMap, p: FinPoly, q: FinPoly, limit: int = DEFAULT_SIZE_GUARD) -> PolyMap:
    """Transpose ``g: r -> [p, q]`` back to ``r ⊗ p -> q``."""
    hs = hom_set(p, q, limit)
    if g.target != hs.poly:
        raise InterfaceMismatch("uncurry expects a map into [p, q]")
    r = g.source
    fwd = []
    bwd = []
    for k in range(len(r)):
        idx = g.fwd[k]
        phi = hs.maps[idx]
        for i in range(len(p)):
            fwd.append(phi.fwd[i])
            bwd.append(tuple(
                g.bwd[k][hs.encode(idx, i, e)] * p[i] + phi.bwd[i][e]
                for e in range(q[phi.fwd[i]])
            ))
    return _unchecked(tensor(r, p), q, tuple(fwd), tuple(bwd))


def point(phi: PolyMap, limit: int = DEFAULT_SIZE_GUARD) -> PolyMap:
    """The map ``y -> [p, q]`` picking out ``phi``."""
    hs = hom_set(phi.source, phi.target, limit)
    k = hs.index(phi)
    return _unchecked(Y, hs.poly, (k,), ((0,) * hs.poly[k],))


@lru_cache(maxsize=64)
def eval_map(p: FinPoly, q: FinPoly, limit: int = DEFAULT_SIZE_GUARD) -> PolyMap:
    """Evaluation ``p ⊗ [p, q] -> q``."""
    hs = hom_set(p, q, limit)
    h = hs.poly
    fwd = []
    bwd = []
    for i in range(len(p)):
        for k, phi in enumerate(hs.maps):
            j = phi.fwd[i]
            fwd.append(j)
            bwd.append(tuple(phi.bwd[i][e] * h[k] + hs.encode(k, i, e) for e in range(q[j])))
    return _unchecked(tensor(p, h), q, tuple(fwd), tuple(bwd))


@lru_cache(maxsize=64)
def ihom_tensor(p1: FinPoly, q1: FinPoly, p2: FinPoly, q2: FinPoly,
                limit: int = DEFAULT_SIZE_GUARD) -> PolyMap:
    """``[p1, q1] ⊗ [p2, q2] -> [p1 ⊗ p2, q1 ⊗ q2]`` sending ``(phi, psi)`` to ``phi ⊗ psi``."""
    h1, h2 = hom_set(p1, q1, limit), hom_set(p2, q2, limit)
    ht = hom_set(tensor(p1, p2), tensor(q1, q2), limit)
    fwd = []
    bwd = []
    for k1, phi in enumerate(h1.maps):
        for k2, psi in enumerate(h2.maps):
            t = ht.index(tensor_maps(phi, psi))
            fwd.append(t)
            n2 = h2.poly[k2]
            row = []
            for i1 in range(len(p1)):
                for i2 in range(len(p2)):
                    m2 = q2[psi.fwd[i2]]
                    for e1 in range(q1[phi.fwd[i1]]):
                        for e2 in range(m2):
                            row.append(h1.encode(k1, i1, e1) * n2 + h2.encode(k2, i2, e2))
            bwd.append(tuple(row))
    return _unchecked(tensor(h1.poly, h2.poly), ht.poly, tuple(fwd), tuple(bwd))


@lru_cache(maxsize=64)
def ihom_compose(p: FinPoly, q: FinPoly, r: FinPoly,
                 limit: int = DEFAULT_SIZE_GUARD) -> PolyMap:
    """``[p, q] ⊗ [q, r] -> [p, r]`` sending ``(phi, psi)`` to ``phi ; psi``."""
    hpq, hqr, hpr = hom_set(p, q, limit), hom_set(q, r, limit), hom_set(p, r, limit)
    fwd = []
    bwd = []
    for k1, phi in enumerate(hpq.maps):
        for k2, psi in enumerate(hqr.maps):
            fwd.append(hpr.index(compose_maps(phi, psi)))
            n2 = hqr.poly[k2]
            row = []
            for i in range(len(p)):
                j = phi.fwd[i]
                for e in range(r[psi.fwd[j]]):
                    row.append(hpq.encode(k1, i, psi.bwd[j][e]) * n2 + hqr.encode(k2, j, e))
            bwd.append(tuple(row))
    return _unchecked(tensor(hpq.poly, hqr.poly), hpr.poly, tuple(fwd), tuple(bwd))
