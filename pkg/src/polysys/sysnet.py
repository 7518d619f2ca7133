"""Dynamic rewirers: coalgebras on ``[p_1 ⊗ ... ⊗ p_k, p']`` and their operadic composition.

A rewirer keeps its readout as explicit polynomial maps out of the tensor of
its inner interfaces rather than as positions of the internal hom, which is
usually far too large to enumerate.  ``rewirer_as_coalgebra`` bridges the two
views when the hom is small.

State flattening is row-major and left-to-right, inner systems before the
rewirer's own state.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .coalg import Coalgebra, restrict, tensor_coalg
from .finpoly import (
    DEFAULT_SIZE_GUARD,
    FinPoly,
    InterfaceMismatch,
    PolyMap,
    Y,
    compose_maps,
    hom_set,
    identity_map,
    ihom_compose,
    join_position,
    monomial,
    split_direction,
    split_position,
    tensor_all,
    tensor_all_maps,
)


@dataclass(frozen=True)
class Rewirer:
    """A morphism ``(p_1, ..., p_k) -> p'`` of the Sys operad.

    ``readout[s]`` maps ``p_1 ⊗ ... ⊗ p_k`` to ``p'``; ``update[s][k][d]`` is the
    next state after the inner systems show the (flattened) position tuple ``k``
    and the outside sends direction ``d`` at ``readout[s].fwd[k]``.
    """

    inner: tuple[FinPoly, ...]
    outer: FinPoly
    readout: tuple[PolyMap, ...]
    update: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        inner = tuple(self.inner)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "readout", tuple(self.readout))
        update = tuple(tuple(tuple(int(t) for t in row) for row in rows) for rows in self.update)
        object.__setattr__(self, "update", update)
        src = tensor_all(inner)
        n = len(self.readout)
        if n == 0:
            raise InterfaceMismatch("a rewirer needs at least one state")
        if len(update) != n:
            raise InterfaceMismatch("one update table per state is required")
        for s, phi in enumerate(self.readout):
            if phi.source != src or phi.target != self.outer:
                raise InterfaceMismatch(f"readout of state {s} has the wrong type")
            if len(update[s]) != len(src):
                raise InterfaceMismatch(f"update of state {s} must cover every inner position tuple")
            for k, row in enumerate(update[s]):
                if len(row) != self.outer[phi.fwd[k]]:
                    raise InterfaceMismatch(f"update of state {s} at {k} has the wrong width")
                if any(not 0 <= t < n for t in row):
                    raise InterfaceMismatch(f"update of state {s} leaves the state set")

    @property
    def n_states(self) -> int:
        return len(self.readout)

    @property
    def arity(self) -> int:
        return len(self.inner)

    @property
    def source(self) -> FinPoly:
        return tensor_all(self.inner)

    def is_stateless(self) -> bool:
        return self.n_states == 1

    def to_dict(self) -> dict:
        return {
            "inner": [p.to_dict() for p in self.inner],
            "outer": self.outer.to_dict(),
            "states": self.n_states,
            "readout": [phi.to_dict() for phi in self.readout],
            "update": [[list(row) for row in rows] for rows in self.update],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Rewirer:
        inner = tuple(FinPoly.from_dict(p) for p in data["inner"])
        outer = FinPoly.from_dict(data["outer"])
        src = tensor_all(inner)
        readout = tuple(PolyMap.from_dict(m, src, outer) for m in data["readout"])
        w = cls(inner, outer, readout, data["update"])
        if w.n_states != int(data["states"]):
            raise InterfaceMismatch("'states' disagrees with the readout list")
        return w


def wiring(inner: Sequence[FinPoly], phi: PolyMap) -> Rewirer:
    """The stateless rewirer that always reads out ``phi``."""
    return Rewirer(tuple(inner), phi.target, (phi,),
                   (tuple((0,) * phi.target[j] for j in phi.fwd),))


def identity_rewirer(p: FinPoly) -> Rewirer:
    return wiring((p,), identity_map(p))


def as_nullary(c: Coalgebra) -> Rewirer:
    """A plain p'-system as a 0-ary rewirer: each state reads out the point ``y -> p'``."""
    p = c.interface
    readout = tuple(PolyMap(Y, p, (i,), ((0,) * p[i],)) for i in c.readout)
    return Rewirer((), p, readout, tuple((row,) for row in c.update))


def controlled_plant_wiring(a: int, b: int, c: int) -> Rewirer:
    """Plant ``C y^{AB}`` and controller ``B y^C`` wired into ``C y^A``.

    The plant's output leaves the box and also feeds the controller; the
    controller's output is the plant's second input.
    """
    plant, controller, outer = monomial(c, a * b), monomial(b, c), monomial(c, a)
    fwd = []
    bwd = []
    for ci in range(c):
        for bi in range(b):
            fwd.append(ci)
            # direction (plant (x, bi), controller ci) of plant ⊗ controller
            bwd.append(tuple((x * b + bi) * c + ci for x in range(a)))
    src = tensor_all((plant, controller))
    return wiring((plant, controller), PolyMap(src, outer, tuple(fwd), tuple(bwd)))


def apply_sys(w: Rewirer, inner: Sequence[Coalgebra]) -> Coalgebra:
    """Combine inner systems through ``w`` into one system on its outer interface.

    States are ``(t_1, ..., t_k, s)`` flattened row-major.
    """
    if len(inner) != w.arity:
        raise InterfaceMismatch(f"rewirer expects {w.arity} systems, got {len(inner)}")
    for j, (c, p) in enumerate(zip(inner, w.inner)):
        if c.interface != p:
            raise InterfaceMismatch(f"system {j} does not have interface {p}")
    sizes = [c.n_states for c in inner] + [w.n_states]
    readout = []
    update = []
    for state in product(*(range(n) for n in sizes)):
        *ts, s = state
        positions = [c.readout[t] for c, t in zip(inner, ts)]
        k = join_position(w.inner, positions)
        phi = w.readout[s]
        readout.append(phi.fwd[k])
        counts = [p[i] for p, i in zip(w.inner, positions)]
        row = []
        for d in range(w.outer[phi.fwd[k]]):
            dirs = split_direction(counts, phi.bwd[k][d])
            nxt = [c.update[t][e] for c, t, e in zip(inner, ts, dirs)]
            nxt.append(w.update[s][k][d])
            row.append(join_position_sizes(sizes, nxt))
        update.append(tuple(row))
    return Coalgebra(w.outer, tuple(readout), tuple(update))


def join_position_sizes(sizes: Sequence[int], idx: Sequence[int]) -> int:
    k = 0
    for n, i in zip(sizes, idx):
        k = k * n + i
    return k


def split_position_sizes(sizes: Sequence[int], k: int) -> tuple[int, ...]:
    out = []
    for n in reversed(sizes):
        k, i = divmod(k, n)
        out.append(i)
    return tuple(reversed(out))


def compose_sys(outer: Rewirer, inners: Sequence[Rewirer]) -> Rewirer:
    """Operadic composite: plug ``inners[j]`` into the ``j``-th inner slot of ``outer``.

    The readout at a composite state is ``(⊗_j readout_j) ; readout_outer``;
    the state tuple is ``(s_1, ..., s_k, s_outer)``.
    """
    if len(inners) != outer.arity:
        raise InterfaceMismatch(f"expected {outer.arity} inner rewirers, got {len(inners)}")
    for j, (v, q) in enumerate(zip(inners, outer.inner)):
        if v.outer != q:
            raise InterfaceMismatch(f"inner rewirer {j} does not land in {q}")
    leaves = tuple(p for v in inners for p in v.inner)
    sizes = [v.n_states for v in inners] + [outer.n_states]
    groups = [v.inner for v in inners]
    readout = []
    update = []
    for state in product(*(range(n) for n in sizes)):
        *ss, s = state
        inner_maps = [v.readout[t] for v, t in zip(inners, ss)]
        # tensor_all of tensor_alls flattens exactly like tensor_all of the leaves
        plug = tensor_all_maps(inner_maps)
        phi = compose_maps(_retarget_source(plug, leaves), outer.readout[s])
        readout.append(phi)
        rows = []
        for kk in range(len(phi.source)):
            parts = _split_groups(groups, leaves, kk)
            ks = [join_position(g, part) for g, part in zip(groups, parts)]
            xs = [m.fwd[k] for m, k in zip(inner_maps, ks)]
            x = join_position(outer.inner, xs)
            psi = outer.readout[s]
            counts = [q[xi] for q, xi in zip(outer.inner, xs)]
            row = []
            for d in range(outer.outer[psi.fwd[x]]):
                es = split_direction(counts, psi.bwd[x][d])
                nxt = [v.update[t][k][e] for v, t, k, e in zip(inners, ss, ks, es)]
                nxt.append(outer.update[s][x][d])
                row.append(join_position_sizes(sizes, nxt))
            rows.append(tuple(row))
        update.append(tuple(rows))
    return Rewirer(leaves, outer.outer, tuple(readout), tuple(update))


def _retarget_source(m: PolyMap, source: FinPoly | Sequence[FinPoly]) -> PolyMap:
    src = tensor_all(source) if not isinstance(source, FinPoly) else source
    if src.directions != m.source.directions:
        raise InterfaceMismatch("nested and flat tensors disagree")
    return PolyMap(src, m.target, m.fwd, m.bwd)


def _split_groups(groups: Sequence[Sequence[FinPoly]], leaves: Sequence[FinPoly],
                  k: int) -> list[tuple[int, ...]]:
    flat = split_position(leaves, k)
    out = []
    at = 0
    for g in groups:
        out.append(flat[at:at + len(g)])
        at += len(g)
    return out


def check_rewirer_morphism(w: Rewirer, w2: Rewirer, f: Sequence[int]) -> bool:
    """``f`` on states commutes with readout and update (a morphism of hom-coalgebras)."""
    if (w.inner, w.outer) != (w2.inner, w2.outer):
        raise InterfaceMismatch("rewirers have different types")
    for s in range(w.n_states):
        t = f[s]
        if w2.readout[t] != w.readout[s]:
            return False
        for row, row2 in zip(w.update[s], w2.update[t]):
            if any(f[a] != b for a, b in zip(row, row2)):
                return False
    return True


def rewirer_as_coalgebra(w: Rewirer, limit: int = DEFAULT_SIZE_GUARD) -> Coalgebra:
    """View ``w`` as a coalgebra on the enumerated internal hom ``[p_1 ⊗ ... ⊗ p_k, p']``."""
    hs = hom_set(w.source, w.outer, limit)
    readout = []
    update = []
    for s, phi in enumerate(w.readout):
        k = hs.index(phi)
        readout.append(k)
        update.append(tuple(w.update[s][i][e] for i in range(len(w.source))
                            for e in range(w.outer[phi.fwd[i]])))
    return Coalgebra(hs.poly, tuple(readout), tuple(update))


def coalgebra_as_rewirer(c: Coalgebra, inner: Sequence[FinPoly], outer: FinPoly,
                         limit: int = DEFAULT_SIZE_GUARD) -> Rewirer:
    """Inverse of ``rewirer_as_coalgebra``."""
    inner = tuple(inner)
    hs = hom_set(tensor_all(inner), outer, limit)
    if c.interface != hs.poly:
        raise InterfaceMismatch("coalgebra is not on the expected internal hom")
    readout = tuple(hs.maps[k] for k in c.readout)
    update = []
    for s, phi in enumerate(readout):
        k = c.readout[s]
        update.append(tuple(
            tuple(c.update[s][hs.encode(k, i, e)] for e in range(outer[phi.fwd[i]]))
            for i in range(len(phi.source))))
    return Rewirer(inner, outer, readout, tuple(update))


def compose_via_ihom(c1: Coalgebra, c2: Coalgebra, p: FinPoly, q: FinPoly, r: FinPoly,
                     limit: int = DEFAULT_SIZE_GUARD) -> Coalgebra:
    """Serial composite of a ``[p, q]``- and a ``[q, r]``-coalgebra: tensor, then ``ihom_compose``."""
    return restrict(tensor_coalg(c1, c2), ihom_compose(p, q, r, limit))
