"""Finite p-coalgebras: generalized Moore machines with a polynomial interface."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .finpoly import (
    FinPoly,
    FinSet,
    InterfaceMismatch,
    PolyMap,
    Y,
    _size,
    monomial,
    tensor,
)


class PTree:
    """A depth-truncated p-tree: a root position and one child per direction.

    Subtrees are shared freely, and the hash is computed once at construction,
    so comparing unfoldings of a finite machine stays cheap.
    """

    __slots__ = ("position", "children", "depth", "_hash")

    def __init__(self, position: int, children: Sequence[PTree] = (), depth: int = 0):
        self.position = position
        self.children = tuple(children)
        self.depth = depth
        if depth == 0 and self.children:
            raise ValueError("a depth-0 tree has no children")
        if any(c.depth != depth - 1 for c in self.children):
            raise ValueError("child depth must be one less than the parent")
        self._hash = hash((position, depth, tuple(hash(c) for c in self.children)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, PTree) or self._hash != other._hash:
            return False
        return (self.position, self.depth, self.children) == (
            other.position, other.depth, other.children)

    def __repr__(self):
        return f"PTree({self.position}, depth={self.depth}, children={len(self.children)})"

    def truncate(self, depth: int) -> PTree:
        if depth > self.depth:
            raise ValueError("cannot truncate to a larger depth")
        if depth == 0:
            return PTree(self.position)
        return PTree(self.position, [c.truncate(depth - 1) for c in self.children], depth)

    def fits(self, p: FinPoly) -> bool:
        """Branching at every interior node matches the direction count of its label."""
        if not 0 <= self.position < len(p):
            return False
        if self.depth == 0:
            return True
        return len(self.children) == p[self.position] and all(c.fits(p) for c in self.children)

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)


@dataclass(frozen=True)
class Coalgebra:
    """A p-coalgebra ``S -> p ◁ S`` split into readout and update.

    ``update[s][d]`` is the successor of ``s`` along direction ``d`` of the
    position ``readout[s]``.
    """

    interface: FinPoly
    readout: tuple[int, ...]
    update: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        readout = tuple(int(i) for i in self.readout)
        update = tuple(tuple(int(t) for t in row) for row in self.update)
        object.__setattr__(self, "readout", readout)
        object.__setattr__(self, "update", update)
        p, n = self.interface, len(readout)
        if len(update) != n:
            raise InterfaceMismatch("one update row per state is required")
        for s, (i, row) in enumerate(zip(readout, update)):
            if not 0 <= i < len(p):
                raise InterfaceMismatch(f"state {s} reads out to a missing position {i}")
            if len(row) != p[i]:
                raise InterfaceMismatch(
                    f"state {s} sits at a position with {p[i]} directions, got {len(row)} successors")
            if any(not 0 <= t < n for t in row):
                raise InterfaceMismatch(f"state {s} has a successor outside the state set")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(FinSet(n, self.labels).labels))

    @property
    def n_states(self) -> int:
        return len(self.readout)

    @property
    def states(self) -> FinSet:
        return FinSet(self.n_states, self.labels)

    def state_label(self, s: int) -> str:
        return self.labels[s] if self.labels is not None else str(s)

    def step(self, s: int, d: int) -> int:
        return self.update[s][d]

    def to_dict(self) -> dict:
        out = {
            "interface": self.interface.to_dict(),
            "states": self.n_states,
            "readout": list(self.readout),
            "update": [list(r) for r in self.update],
        }
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> Coalgebra:
        c = cls(FinPoly.from_dict(data["interface"]), tuple(data["readout"]),
                tuple(tuple(r) for r in data["update"]),
                tuple(data["labels"]) if "labels" in data else None)
        if c.n_states != int(data["states"]):
            raise InterfaceMismatch("'states' disagrees with the readout table")
        return c


@dataclass(frozen=True)
class InitializedMachine:
    machine: Coalgebra
    start: int

    def __post_init__(self):
        if not 0 <= self.start < self.machine.n_states:
            raise ValueError(f"start state {self.start} is not a state")


def mk_moore(n_states: int | FinSet, a: int | FinSet, b: int | FinSet,
             readout: Callable[[int], int], update: Callable[[int, int], int]) -> Coalgebra:
    """An (A, B)-Moore machine as a coalgebra on ``B y^A``."""
    n, na = _size(n_states), _size(a)
    p = monomial(b, a)
    labels = n_states.labels if isinstance(n_states, FinSet) else None
    return Coalgebra(p, tuple(readout(s) for s in range(n)),
                     tuple(tuple(update(s, x) for x in range(na)) for s in range(n)), labels)


def unit_coalgebra() -> Coalgebra:
    """The one-state y-coalgebra, unit of the coalgebra tensor."""
    return Coalgebra(Y, (0,), ((0,),))


def to_lens_form(c: Coalgebra) -> PolyMap:
    """The map ``S y^S -> p`` with readout forward and update backward."""
    return PolyMap(monomial(c.n_states, c.n_states), c.interface, c.readout, c.update)


def from_lens_form(phi: PolyMap) -> Coalgebra:
    src = phi.source
    n = len(src)
    if any(d != n for d in src.directions):
        raise InterfaceMismatch(f"source {src} is not of the form S y^S")
    return Coalgebra(phi.target, phi.fwd, phi.bwd)


def check_coalg_morphism(c: Coalgebra, c2: Coalgebra, f: Sequence[int]) -> bool:
    if c.interface != c2.interface:
        raise InterfaceMismatch("coalgebra morphisms need a shared interface")
    if len(f) != c.n_states:
        raise InterfaceMismatch("state map must be defined on every state")
    for s in range(c.n_states):
        t = f[s]
        if c2.readout[t] != c.readout[s]:
            return False
        if any(f[s1] != t1 for s1, t1 in zip(c.update[s], c2.update[t])):
            return False
    return True


def tensor_coalg(c: Coalgebra, d: Coalgebra) -> Coalgebra:
    """Run ``c`` and ``d`` side by side on ``p ⊗ q``; state ``(s, t)`` is ``s * |T| + t``."""
    p, q = c.interface, d.interface
    nt = d.n_states
    readout = []
    update = []
    for s in range(c.n_states):
        i = c.readout[s]
        for t in range(nt):
            j = d.readout[t]
            readout.append(i * len(q) + j)
            update.append(tuple(
                c.update[s][x] * nt + d.update[t][e] for x in range(p[i]) for e in range(q[j])))
    return Coalgebra(tensor(p, q), tuple(readout), tuple(update))


def tensor_all_coalg(cs: Sequence[Coalgebra]) -> Coalgebra:
    if not cs:
        return unit_coalgebra()
    out = cs[0]
    for c in cs[1:]:
        out = tensor_coalg(out, c)
    return out


def restrict(c: Coalgebra, phi: PolyMap) -> Coalgebra:
    """Change of interface along ``phi: p -> p'``."""
    if phi.source != c.interface:
        raise InterfaceMismatch("interface change must start at the machine's interface")
    readout = tuple(phi.fwd[i] for i in c.readout)
    update = tuple(
        tuple(row[x] for x in phi.bwd[i]) for i, row in zip(c.readout, c.update))
    return Coalgebra(phi.target, readout, update, c.labels)


def iterate(c: Coalgebra, n: int) -> list[PTree]:
    """Depth-``n`` behavior of every state, indexed by state."""
    if n < 0:
        raise ValueError("depth must be non-negative")
    level = [PTree(i) for i in c.readout]
    for depth in range(1, n + 1):
        level = [PTree(c.readout[s], [level[t] for t in c.update[s]], depth)
                 for s in range(c.n_states)]
    return level


def run_stream(m: InitializedMachine, inputs: Sequence[int]) -> list[int]:
    """Feed ``inputs`` to a Moore machine; ``b_n = r(s_n)`` is emitted before ``a_n`` is consumed."""
    c = m.machine
    if not c.interface.is_monomial() or len(c.interface) == 0:
        raise InterfaceMismatch("streams need a monomial interface B y^A")
    width = c.interface[0]
    s = m.start
    out = []
    for a in inputs:
        if not 0 <= a < width:
            raise ValueError(f"input {a} is outside the alphabet of size {width}")
        out.append(c.readout[s])
        s = c.update[s][a]
    return out
