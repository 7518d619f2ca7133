"""Behaviors of finite coalgebras: p-trees, bisimulation, behavior graphs, safety propositions."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .coalg import Coalgebra, PTree, iterate
from .finpoly import FinPoly, InterfaceMismatch


def unfold(c: Coalgebra, s: int, depth: int) -> PTree:
    """The depth-truncated p-tree of state ``s``."""
    return iterate(c, depth)[s]


def bisim_classes(c: Coalgebra) -> tuple[int, ...]:
    """Coarsest bisimulation, as a class id per state.

    Plain iterated splitting: start from equal readouts, refine by the classes
    of successors until the number of blocks stops growing.  Class ids are
    numbered by first occurrence, so the result is canonical.
    """
    classes = _renumber(c.readout)
    while True:
        sigs = [(classes[s], tuple(classes[t] for t in c.update[s])) for s in range(c.n_states)]
        refined = _renumber(sigs)
        if max(refined, default=-1) == max(classes, default=-1):
            return refined
        classes = refined


def _renumber(keys: Sequence) -> tuple[int, ...]:
    ids: dict = {}
    return tuple(ids.setdefault(k, len(ids)) for k in keys)


def bisimilar(c: Coalgebra, s: int, c2: Coalgebra, t: int) -> bool:
    """Whether state ``s`` of ``c`` and ``t`` of ``c2`` have the same infinite p-tree."""
    if c.interface != c2.interface:
        raise InterfaceMismatch("bisimilarity needs a shared interface")
    merged = disjoint_union(c, c2)
    classes = bisim_classes(merged)
    return classes[s] == classes[c.n_states + t]


def disjoint_union(c: Coalgebra, c2: Coalgebra) -> Coalgebra:
    n = c.n_states
    return Coalgebra(c.interface, c.readout + c2.readout,
                     c.update + tuple(tuple(t + n for t in row) for row in c2.update))


@dataclass(frozen=True)
class BehaviorGraph:
    """A graph over the interface with a projection ``pi`` from machine states to nodes.

    ``arrows[n][d]`` is the target of the arrow out of node ``n`` for direction ``d``.
    """

    interface: FinPoly
    positions: tuple[int, ...]
    arrows: tuple[tuple[int, ...], ...]
    pi: tuple[int, ...]
    machine: Coalgebra | None = field(default=None, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    def out_degrees(self) -> list[int]:
        return [len(a) for a in self.arrows]


def behavior_graph(c: Coalgebra, quotient: bool = True) -> BehaviorGraph:
    """Nodes are bisimulation classes (or the raw states when ``quotient`` is false)."""
    pi = bisim_classes(c) if quotient else tuple(range(c.n_states))
    n = max(pi, default=-1) + 1
    rep = {}
    for s, k in enumerate(pi):
        rep.setdefault(k, s)
    positions = tuple(c.readout[rep[k]] for k in range(n))
    arrows = tuple(tuple(pi[t] for t in c.update[rep[k]]) for k in range(n))
    g = BehaviorGraph(c.interface, positions, arrows, pi, c)
    assert check_opfib(g), "behavior graph construction broke the opfib property"
    return g


def check_opfib(g: BehaviorGraph) -> bool:
    """Every node has exactly ``|p[position]|`` outgoing arrows and ``pi`` respects transitions."""
    p = g.interface
    if len(g.arrows) != len(g.positions):
        return False
    for pos, out in zip(g.positions, g.arrows):
        if not 0 <= pos < len(p) or len(out) != p[pos]:
            return False
        if any(not 0 <= t < g.n_nodes for t in out):
            return False
    c = g.machine
    if c is None:
        return True
    if len(g.pi) != c.n_states:
        return False
    for s in range(c.n_states):
        k = g.pi[s]
        if not 0 <= k < g.n_nodes or g.positions[k] != c.readout[s]:
            return False
        if tuple(g.pi[t] for t in c.update[s]) != g.arrows[k]:
            return False
    return True


# --- propositions ------------------------------------------------------------


@dataclass(frozen=True)
class Proposition:
    """Allowed positions ``Q`` and, per ``(i, d)`` with ``i`` in ``Q``, allowed successor positions."""

    interface: FinPoly
    allowed: frozenset[int]
    successors: dict = field(hash=False)

    def __post_init__(self):
        p = self.interface
        allowed = frozenset(self.allowed)
        if any(not 0 <= i < len(p) for i in allowed):
            raise ValueError("Q must be a subset of the positions")
        table = {}
        for i in allowed:
            for d in range(p[i]):
                r = frozenset(self.successors.get((i, d), allowed))
                if not r <= allowed:
                    raise ValueError(f"R({i},{d}) must lie inside Q")
                table[(i, d)] = r
        extra = set(self.successors) - set(table)
        if extra:
            raise ValueError(f"R given outside Q x directions: {sorted(extra)}")
        object.__setattr__(self, "allowed", allowed)
        object.__setattr__(self, "successors", table)

    def allows(self, i: int, d: int, j: int) -> bool:
        return j in self.successors[(i, d)]

    def to_dict(self) -> dict:
        rows = {f"{i},{d}": sorted(r) for (i, d), r in sorted(self.successors.items())
                if r != self.allowed}
        return {"Q": sorted(self.allowed), "R": rows}

    @classmethod
    def from_dict(cls, data: dict, interface: FinPoly) -> Proposition:
        succ = {}
        for key, val in data.get("R", {}).items():
            i, d = (int(x) for x in key.split(","))
            succ[(i, d)] = frozenset(int(j) for j in val)
        return cls(interface, frozenset(int(i) for i in data["Q"]), succ)


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    path: tuple[int, ...] = ()
    directions: tuple[int, ...] = ()

    def __bool__(self):
        return self.holds


def check_proposition(c: Coalgebra, s: int, prop: Proposition) -> CheckResult:
    """Decide whether the behavior of ``s`` lies in the proposition.

    On failure, ``path`` is a BFS-shortest state path ending at the offending
    state, exploring lower direction indices first.
    """
    if prop.interface != c.interface:
        raise InterfaceMismatch("proposition and machine disagree on the interface")
    if c.readout[s] not in prop.allowed:
        return CheckResult(False, (s,))
    parent: dict[int, tuple[int, int] | None] = {s: None}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        i = c.readout[u]
        for d, t in enumerate(c.update[u]):
            if not prop.allows(i, d, c.readout[t]):
                states, dirs = _trace(parent, u)
                return CheckResult(False, states + (t,), dirs + (d,))
            if t not in parent:
                parent[t] = (u, d)
                queue.append(t)
    return CheckResult(True)


def _trace(parent: dict, u: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    states, dirs = [u], []
    while parent[u] is not None:
        u, d = parent[u]
        states.append(u)
        dirs.append(d)
    return tuple(reversed(states)), tuple(reversed(dirs))


def tree_satisfies(tree: PTree, prop: Proposition) -> bool:
    """Membership of a truncated tree in the proposition, checked down to its depth."""
    if tree.position not in prop.allowed:
        return False
    return all(prop.allows(tree.position, d, child.position) and tree_satisfies(child, prop)
               for d, child in enumerate(tree.children))


def check_closure(trees: Iterable[PTree]) -> bool:
    """Bounded closure test: each child of a member truncates some member."""
    trees = list(trees)
    depths = {t.depth for t in trees}
    if len(depths) > 1:
        raise ValueError(f"mixed depths {sorted(depths)}")
    if not trees or trees[0].depth == 0:
        return True
    d = trees[0].depth - 1
    truncs = {t.truncate(d) for t in trees}
    return all(child in truncs for t in trees for child in t.children)


def filter_trees(trees: Iterable[PTree], predicate: Callable[[PTree], bool]) -> list[PTree]:
    """Members of a user predicate over truncations; pair with ``check_closure``."""
    return [t for t in trees if predicate(t)]


# --- rendering ---------------------------------------------------------------


def render_tree(tree: PTree, p: FinPoly | None = None, indent: str = "  ") -> str:
    lines: list[str] = []

    def walk(t: PTree, level: int, edge: str):
        name = p.label(t.position) if p is not None else str(t.position)
        lines.append(f"{indent * level}{edge}{name}")
        for d, child in enumerate(t.children):
            walk(child, level + 1, f"[{d}] ")

    walk(tree, 0, "")
    return "\n".join(lines)


def tree_to_dot(tree: PTree, p: FinPoly | None = None) -> str:
    lines = ["digraph ptree {"]
    counter = [0]

    def walk(t: PTree) -> str:
        name = f"n{counter[0]}"
        counter[0] += 1
        label = p.label(t.position) if p is not None else str(t.position)
        lines.append(f'  {name} [label="{label}"];')
        for d, child in enumerate(t.children):
            lines.append(f'  {name} -> {walk(child)} [label="{d}"];')
        return name

    walk(tree)
    lines.append("}")
    return "\n".join(lines)


def graph_to_dot(g: BehaviorGraph) -> str:
    lines = ["digraph behavior {"]
    for k, pos in enumerate(g.positions):
        lines.append(f'  c{k} [label="{g.interface.label(pos)}"];')
    for k, out in enumerate(g.arrows):
        for d, t in enumerate(out):
            lines.append(f'  c{k} -> c{t} [label="{d}"];')
    lines.append("}")
    return "\n".join(lines)
