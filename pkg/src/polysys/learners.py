"""Finite learners ``(P, I, U, R)`` and their identification with ``[Ay^A, By^B]``-coalgebras.

Tables are indexed ``I[a][p]``, ``U[a][b][p]`` and ``R[a][b][p]``.  Product
sets are flattened row-major: the composite parameter ``(p, q)`` is
``p * |Q| + q`` and the pair ``(a, a')`` is ``a * |A'| + a'``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .coalg import Coalgebra
from .finpoly import (
    DEFAULT_SIZE_GUARD,
    FinPoly,
    InterfaceMismatch,
    hom_set,
    monomial,
)


@dataclass(frozen=True)
class FinLearner:
    a: int
    b: int
    p: int
    implement: tuple[tuple[int, ...], ...]
    update: tuple[tuple[tuple[int, ...], ...], ...]
    request: tuple[tuple[tuple[int, ...], ...], ...]

    def __post_init__(self):
        impl = tuple(tuple(int(x) for x in row) for row in self.implement)
        upd = tuple(tuple(tuple(int(x) for x in r) for r in m) for m in self.update)
        req = tuple(tuple(tuple(int(x) for x in r) for r in m) for m in self.request)
        object.__setattr__(self, "implement", impl)
        object.__setattr__(self, "update", upd)
        object.__setattr__(self, "request", req)
        a, b, p = self.a, self.b, self.p
        if len(impl) != a or any(len(r) != p or any(not 0 <= x < b for x in r) for r in impl):
            raise InterfaceMismatch("implement must be an A x P table with values in B")
        for name, table, bound in (("update", upd, p), ("request", req, a)):
            if len(table) != a or any(len(m) != b for m in table):
                raise InterfaceMismatch(f"{name} must be an A x B x P table")
            if any(len(r) != p or any(not 0 <= x < bound for x in r) for m in table for r in m):
                raise InterfaceMismatch(f"{name} has entries of the wrong shape or range")

    @classmethod
    def from_functions(cls, a: int, b: int, p: int,
                       implement: Callable[[int, int], int],
                       update: Callable[[int, int, int], int],
                       request: Callable[[int, int, int], int]) -> FinLearner:
        return cls(
            a, b, p,
            tuple(tuple(implement(x, w) for w in range(p)) for x in range(a)),
            tuple(tuple(tuple(update(x, y, w) for w in range(p)) for y in range(b)) for x in range(a)),
            tuple(tuple(tuple(request(x, y, w) for w in range(p)) for y in range(b)) for x in range(a)),
        )

    def I(self, x: int, w: int) -> int:  # noqa: E743
        return self.implement[x][w]

    def U(self, x: int, y: int, w: int) -> int:
        return self.update[x][y][w]

    def R(self, x: int, y: int, w: int) -> int:
        return self.request[x][y][w]

    @property
    def interface(self) -> FinPoly:
        """``[A y^A, B y^B]``, the interface of the corresponding coalgebra."""
        return hom_set(monomial(self.a, self.a), monomial(self.b, self.b)).poly

    def to_dict(self) -> dict:
        return {
            "A": self.a, "B": self.b, "P": self.p,
            "I": [list(r) for r in self.implement],
            "U": [[list(r) for r in m] for m in self.update],
            "R": [[list(r) for r in m] for m in self.request],
        }

    @classmethod
    def from_dict(cls, data: dict) -> FinLearner:
        return cls(int(data["A"]), int(data["B"]), int(data["P"]), data["I"], data["U"], data["R"])


def random_learner(rng: random.Random, a: int, b: int, p: int) -> FinLearner:
    return FinLearner.from_functions(
        a, b, p,
        lambda x, w: rng.randrange(b),
        lambda x, y, w: rng.randrange(p),
        lambda x, y, w: rng.randrange(a),
    )


def identity_learner(a: int) -> FinLearner:
    return FinLearner.from_functions(a, a, 1, lambda x, w: x, lambda x, y, w: 0, lambda x, y, w: y)


def to_coalg(L: FinLearner, limit: int = DEFAULT_SIZE_GUARD) -> Coalgebra:
    """The learner as a coalgebra with state set ``P`` on ``[A y^A, B y^B]``.

    State ``w`` reads out the lens ``(I(-, w), R(-, -, w))``; the direction
    ``(x, y)`` of that position is ``x * B + y`` and leads to ``U(x, y, w)``.
    """
    hs = hom_set(monomial(L.a, L.a), monomial(L.b, L.b), limit)
    readout = []
    update = []
    for w in range(L.p):
        fwd = tuple(L.implement[x][w] for x in range(L.a))
        bwd = tuple(tuple(L.request[x][y][w] for y in range(L.b)) for x in range(L.a))
        readout.append(hs.index_of(fwd, bwd))
        update.append(tuple(L.update[x][y][w] for x in range(L.a) for y in range(L.b)))
    return Coalgebra(hs.poly, tuple(readout), tuple(update))


def from_coalg(c: Coalgebra, a: int, b: int, limit: int = DEFAULT_SIZE_GUARD) -> FinLearner:
    hs = hom_set(monomial(a, a), monomial(b, b), limit)
    if c.interface != hs.poly:
        raise InterfaceMismatch("coalgebra is not on [A y^A, B y^B]")
    lenses = [hs.maps[k] for k in c.readout]
    n = c.n_states
    return FinLearner(
        a, b, n,
        tuple(tuple(lenses[w].fwd[x] for w in range(n)) for x in range(a)),
        tuple(tuple(tuple(c.update[w][x * b + y] for w in range(n)) for y in range(b))
              for x in range(a)),
        tuple(tuple(tuple(lenses[w].bwd[x][y] for w in range(n)) for y in range(b))
              for x in range(a)),
    )


def compose_serial(L: FinLearner, M: FinLearner) -> FinLearner:
    """``L ; M``.  With ``y = I_L(x, p)`` and ``y' = R_M(y, z, q)``, ``L`` trains on ``(x, y')``."""
    if L.b != M.a:
        raise InterfaceMismatch(f"codomain {L.b} does not match domain {M.a}")
    nq = M.p

    def implement(x, w):
        p, q = divmod(w, nq)
        return M.I(L.I(x, p), q)

    def update(x, z, w):
        p, q = divmod(w, nq)
        y = L.I(x, p)
        y2 = M.R(y, z, q)
        return L.U(x, y2, p) * nq + M.U(y, z, q)

    def request(x, z, w):
        p, q = divmod(w, nq)
        y = L.I(x, p)
        return L.R(x, M.R(y, z, q), p)

    return FinLearner.from_functions(L.a, M.b, L.p * M.p, implement, update, request)


def compose_parallel(L: FinLearner, L2: FinLearner) -> FinLearner:
    """``L ⊗ L2`` on ``A x A' -> B x B'`` with parameters ``P x P'``."""
    n2, a2, b2 = L2.p, L2.a, L2.b

    def implement(x, w):
        (x1, x2), (p1, p2) = divmod(x, a2), divmod(w, n2)
        return L.I(x1, p1) * b2 + L2.I(x2, p2)

    def update(x, y, w):
        (x1, x2), (y1, y2), (p1, p2) = divmod(x, a2), divmod(y, b2), divmod(w, n2)
        return L.U(x1, y1, p1) * n2 + L2.U(x2, y2, p2)

    def request(x, y, w):
        (x1, x2), (y1, y2), (p1, p2) = divmod(x, a2), divmod(y, b2), divmod(w, n2)
        return L.R(x1, y1, p1) * a2 + L2.R(x2, y2, p2)

    return FinLearner.from_functions(L.a * a2, L.b * b2, L.p * n2, implement, update, request)


def check_2morphism(L: FinLearner, L2: FinLearner, f: Sequence[int]) -> bool:
    """Whether ``f: P -> P'`` commutes with implement and with (request, update)."""
    if (L.a, L.b) != (L2.a, L2.b):
        raise InterfaceMismatch("2-morphisms need learners with the same domain and codomain")
    if len(f) != L.p or any(not 0 <= t < L2.p for t in f):
        raise InterfaceMismatch("f must map P into P'")
    for w in range(L.p):
        t = f[w]
        for x in range(L.a):
            if L2.I(x, t) != L.I(x, w):
                return False
            for y in range(L.b):
                if L2.R(x, y, t) != L.R(x, y, w) or L2.U(x, y, t) != f[L.U(x, y, w)]:
                    return False
    return True
