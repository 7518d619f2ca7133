"""Randomized law suites over small polynomials and machines.

Operations are looked up through their modules at call time so a test can
swap one out and watch the suite catch it.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from . import behavior as bh
from . import coalg as cg
from . import finpoly as fp
from .machines import random_coalgebra, random_poly


@dataclass
class LawFailure:
    law: str
    trial: int
    detail: str

    def __str__(self):
        return f"{self.law} (trial {self.trial}): {self.detail}"


def _compose_laws(rng: random.Random, trial: int) -> list[LawFailure]:
    p, q, r = (random_poly(rng, 2, 2) for _ in range(3))
    out = []
    y = fp.Y
    for name, lhs, rhs in (
        ("compose unit (left)", fp.compose_poly(y, p), p),
        ("compose unit (right)", fp.compose_poly(p, y), p),
        ("compose associativity", fp.compose_poly(p, fp.compose_poly(q, r)),
         fp.compose_poly(fp.compose_poly(p, q), r)),
    ):
        if not lhs.isomorphic(rhs):
            out.append(LawFailure(name, trial, f"p={p}, q={q}, r={r}: {lhs} vs {rhs}"))
    pq = fp.compose_poly(p, q)
    for n in range(4):
        if pq(n) != p(q(n)):
            out.append(LawFailure("compose is substitution", trial,
                                  f"p={p}, q={q}: |(p◁q)({n})|={pq(n)} but |p(q({n}))|={p(q(n))}"))
            break
    return out


def _tensor_laws(rng: random.Random, trial: int) -> list[LawFailure]:
    p, q, r = (random_poly(rng, 2, 2) for _ in range(3))
    out = []
    y = fp.Y
    for name, lhs, rhs in (
        ("tensor unit (left)", fp.tensor(y, p), p),
        ("tensor unit (right)", fp.tensor(p, y), p),
        ("tensor associativity", fp.tensor(p, fp.tensor(q, r)), fp.tensor(fp.tensor(p, q), r)),
        ("tensor symmetry", fp.tensor(p, q), fp.tensor(q, p)),
    ):
        if not lhs.isomorphic(rhs):
            out.append(LawFailure(name, trial, f"p={p}, q={q}, r={r}: {lhs} vs {rhs}"))
    return out


def _curry_laws(rng: random.Random, trial: int) -> list[LawFailure]:
    r, p, q = (random_poly(rng, 2, 1) for _ in range(3))
    rp = fp.tensor(r, p)
    h = fp.internal_hom(p, q)
    left, right = fp.hom_count(rp, q), fp.hom_count(r, h)
    if left != right:
        return [LawFailure("curry bijection", trial, f"r={r}, p={p}, q={q}: {left} != {right}")]
    for f in fp.iter_maps(rp, q):
        g = fp.curry(f, r, p)
        if fp.uncurry(g, p, q) != f:
            return [LawFailure("curry roundtrip", trial, f"r={r}, p={p}, q={q}: {f.to_dict()}")]
    return []


def _lax_laws(rng: random.Random, trial: int) -> list[LawFailure]:
    ps = [random_poly(rng, 2, 2, min_positions=1) for _ in range(3)]
    cs = [random_coalgebra(rng, p, rng.randint(1, 3)) for p in ps]
    c, d, e = cs
    out = []
    unit = cg.unit_coalgebra()
    depth = 4
    for name, lhs, rhs in (
        ("lax unit (left)", cg.tensor_coalg(unit, c), c),
        ("lax unit (right)", cg.tensor_coalg(c, unit), c),
        ("lax associativity", cg.tensor_coalg(cg.tensor_coalg(c, d), e),
         cg.tensor_coalg(c, cg.tensor_coalg(d, e))),
    ):
        if cg.iterate(lhs, depth) != cg.iterate(rhs, depth) or not bh.bisimilar(lhs, 0, rhs, 0):
            out.append(LawFailure(name, trial, f"interfaces {[str(p) for p in ps]}"))
    return out


SUITES: dict[str, Callable[[random.Random, int], list[LawFailure]]] = {
    "compose": _compose_laws,
    "tensor": _tensor_laws,
    "curry": _curry_laws,
    "lax": _lax_laws,
}


def run_laws(seed: int, trials: int, suites: list[str] | None = None) -> list[LawFailure]:
    failures: list[LawFailure] = []
    for name in suites or list(SUITES):
        # per-suite stream, so suites stay reproducible independently of each other
        rng = random.Random(f"{seed}:{name}")
        for t in range(trials):
            failures.extend(SUITES[name](rng, t))
    return failures
