"""Small reference machines used in docs, tests and the CLI."""
from __future__ import annotations

import random

from .coalg import Coalgebra, mk_moore
from .finpoly import FinPoly, FinSet, PolyMap, tensor_all
from .sysnet import Rewirer


def traffic_light() -> Coalgebra:
    """Three states on ``2y^2 + 1``.

    green may stay green or turn yellow; yellow may go back to green or turn
    red; red has no directions and so halts.
    """
    p = FinPoly((2, 2, 0), ("green", "yellow", "red"))
    return Coalgebra(p, (0, 1, 2), ((0, 1), (0, 2), ()), ("g", "y", "r"))


def mod2_counter() -> Coalgebra:
    """Reads out its state and adds the input modulo 2."""
    return mk_moore(2, 2, 2, lambda s: s, lambda s, a: (s + a) % 2)


def stop_chain(k: int) -> Coalgebra:
    """On ``y + 1`` (go, stop): ``k`` go-states in a row, then a stop state."""
    p = FinPoly((1, 0), ("go", "stop"))
    readout = tuple([0] * k + [1])
    update = tuple([(s + 1,) for s in range(k)] + [()])
    return Coalgebra(p, readout, update)


def loop_on_y(n: int) -> Coalgebra:
    """``n`` states on ``y`` cycling ``s -> s + 1 mod n``."""
    return Coalgebra(FinPoly((1,)), (0,) * n, tuple(((s + 1) % n,) for s in range(n)))


def plant_xor() -> Coalgebra:
    """Plant on ``2y^4``: reads out ``s``; on ``(a, b)`` moves to ``s + a + b mod 2``."""
    return mk_moore(2, 4, 2, lambda s: s, lambda s, ab: (s + ab // 2 + ab % 2) % 2)


def controller_not() -> Coalgebra:
    """Controller on ``2y^2``: reads out ``t``; on plant output ``c`` moves to ``1 - c``."""
    return mk_moore(2, 2, 2, lambda t: t, lambda t, c: 1 - c)


def random_poly(rng: random.Random, max_positions: int = 3, max_directions: int = 2,
                min_positions: int = 0) -> FinPoly:
    n = rng.randint(min_positions, max_positions)
    return FinPoly(tuple(rng.randint(0, max_directions) for _ in range(n)))


def random_coalgebra(rng: random.Random, p: FinPoly, n_states: int) -> Coalgebra:
    if len(p) == 0:
        raise ValueError("no coalgebra with states exists on the zero polynomial")
    readout = tuple(rng.randrange(len(p)) for _ in range(n_states))
    update = tuple(tuple(rng.randrange(n_states) for _ in range(p[i])) for i in readout)
    return Coalgebra(p, readout, update)


def labeled(c: Coalgebra, names: list[str]) -> Coalgebra:
    return Coalgebra(c.interface, c.readout, c.update, tuple(FinSet(c.n_states, names).labels))


def random_map(rng: random.Random, p: FinPoly, q: FinPoly) -> PolyMap | None:
    """A uniformly chosen forward map with random backward tables, or None if no map exists."""
    fwd = []
    for i in range(len(p)):
        # a position with no directions can only go where the target has none
        options = [j for j in range(len(q)) if p[i] > 0 or q[j] == 0]
        if not options:
            return None
        fwd.append(rng.choice(options))
    bwd = tuple(tuple(rng.randrange(p[i]) for _ in range(q[j])) for i, j in enumerate(fwd))
    return PolyMap(p, q, tuple(fwd), bwd)


def random_rewirer(rng: random.Random, inner: list[FinPoly], outer: FinPoly,
                   n_states: int) -> Rewirer | None:
    """Random readout maps and updates, or None when no map ``⊗ inner -> outer`` exists."""
    src = tensor_all(inner)
    readout = []
    for _ in range(n_states):
        phi = random_map(rng, src, outer)
        if phi is None:
            return None
        readout.append(phi)
    update = tuple(
        tuple(tuple(rng.randrange(n_states) for _ in range(outer[j])) for j in phi.fwd)
        for phi in readout)
    return Rewirer(tuple(inner), outer, tuple(readout), update)
