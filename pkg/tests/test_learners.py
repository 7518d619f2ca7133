import itertools
import json
import random

import pytest

from polysys.behavior import bisimilar, unfold
from polysys.coalg import check_coalg_morphism, restrict, tensor_coalg
from polysys.finpoly import (
    InterfaceMismatch,
    hom_set,
    identity_map,
    ihom_tensor,
    monomial,
)
from polysys.learners import (
    FinLearner,
    check_2morphism,
    compose_parallel,
    compose_serial,
    from_coalg,
    identity_learner,
    random_learner,
    to_coalg,
)
from polysys.sysnet import coalgebra_as_rewirer, compose_sys, compose_via_ihom, rewirer_as_coalgebra


def lens(n: int):
    return monomial(n, n)


def rewirer_of(L: FinLearner):
    return coalgebra_as_rewirer(to_coalg(L), [lens(L.a)], lens(L.b))


def same_behavior(c, d, depth=4):
    return all(unfold(c, s, depth) == unfold(d, s, depth) for s in range(c.n_states)) and all(
        bisimilar(c, s, d, s) for s in range(c.n_states))


# --- coalgebra view ------------------------------------------------------------------


def test_interface_size():
    L = random_learner(random.Random(0), 2, 2, 2)
    assert len(to_coalg(L).interface) == 2**2 * 2 ** (2 * 2) == 64
    assert set(to_coalg(L).interface.directions) == {4}


@pytest.mark.parametrize("seed", range(10))
def test_roundtrip(seed):
    L = random_learner(random.Random(seed), 2, 2, 2)
    assert from_coalg(to_coalg(L), 2, 2) == L


def test_roundtrip_other_shapes():
    rng = random.Random(1)
    for a, b, p in [(1, 2, 3), (2, 1, 2), (3, 1, 1), (1, 3, 2)]:
        L = random_learner(rng, a, b, p)
        assert from_coalg(to_coalg(L), a, b) == L
        assert FinLearner.from_dict(json.loads(json.dumps(L.to_dict()))) == L


def test_from_coalg_mismatch():
    with pytest.raises(InterfaceMismatch):
        from_coalg(to_coalg(identity_learner(2)), 1, 1)


def test_validation():
    with pytest.raises(InterfaceMismatch):
        FinLearner(1, 1, 1, ((1,),), (((0,),),), (((0,),),))
    with pytest.raises(InterfaceMismatch):
        FinLearner(1, 1, 1, ((0,),), (((1,),),), (((0,),),))


def test_identity_learner():
    L = identity_learner(2)
    assert L.implement == ((0,), (1,))
    assert all(L.R(a, b, 0) == b for a in range(2) for b in range(2))
    c = to_coalg(L)
    assert c.n_states == 1
    hs = hom_set(lens(2), lens(2))
    assert hs.maps[c.readout[0]] == identity_map(lens(2))


# --- serial composition ------------------------------------------------------------


def test_serial_of_identities():
    assert compose_serial(identity_learner(2), identity_learner(2)) == identity_learner(2)


@pytest.mark.parametrize("seed", range(8))
def test_serial_matches_ihom_composition(seed):
    rng = random.Random(seed)
    L, M = random_learner(rng, 2, 2, 2), random_learner(rng, 2, 2, 2)
    expected = compose_via_ihom(to_coalg(L), to_coalg(M), lens(2), lens(2), lens(2))
    got = to_coalg(compose_serial(L, M))
    assert same_behavior(got, expected)
    assert got == expected


@pytest.mark.parametrize("seed", range(5))
def test_serial_matches_operad_composition(seed):
    rng = random.Random(100 + seed)
    L, M = random_learner(rng, 2, 1, 2), random_learner(rng, 1, 2, 3)
    composite = compose_sys(rewirer_of(M), [rewirer_of(L)])
    got = to_coalg(compose_serial(L, M))
    assert same_behavior(got, rewirer_as_coalgebra(composite))


def test_serial_mismatch():
    with pytest.raises(InterfaceMismatch):
        compose_serial(identity_learner(2), identity_learner(3))


def test_serial_associative():
    rng = random.Random(9)
    for _ in range(10):
        L, M, N = (random_learner(rng, 2, 2, 2) for _ in range(3))
        # ((p, q), r) and (p, (q, r)) flatten to the same row-major index
        assert compose_serial(compose_serial(L, M), N) == compose_serial(L, compose_serial(M, N))


def test_serial_unit_via_projection():
    rng = random.Random(2)
    for _ in range(10):
        L = random_learner(rng, 2, 2, 3)
        left = compose_serial(identity_learner(2), L)
        right = compose_serial(L, identity_learner(2))
        proj = list(range(L.p))
        for u in (left, right):
            assert check_2morphism(u, L, proj) and check_2morphism(L, u, proj)


# --- parallel composition ------------------------------------------------------------


def test_parallel_identities_and_sizes():
    assert compose_parallel(identity_learner(2), identity_learner(3)) == identity_learner(6)
    rng = random.Random(3)
    assert compose_parallel(random_learner(rng, 1, 1, 2), random_learner(rng, 1, 1, 3)).p == 6


@pytest.mark.parametrize("seed", range(6))
def test_parallel_matches_ihom_tensor(seed):
    rng = random.Random(seed)
    L, L2 = random_learner(rng, 2, 1, 2), random_learner(rng, 1, 2, 2)
    phi = ihom_tensor(lens(2), lens(1), lens(1), lens(2))
    expected = restrict(tensor_coalg(to_coalg(L), to_coalg(L2)), phi)
    got = to_coalg(compose_parallel(L, L2))
    assert same_behavior(got, expected)


def test_interchange():
    rng = random.Random(4)
    for _ in range(10):
        L1, M1 = random_learner(rng, 2, 2, 2), random_learner(rng, 2, 2, 2)
        L2, M2 = random_learner(rng, 2, 2, 2), random_learner(rng, 2, 2, 2)
        left = compose_parallel(compose_serial(L1, M1), compose_serial(L2, M2))
        right = compose_serial(compose_parallel(L1, L2), compose_parallel(M1, M2))
        # left parameters ((p1, q1), (p2, q2)); right ((p1, p2), (q1, q2))
        f = [((p1 * 2 + q1) * 2 + p2) * 2 + q2 for p1, p2, q1, q2 in itertools.product(range(2), repeat=4)]
        g = [0] * 16
        for k, v in enumerate(f):
            g[v] = k
        assert check_2morphism(left, right, g) and check_2morphism(right, left, f)


# --- 2-morphisms ------------------------------------------------------------------------


def test_identity_2morphism():
    L = random_learner(random.Random(5), 2, 2, 3)
    assert check_2morphism(L, L, [0, 1, 2])


def test_broken_implement_square():
    rng = random.Random(6)
    L = random_learner(rng, 2, 2, 2)
    impl = [list(r) for r in L.implement]
    impl[0][0] = 1 - impl[0][0]
    L2 = FinLearner(2, 2, 2, impl, L.update, L.request)
    assert not check_2morphism(L, L2, [0, 1])


def test_2morphisms_match_coalgebra_morphisms():
    rng = random.Random(7)
    for _ in range(30):
        a, b = rng.randint(1, 2), rng.randint(1, 2)
        L = random_learner(rng, a, b, rng.randint(1, 2))
        L2 = random_learner(rng, a, b, rng.randint(1, 2))
        for f in itertools.product(range(L2.p), repeat=L.p):
            assert check_2morphism(L, L2, f) == check_coalg_morphism(to_coalg(L), to_coalg(L2), f)
    # with duplicated parameters some squares commute
    L = random_learner(rng, 2, 2, 1)
    L2 = compose_parallel(L, identity_learner(1))
    assert check_2morphism(L, L2, [0])


def test_2morphism_errors():
    with pytest.raises(InterfaceMismatch):
        check_2morphism(identity_learner(2), identity_learner(3), [0])
    with pytest.raises(InterfaceMismatch):
        check_2morphism(identity_learner(2), identity_learner(2), [1])
