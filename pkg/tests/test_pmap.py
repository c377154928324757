import random

import pytest

from _support import (oracle_copy, oracle_extend, oracle_update, probes_for,
                      rand_cell, rand_chain, rand_index, rand_tensor,
                      shift_shape_rho, var)
from vecloop.errors import EmptyIndexLost
from vecloop.indices import EMPTY, AChain, Index, ROOT_CHAIN, in_down, in_up
from vecloop.pmap import PMap, cell_eq_on, tensor_add, tensor_sum, zeros
from vecloop.state import SparseState

RV = [Index((("rv", k),)) for k in range(3)]
X = var("x")


def fig4_cell():
    return PMap({EMPTY: 1, RV[1]: 3, RV[2]: 4})


def test_extend_examples():
    cell = fig4_cell()
    assert cell.extend_eval(RV[0]) == 1
    assert PMap({EMPTY: 6}).extend_eval(RV[2]) == 6
    assert PMap({Index((("a", 0),)): 5}).extend_eval(EMPTY) is None


def test_update_fixture_scalar_overwrite():
    updated = fig4_cell().updated(PMap({EMPTY: 6}))
    assert updated.entries == {EMPTY: 6}


def test_update_fixture_partial_overwrite():
    updated = fig4_cell().updated(PMap({RV[0]: 8, RV[2]: 9}))
    assert updated.entries == {EMPTY: 1, RV[0]: 8, RV[1]: 3, RV[2]: 9}


def test_update_empty_tensor_is_identity():
    state = SparseState({X: fig4_cell()})
    assert state.updated(X, {}) is state


def test_copy_fixture_shift_shape():
    rho = {EMPTY: RV[0], RV[0]: RV[1], RV[1]: RV[2]}
    copied = fig4_cell().copied(rho)
    assert copied.entries == {EMPTY: 1, RV[0]: 1, RV[2]: 3}


def test_copy_fixture_collapse():
    copied = fig4_cell().copied({RV[2]: EMPTY})
    assert copied.entries == {EMPTY: 4}


def test_copy_empty_rho_is_identity():
    state = SparseState({X: fig4_cell()})
    assert state.copied({}) is state


def test_copy_preserves_root_totality():
    # exit-style relocation whose source has no stored entry
    cell = PMap({EMPTY: 7.5})
    copied = cell.copied({Index((("a", 2),)): EMPTY})
    assert copied.extend_eval(EMPTY) == 7.5


def test_update_guards_malformed_cell():
    rootless = SparseState({X: PMap({RV[0]: 1.0})})
    with pytest.raises(EmptyIndexLost):
        rootless.updated(X, {RV[1]: 2.0})


def test_tensor_add_examples():
    assert tensor_add(PMap({EMPTY: 1.5}), PMap({EMPTY: 2.0})).entries == {EMPTY: 3.5}
    disjoint = tensor_add(PMap({RV[0]: 1.0}), PMap({RV[1]: 2.0}))
    assert disjoint.entries == {RV[0]: 1.0, RV[1]: 2.0}
    tensor = PMap({RV[0]: 4.25, RV[1]: -1.0})
    assert tensor_add(tensor, zeros(tensor.domain())) == tensor


def test_zeros():
    assert zeros(ROOT_CHAIN).entries == {EMPTY: 0.0}
    assert zeros(AChain([])).entries == {}
    assert zeros([RV[0], RV[1]]).entries == {RV[0]: 0.0, RV[1]: 0.0}
    assert tensor_sum(PMap({RV[0]: 1.0, RV[1]: 2.5})) == 3.5


def test_tensor_add_commutes_and_associates():
    # dyadic values keep float addition exact, so the laws hold bitwise
    rng = random.Random(1)

    def dyadic_tensor(chain):
        return PMap({i: rng.randint(-256, 256) / 64.0 for i in chain})

    for _ in range(200):
        chains = [rand_chain(rng) for _ in range(3)]
        a, b, c = (dyadic_tensor(ch) for ch in chains)
        assert tensor_add(a, b) == tensor_add(b, a)
        assert tensor_add(tensor_add(a, b), c) == tensor_add(a, tensor_add(b, c))


def test_state_eq_on():
    state = SparseState({X: fig4_cell()})
    probes = [EMPTY] + RV
    assert state.eq_on(state, probes)
    bumped = state.updated(X, {RV[0]: 99})
    assert state.eq_on(bumped, [RV[1]])
    assert not state.eq_on(bumped, [RV[0]])


def test_canonical_drops_induced_entries():
    a = Index((("a", 0),))
    ab = Index((("a", 0), ("b", 0)))
    assert PMap({EMPTY: 1, a: 1, ab: 1}).canonical().entries == {EMPTY: 1}
    kept = PMap({EMPTY: 1, a: 2, ab: 2}).canonical()
    assert kept.entries == {EMPTY: 1, a: 2}


def test_canonical_is_representation_independent():
    rng = random.Random(2)
    for _ in range(200):
        cell = rand_cell(rng)
        # pad with entries the represented function already induces
        padded = dict(cell.entries)
        for _ in range(3):
            i = rand_index(rng)
            value = cell.extend_eval(i)
            if value is not None:
                padded[i] = value
        assert PMap(padded).canonical() == cell.canonical()
        assert cell.same_function(PMap(padded))


def test_update_matches_composite_of_extends():
    # the update equation, checked against brute-force oracles
    rng = random.Random(3)
    for _ in range(300):
        cell = rand_cell(rng)
        tensor = rand_tensor(rng, rand_chain(rng))
        updated = cell.updated(tensor)
        for probe in probes_for(rng, cell, tensor, extra=16):
            assert updated.extend_eval(probe) == \
                oracle_update(cell.entries, tensor.entries, probe)


def test_copy_matches_composite_of_extends():
    rng = random.Random(4)
    for _ in range(300):
        cell = rand_cell(rng)
        rho = shift_shape_rho(rng)
        copied = cell.copied(rho)
        for probe in probes_for(rng, cell, extra=16):
            assert copied.extend_eval(probe) == \
                oracle_copy(cell.entries, rho, probe)


def test_update_only_touches_covered_region():
    # writes are invisible outside the written region's upward closure
    rng = random.Random(5)
    for _ in range(300):
        cell = rand_cell(rng)
        tensor = rand_tensor(rng, rand_chain(rng))
        updated = cell.updated(tensor)
        outside = [p for p in probes_for(rng, cell, extra=32)
                   if not in_up(p, tensor.domain())]
        assert cell_eq_on(cell, updated, outside)


def test_update_keeps_cell_domains_under_closure():
    rng = random.Random(6)
    for _ in range(200):
        chain = rand_chain(rng)
        cell = PMap({EMPTY: 0.0})
        tensor = rand_tensor(rng, chain)
        updated = cell.updated(tensor)
        assert all(in_down(i, chain) for i in updated.domain())


def test_extend_against_bruteforce():
    rng = random.Random(7)
    for _ in range(300):
        cell = rand_cell(rng)
        for probe in probes_for(rng, cell, extra=8):
            assert cell.extend_eval(probe) == oracle_extend(cell.entries, probe)
