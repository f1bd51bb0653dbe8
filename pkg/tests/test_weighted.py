import itertools
import random

import pytest

from spinscape.branching import enumerate_decorations
from spinscape.moves import circuit_move, descriptor_for, find_circuits
from spinscape.obstruction import spin_equal
from spinscape.weighted import (
    DECORATIONS,
    RELATIONS,
    WEIGHTED_MOVE_DECORATIONS,
    canonical_decoration,
    derive_decorations,
    fuse_graph,
    generating_moves,
    orders_of_index,
    pi_minus_check,
    position_map,
    relation_report,
    words_agree,
)

from conftest import FIXTURE_NAMES, load


def circuit_cases(limit=2):
    cases = []
    for name in ("figure_eight",):
        tri = load(name)
        for wb in itertools.islice(enumerate_decorations(tri), limit):
            d = descriptor_for(tri, wb)
            for arc in ("over", "under"):
                for c in find_circuits(d, arc):
                    cases.append((d, [(c, arc)], circuit_move(d, c, arc).after))
    return cases


def test_relation_list_is_complete():
    assert len(RELATIONS) == 10
    assert {index for _, index, _, _ in RELATIONS} == {-1, 1}


@pytest.mark.parametrize("name", [r[0] for r in RELATIONS])
def test_each_relation_holds(name):
    assert relation_report()[name]


def test_pi_minus_presentation():
    report = pi_minus_check(random.Random(3))
    assert report["alpha^2"] and report["beta^3"] and report["(alpha.beta)^3"]
    assert report["alpha.beta = II.Mbar"]
    assert report["closure_size"] == 12
    assert all(s["agree"] for s in report["well_defined"])
    assert len(report["well_defined"]) == 12


def test_closure_acts_as_even_permutations():
    from spinscape.triangulation import perm_sign

    report = pi_minus_check()
    assert all(perm_sign(s["element"]) == 1 for s in report["well_defined"])


def test_word_is_not_identity_when_order_moves():
    assert position_map(("M",)) != (0, 1, 2, 3)
    assert not words_agree(-1, ("M",), ())


def test_breaking_a_decoration_breaks_a_relation():
    broken = dict(DECORATIONS)
    m = dict(broken["M"])
    m[2] = 2
    broken["M"] = m
    assert not all(relation_report(broken).values())


def test_orders_of_index_split_evenly():
    assert len(orders_of_index(-1)) == len(orders_of_index(1)) == 12


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fused_generating_moves_realize_circuits(name):
    tri = load(name)
    for wb in itertools.islice(enumerate_decorations(tri), 20):
        d = descriptor_for(tri, wb)
        for arc in ("over", "under"):
            for c in find_circuits(d, arc):
                expected = circuit_move(d, c, arc).after
                got = fuse_graph(d, generating_moves(d, [(c, arc)]), DECORATIONS)
                assert got.wb == expected.wb
                assert spin_equal(got, expected)


def test_derivation_finds_frozen_table_and_its_mirror():
    found = derive_decorations(circuit_cases())
    assert len(found) == 2
    keys = [tuple(canonical_decoration(t[k]) for k in ("M", "Mbar", "N", "Nbar")) for t in found]
    frozen = tuple(canonical_decoration(WEIGHTED_MOVE_DECORATIONS[k]) for k in ("M", "Mbar", "N", "Nbar"))
    assert frozen in keys
