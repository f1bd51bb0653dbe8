import itertools
import random

import pytest

from spinscape import algebra as alg
from spinscape.branching import EMPTY, MINUS, PLUS, WeakBranching, classify_edge_type, enumerate_decorations, global_branching_exists, induced_pre_branching
from spinscape.calculus import (
    FusionError,
    OrderDependence,
    Subedge,
    admissible_chain,
    closed_form_weight,
    concatenation,
    edge_data,
    even_piece,
    fuse_A,
    fuse_N,
    fuse_all_weighted,
    fuse_in_order,
    fuse_unweighted,
    fuse_weighted,
    graph_of,
    non_associativity_witness,
    odd_piece,
    parse_graph,
    parse_piece,
    random_order,
)
from spinscape.obstruction import solve_spin

from conftest import load

HALVES = (alg.HALF, alg.MINUS_HALF)
UNITS = (0, alg.ONE)


def test_graph_of_globally_branched_is_all_empty():
    tri = load("figure_eight")
    witness = global_branching_exists(tri).witness
    g = graph_of(tri, WeakBranching(induced_pre_branching(tri, witness), witness))
    assert {e.color for e in g.edges} == {EMPTY}


def test_graph_colours_match_classification(fixture_tri):
    _, tri = fixture_tri
    for wb in itertools.islice(enumerate_decorations(tri), 10):
        g = graph_of(tri, wb)
        assert [e.color for e in g.edges] == [classify_edge_type(tri, wb.omega, wb.branchings, e) for e in range(len(tri.pairings))]
        assert [(tail, head) for tail, head, _ in edge_data(g)] == [
            (wb.omega.tail(tri, e), wb.omega.head(tri, e)) for e in range(len(tri.pairings))
        ]


def test_graph_weights_from_beta(fixture_tri):
    _, tri = fixture_tri
    wb = next(enumerate_decorations(tri))
    from spinscape.moves import zero_beta

    assert set(graph_of(tri, wb, zero_beta(tri)).weights()) <= {0}
    for rep in solve_spin(tri, wb).representatives:
        g = graph_of(tri, wb, rep.beta)
        assert [w // alg.ONE for w in g.weights()] == [rep.beta[e] for e in range(len(tri.pairings))]


def test_graph_text_round_trip(fixture_tri):
    _, tri = fixture_tri
    wb = next(enumerate_decorations(tri))
    g = graph_of(tri, wb, solve_spin(tri, wb).particular.beta)
    again = parse_graph(g.to_text())
    assert edge_data(again) == edge_data(g) and again.weights() == g.weights()
    assert [v.index for v in again.vertices] == [v.index for v in g.vertices]


def test_fuse_n_colours_and_weights():
    assert fuse_N([(PLUS, 0), (MINUS, 0)]) == (EMPTY, 0)
    assert fuse_N([(PLUS, 0), (PLUS, 0)]) == (MINUS, 0)
    assert fuse_N([(EMPTY, 1), (EMPTY, 1)]) == (EMPTY, 0)
    assert fuse_N([(MINUS, 1), (MINUS, 0)]) == (PLUS, 1)


def test_even_pieces_close_in_even_subgroup():
    for a, b in itertools.product(alg.S3_EVEN, repeat=2):
        assert fuse_A([Subedge("r", "r", a), Subedge("r", "r", b)]).matching in alg.S3_EVEN


def test_odd_triple_identity_exhaustive():
    for t1, t2, t3 in itertools.product(alg.S3_ODD, repeat=3):
        left = alg.compose(alg.inverse(alg.compose(t2, t1)), t3)
        right = alg.compose(alg.inverse(alg.compose(t2, t3)), t1)
        assert left == right


def test_unweighted_fusion_is_associative():
    shapes = ("rRl", "lLr", "rLl", "lRr")
    for t1, t2, t3 in itertools.product(alg.S3_ODD, repeat=3):
        for s1, s2, s3 in itertools.product(shapes, repeat=3):
            x, y, z = odd_piece(s1, t1, 1), odd_piece(s2, t2, 1), odd_piece(s3, t3, 1)
            if x.right != y.left or y.right != z.left:
                continue
            left = fuse_unweighted(fuse_unweighted(x, y), z)
            right = fuse_unweighted(x, fuse_unweighted(y, z))
            # the internal decoration is not order free; that is what the weights repair
            assert (left.left, left.right, left.matching) == (right.left, right.right, right.matching)


def test_random_five_segment_unweighted_orders():
    rng = random.Random(4)
    for _ in range(50):
        chain, _ = admissible_chain(rng, 5)
        chain = [Subedge(p.left, p.right, p.matching, 0 if p.is_even else 1, p.internal) for p in chain]
        results = set()
        for _ in range(5):
            pieces = list(chain)
            for i in random_order(len(pieces), rng):
                pieces[i : i + 2] = [fuse_unweighted(pieces[i], pieces[i + 1])]
            results.add((pieces[0].left, pieces[0].right, pieces[0].matching))
        assert len(results) == 1


def test_weighted_rules():
    t = alg.SWAP_01
    for u1, u2 in itertools.product(UNITS, repeat=2):
        assert fuse_weighted(even_piece("r", weight=u1), even_piece("r", weight=u2)).weight == (u1 + u2) % 4
    for u, a in itertools.product(UNITS, HALVES):
        assert fuse_weighted(even_piece("r", weight=u), odd_piece("rRl", t, a)).weight == (u + a) % 4
        assert fuse_weighted(odd_piece("lRr", t, a), even_piece("r", weight=u)).weight == (a + u) % 4
    for a1, a2 in itertools.product(HALVES, repeat=2):
        assert fuse_weighted(odd_piece("lLr", t, a1), odd_piece("rLl", t, a2)) == Subedge("l", "l", alg.IDENTITY, a1 + a2)
        assert fuse_weighted(odd_piece("rRl", t, a1), odd_piece("lRr", t, a2)) == Subedge("r", "r", alg.IDENTITY, a1 + a2)
        assert fuse_weighted(odd_piece("lLr", t, a1), odd_piece("rRl", t, a2)) == Subedge("l", "l", alg.IDENTITY, a1 - a2)


def test_excluded_adjacency_raises():
    with pytest.raises(FusionError):
        fuse_weighted(odd_piece("rLl", alg.SWAP_01, 1), odd_piece("lLr", alg.SWAP_01, 1))
    with pytest.raises(FusionError):
        fuse_weighted(even_piece("r"), even_piece("l"))


def test_pattern_one_closed_form():
    for a, b, c, d in itertools.product(HALVES, repeat=4):
        chain = concatenation(1, [a], [b], [c], [d])
        assert fuse_all_weighted(chain).weight == closed_form_weight([a], [b], [c], [d]) == (a - b + c - d) % 4


def test_pattern_two_with_only_outer_pieces():
    for b0, d0 in itertools.product(HALVES, repeat=2):
        chain = concatenation(2, [], [b0], [], [d0])
        assert fuse_all_weighted(chain).weight == (-b0 - d0) % 4 == (b0 + d0) % 4


@pytest.mark.parametrize("pattern", [1, 2, 3, 4])
def test_concatenation_patterns_all_orders(pattern):
    rng = random.Random(pattern)
    outer = pattern in (2, 4)
    for _ in range(40):
        k, h = rng.randint(0, 3), rng.randint(0, 3)
        a = [rng.choice(HALVES) for _ in range(k)]
        b = [rng.choice(HALVES) for _ in range(k + outer)]
        c = [rng.choice(HALVES) for _ in range(h)]
        d = [rng.choice(HALVES) for _ in range(h + outer)]
        chain = concatenation(pattern, a, b, c, d)
        if len(chain) < 2:
            continue
        weights = {fuse_in_order(chain, random_order(len(chain), rng)).weight for _ in range(8)}
        assert weights == {closed_form_weight(a, b, c, d)}


def test_admissible_chains_order_independent():
    rng = random.Random(9)
    for _ in range(200):
        chain, expected = admissible_chain(rng, 12)
        assert len(chain) <= 12
        results = {fuse_in_order(chain, random_order(len(chain), rng)) for _ in range(10)}
        assert len(results) == 1 and results.pop().weight == expected


def test_non_associativity_witness():
    left, right = non_associativity_witness()
    assert left != right
    assert left.internal != right.internal and left.weight != right.weight


def test_order_dependence_is_detected():
    x = odd_piece("rRl", alg.SWAP_01, alg.HALF)
    y = odd_piece("lLr", alg.SWAP_12, alg.HALF)
    z = odd_piece("rLl", alg.SWAP_02, alg.HALF)
    with pytest.raises(OrderDependence):
        fuse_all_weighted([x, y, z], random.Random(0), audit_orders=20)


def test_piece_text_round_trip():
    for token in ("rr[(012)]_1", "lRr[(01)]_1/2", "rLl[(12)]_-1/2", "ll[id]_0"):
        piece = parse_piece(token)
        assert parse_piece(str(piece)) == piece


def test_piece_invariants():
    with pytest.raises(ValueError):
        Subedge("r", "r", alg.SWAP_01)
    with pytest.raises(ValueError):
        Subedge("r", "l", alg.SWAP_01, alg.ONE, "R")
    with pytest.raises(ValueError):
        Subedge("r", "r", alg.IDENTITY, alg.HALF)
