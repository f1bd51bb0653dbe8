import itertools
import random

import pytest

from spinscape.branching import (
    EMPTY,
    FROZEN_OUT_FACES,
    IN,
    ODD,
    OUT,
    BranchingError,
    GuardExceeded,
    PreBranching,
    TetBranching,
    WeakBranching,
    audit_pre_branching,
    classify_edge_type,
    compatible_tet_branchings,
    derive_out_faces,
    diagonal_edges,
    edge_type_of_permutation,
    enumerate_decorations,
    enumerate_pre_branchings,
    enumerate_tet_branchings,
    enumerate_weak_branchings,
    find_pre_branching,
    find_weak_branching,
    global_branching_exists,
    induced_pre_branching,
    is_weak_branching,
    z2_taut,
)
from spinscape.triangulation import GluingGraph, perm_sign

from conftest import load, random_four_valent_graph


def balanced_patterns():
    for outs in itertools.combinations(range(4), 2):
        yield {f: (OUT if f in outs else IN) for f in range(4)}


def test_twenty_four_branchings_twelve_per_index():
    bs = enumerate_tet_branchings()
    assert len(bs) == 24
    assert sum(b.index == 1 for b in bs) == 12
    assert TetBranching((0, 1, 2, 3)).index == 1
    assert not any(b.has_cycle_face() for b in bs)


def test_transposition_flips_index():
    for b in enumerate_tet_branchings():
        o = list(b.order)
        o[1], o[3] = o[3], o[1]
        assert TetBranching(tuple(o)).index == -b.index


def test_frozen_transversality_table_regenerates():
    derived = derive_out_faces()
    assert {o: tuple(sorted(f)) for o, f in derived.items()} == FROZEN_OUT_FACES


def test_transversality_table_is_four_to_one():
    counts = {}
    for faces in FROZEN_OUT_FACES.values():
        counts[faces] = counts.get(faces, 0) + 1
    assert len(counts) == 6 and set(counts.values()) == {4}


def test_globally_branched_fixtures_induce_valid_pre_branchings():
    for name in ("punctured_s3", "figure_eight"):
        tri = load(name)
        witness = global_branching_exists(tri).witness
        omega = induced_pre_branching(tri, witness)
        assert audit_pre_branching(tri.gluing_graph(), omega.directions)
        assert is_weak_branching(tri, omega, witness)
        wb = WeakBranching(omega, witness)
        assert set(wb.edge_types(tri)) == {EMPTY}


@pytest.mark.parametrize("pattern", list(balanced_patterns()), ids=str)
def test_four_compatible_branchings_per_pattern(pattern):
    assert len(compatible_tet_branchings(pattern)) == 4


def test_unbalanced_pattern_rejected():
    with pytest.raises(BranchingError):
        compatible_tet_branchings({0: IN, 1: IN, 2: IN, 3: OUT})


def test_pre_branching_on_figure_eight_and_brute_force():
    tri = load("figure_eight")
    g = tri.gluing_graph()
    omega = find_pre_branching(g)
    assert audit_pre_branching(g, omega.directions)
    brute = [d for d in itertools.product((0, 1), repeat=4) if audit_pre_branching(g, d)]
    assert brute and sorted(p.directions for p in enumerate_pre_branchings(g)) == sorted(brute)


def test_single_vertex_two_loops():
    g = GluingGraph(1, (((0, 0), (0, 1)), ((0, 2), (0, 3))))
    assert audit_pre_branching(g, find_pre_branching(g).directions)


def test_pre_branching_is_deterministic(fixture_tri):
    _, tri = fixture_tri
    g = tri.gluing_graph()
    assert find_pre_branching(g) == find_pre_branching(g)


def test_pre_branching_on_random_graphs():
    rng = random.Random(11)
    for _ in range(100):
        g = random_four_valent_graph(rng)
        assert audit_pre_branching(g, find_pre_branching(g).directions)


def test_enumeration_guard():
    g = random_four_valent_graph(random.Random(3), 12)
    with pytest.raises(GuardExceeded):
        enumerate_pre_branchings(g, guard=len(g.edges) - 1)


def test_weak_branching_for_every_figure_eight_omega():
    tri = load("figure_eight")
    for omega in enumerate_pre_branchings(tri.gluing_graph()):
        wb = find_weak_branching(tri, omega)
        assert wb is not None
        brute = [
            tuple(b.order for b in bs) for bs in itertools.product(*(compatible_tet_branchings(omega.pattern(tri, t)) for t in range(tri.n)))
            if is_weak_branching(tri, omega, bs)
        ]
        assert sorted(tuple(b.order for b in w.branchings) for w in enumerate_weak_branchings(tri, omega)) == sorted(brute)


def test_global_branching_is_a_weak_solution():
    tri = load("figure_eight")
    witness = global_branching_exists(tri).witness
    omega = induced_pre_branching(tri, witness)
    assert WeakBranching(omega, witness) in enumerate_weak_branchings(tri, omega)


def test_weak_branchings_have_even_edge_types(fixture_tri):
    _, tri = fixture_tri
    for wb in enumerate_decorations(tri):
        assert ODD not in wb.edge_types(tri)


def test_edge_type_of_permutation():
    assert edge_type_of_permutation((0, 1, 2)) == EMPTY
    assert edge_type_of_permutation((1, 2, 0)) == 1
    assert edge_type_of_permutation((2, 0, 1)) == -1
    assert edge_type_of_permutation((1, 0, 2)) is ODD


def test_odd_gluing_rejects_candidate():
    # branchings compatible with omega never produce odd gluings; arbitrary ones do
    tri = load("figure_eight")
    omega = find_pre_branching(tri.gluing_graph())
    all_b = enumerate_tet_branchings()
    odd_seen = 0
    for bs in itertools.product(all_b, repeat=tri.n):
        types = [classify_edge_type(tri, omega, bs, e) for e in range(4)]
        compatible = all(bs[t].pattern() == omega.pattern(tri, t) for t in range(tri.n))
        if compatible:
            assert ODD not in types
        if ODD in types:
            odd_seen += 1
            assert not is_weak_branching(tri, omega, bs)
    assert odd_seen > 0


def test_taut_two_diagonals_per_tetrahedron():
    for b in enumerate_tet_branchings():
        d = diagonal_edges(b)
        assert len(set(d)) == 2 and not set(d[0]) & set(d[1])


def test_taut_parity_and_omega_dependence(fixture_tri):
    _, tri = fixture_tri
    by_omega = {}
    for wb in enumerate_decorations(tri):
        neg = z2_taut(tri, wb, cross_check=False).negative_edges()
        assert len(neg) == 2 * tri.n
        assert by_omega.setdefault(wb.omega, neg) == neg


def test_sister_not_branchable():
    r = global_branching_exists(load("figure_eight_sister"))
    assert r.branchable is False and r.refuted == r.total == 576


def test_figure_eight_branchable_with_valid_witness():
    tri = load("figure_eight")
    r = global_branching_exists(tri)
    assert r.branchable
    omega = induced_pre_branching(tri, r.witness)
    assert set(WeakBranching(omega, r.witness).edge_types(tri)) == {EMPTY}


def test_guard_gives_undecided():
    assert global_branching_exists(load("figure_eight"), guard=1).branchable is None


def test_serialization_formats():
    tri = load("figure_eight")
    wb = next(enumerate_decorations(tri))
    assert wb.omega.to_text().splitlines()[0].startswith("edge 0 dir ")
    assert wb.to_text().splitlines()[1].startswith("tet 1 order ")
    assert perm_sign(wb.branchings[0].order) == wb.branchings[0].index
