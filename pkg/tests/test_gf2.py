import itertools
import random

import pytest

from spinscape.gf2 import (
    GF2Matrix,
    GF2Vector,
    boundary_matrix,
    cell_counts,
    homology_rank,
    in_span,
    parse_chain,
    spine_cohomology_rank,
)

from conftest import FIXTURE_NAMES, load


def span_rank(columns) -> int:
    """Brute-force rank: log2 of the number of distinct subset sums."""
    sums = set()
    for mask in range(1 << len(columns)):
        s = 0
        for j, c in enumerate(columns):
            if (mask >> j) & 1:
                s ^= c
        sums.add(s)
    return len(sums).bit_length() - 1


def random_matrix(rng, nrows, ncols):
    return GF2Matrix(nrows, ncols, [rng.getrandbits(ncols) for _ in range(nrows)])


def test_boundary_of_boundary_is_zero(fixture_tri):
    _, tri = fixture_tri
    d1, d2, d3 = (boundary_matrix(tri, k) for k in (1, 2, 3))
    for j in range(d3.ncols):
        assert d2.matvec(d3.column(j)) == 0
    for j in range(d2.ncols):
        assert d1.matvec(d2.column(j)) == 0


def test_figure_eight_boundary_shape():
    d2 = boundary_matrix(load("figure_eight"), 2)
    assert (d2.nrows, d2.ncols) == (2, 4)


def test_one_tetrahedron_boundary_by_hand():
    tri = load("punctured_s3")
    d2 = boundary_matrix(tri, 2)
    for j, p in enumerate(tri.pairings):
        t, f = p.source
        verts = [v for v in range(4) if v != f]
        col = 0
        for a, b in itertools.combinations(verts, 2):
            col ^= 1 << tri.edge_lookup[(t, (a, b))][0]
        assert d2.column(j) == col


def test_rank_matches_brute_force(fixture_tri):
    _, tri = fixture_tri
    for k in (1, 2, 3):
        m = boundary_matrix(tri, k)
        assert m.rank() == span_rank([m.column(j) for j in range(m.ncols)])


@pytest.mark.parametrize("name,rank", [("punctured_s3", 0), ("figure_eight", 1), ("lens_8_3", 1), ("z2z2", 2)])
def test_spine_first_cohomology_rank(name, rank):
    # the manifold's H^1 is read on the dual spine; on T it shows up in degree 2
    tri = load(name)
    assert spine_cohomology_rank(tri) == rank
    assert homology_rank(tri, 2) == rank


def test_rank_bounds(fixture_tri):
    _, tri = fixture_tri
    counts = cell_counts(tri)
    for k in range(4):
        assert 0 <= homology_rank(tri, k) <= counts[k]


def test_solve_zero_target_gives_kernel():
    m = random_matrix(random.Random(1), 5, 8)
    sol = m.solve(0)
    assert sol.particular == 0
    assert len(sol.kernel_basis) == 8 - m.rank()
    assert all(m.matvec(z) == 0 for z in sol.kernel_basis)
    assert span_rank(sol.kernel_basis) == len(sol.kernel_basis)


def test_solver_round_trip_and_infeasible():
    rng = random.Random(5)
    infeasible_seen = 0
    for _ in range(200):
        m = random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        target = rng.getrandbits(m.nrows)
        sol = m.solve(target)
        columns = [m.column(j) for j in range(m.ncols)]
        assert sol.feasible == in_span(columns, target)
        if sol.feasible:
            assert m.matvec(sol.particular) == target
        else:
            infeasible_seen += 1
    assert infeasible_seen > 0


def test_chain_text_round_trip():
    v = GF2Vector.from_support(2, 6, [0, 3, 5])
    assert v.to_text() == "chain 2: 0,3,5"
    assert parse_chain(v.to_text(), 6) == v
    with pytest.raises(ValueError):
        parse_chain("chain 2: 7", 6)


def test_vector_addition_checks_grade():
    with pytest.raises(ValueError):
        GF2Vector.zero(1, 3) + GF2Vector.zero(2, 3)
