import itertools

import pytest

from spinscape.branching import EMPTY, MINUS, PLUS
from spinscape.moves import SHIFTS, retained_face
from spinscape.patch_obstruction import (
    CIRCUIT_DELTA_ALPHA,
    INDEX_PAIRS,
    circuit_delta_alpha_table,
    circuit_edge_contributions,
    vertex_move_wing_table,
)


@pytest.fixture(scope="module")
def table():
    return circuit_delta_alpha_table()


def test_recomputed_table_matches_frozen(table):
    assert table == CIRCUIT_DELTA_ALPHA


def test_spot_entries(table):
    col = {pair: i for i, pair in enumerate(INDEX_PAIRS)}
    assert table[(EMPTY, "in-out-right")][col[(1, -1)]] == 1
    assert all(v == 0 for v in table[(EMPTY, "along")])
    assert table[(PLUS, "in")][col[(1, 1)]] == 1
    assert all(table[key][col[(-1, -1)]] == 0 for key in table)


def test_every_row_is_realized():
    seen = set()
    for color in (EMPTY, PLUS, MINUS):
        for vo, wo in itertools.product(itertools.permutations(range(4)), repeat=2):
            got = circuit_edge_contributions(color, vo, wo)
            if got:
                seen |= set(got)
    assert seen == set(CIRCUIT_DELTA_ALPHA)


def test_contributions_are_integral():
    for vo, wo in itertools.product(itertools.permutations(range(4)), repeat=2):
        got = circuit_edge_contributions(PLUS, vo, wo)
        assert got is None or all(v % 2 == 0 for v in got.values())


@pytest.mark.parametrize("kind", ["I", "II", "Ibar", "IIbar"])
def test_vertex_move_changes_retained_face_edges(kind):
    wings = vertex_move_wing_table(kind)
    kept = retained_face((0, 1, 2, 3), SHIFTS[kind])
    assert len(wings) == 6
    for (i, j), v in wings.items():
        assert v == (1 if kept not in (i, j) else 0)
