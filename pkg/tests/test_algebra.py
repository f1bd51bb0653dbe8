import itertools
import random

import pytest

from spinscape import algebra as alg

TABLES = {"section": alg.SECTION_TABLE, "alternate": alg.ALTERNATE_SECTION_TABLE}


def random_element(rng):
    return alg.SemidirectElement(rng.choice(alg.S3), tuple(rng.randrange(4) for _ in range(3)))


@pytest.mark.parametrize("name", sorted(TABLES))
def test_psi_is_a_homomorphism(name):
    assert alg.homomorphism_failures(TABLES[name]) == []


def test_psi_of_identity():
    assert alg.psi(alg.IDENTITY) == alg.NEUTRAL


def test_psi_swap01_times_swap12():
    got = alg.psi(alg.SWAP_01) * alg.psi(alg.SWAP_12)
    assert got == alg.SemidirectElement(alg.CYCLE_012, (alg.MINUS_HALF, alg.MINUS_HALF, alg.ONE))
    assert str(got) == "((012), (-1/2, -1/2, 1))"


def test_psi_swap01_squared():
    assert alg.psi(alg.SWAP_01) * alg.psi(alg.SWAP_01) == alg.NEUTRAL


def test_first_component_composes():
    x = alg.SemidirectElement(alg.SWAP_01, (1, 0, 2))
    y = alg.SemidirectElement(alg.SWAP_12, (0, 3, 0))
    assert (x * y).perm == alg.compose(alg.SWAP_01, alg.SWAP_12) == alg.CYCLE_012


def test_neutral_element():
    rng = random.Random(0)
    for _ in range(20):
        g = random_element(rng)
        assert g * alg.NEUTRAL == g == alg.NEUTRAL * g


def test_associativity_random_triples():
    rng = random.Random(1)
    for _ in range(50):
        a, b, c = (random_element(rng) for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_right_action():
    g = (alg.HALF, alg.ONE, 0)
    for eta, theta in itertools.product(alg.S3, repeat=2):
        assert alg.act(g, alg.compose(eta, theta)) == alg.act(alg.act(g, eta), theta)


def test_g_arithmetic():
    assert alg.g_add(alg.HALF, alg.HALF) == alg.ONE
    assert alg.g_add(alg.ONE, alg.ONE) == 0
    assert alg.g_neg(alg.HALF) == alg.MINUS_HALF
    assert [alg.g_format(x) for x in range(4)] == ["0", "1/2", "1", "-1/2"]
    assert all(alg.g_parse(alg.g_format(x)) == x for x in range(4))
    assert alg.g_to_z2(alg.ONE) == 1 and alg.g_to_z2(0) == 0
    with pytest.raises(ValueError):
        alg.g_to_z2(alg.HALF)


def test_half_differences_agree_mod_two():
    for a1, a2 in itertools.product((alg.HALF, alg.MINUS_HALF), repeat=2):
        assert (a1 - a2) % 4 == (a2 - a1) % 4


def test_perm_names_round_trip():
    for p in alg.S3:
        assert alg.parse_perm(alg.perm_name(p)) == p
