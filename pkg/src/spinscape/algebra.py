"""Exact arithmetic for S3, the weight group G = (1/2 Z)/2Z and the product S3 x| G^3.

Elements of G are stored doubled as integers mod 4: 0 -> 0, 1 -> 1/2,
2 -> 1, 3 -> 3/2 = -1/2.  Permutations of {0, 1, 2} are tuples ``p`` with
``p[j]`` the image of ``j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

Perm3 = tuple[int, int, int]

IDENTITY: Perm3 = (0, 1, 2)
CYCLE_012: Perm3 = (1, 2, 0)
CYCLE_021: Perm3 = (2, 0, 1)
SWAP_01: Perm3 = (1, 0, 2)
SWAP_02: Perm3 = (2, 1, 0)
SWAP_12: Perm3 = (0, 2, 1)

S3: tuple[Perm3, ...] = tuple(itertools.permutations(range(3)))  # type: ignore[assignment]
S3_EVEN = (IDENTITY, CYCLE_012, CYCLE_021)
S3_ODD = (SWAP_01, SWAP_02, SWAP_12)

_NAMES = {
    IDENTITY: "()",
    CYCLE_012: "(012)",
    CYCLE_021: "(021)",
    SWAP_01: "(01)",
    SWAP_02: "(02)",
    SWAP_12: "(12)",
}
_BY_NAME = {v: k for k, v in _NAMES.items()}
_BY_NAME.update({"id": IDENTITY, "e": IDENTITY, "0": IDENTITY, "+1": CYCLE_012, "-1": CYCLE_021})


def compose(f: Sequence[int], g: Sequence[int]) -> Perm3:
    """``f o g``: apply ``g`` first."""
    return tuple(f[g[j]] for j in range(len(g)))  # type: ignore[return-value]


def inverse(p: Sequence[int]) -> Perm3:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)  # type: ignore[return-value]


def is_even(p: Sequence[int]) -> bool:
    return tuple(p) in S3_EVEN


def perm_name(p: Sequence[int]) -> str:
    return _NAMES[tuple(p)]  # type: ignore[index]


def parse_perm(name: str) -> Perm3:
    try:
        return _BY_NAME[name.strip()]
    except KeyError:
        raise ValueError(f"unknown permutation {name!r}") from None


# -- G ----------------------------------------------------------------------

HALF = 1
ONE = 2
MINUS_HALF = 3


def g_add(*xs: int) -> int:
    return sum(xs) % 4


def g_neg(x: int) -> int:
    return (-x) % 4


def g_is_integral(x: int) -> bool:
    """True iff ``x`` lies in the subgroup Z/2 = {0, 1}."""
    return x % 2 == 0


def g_to_z2(x: int) -> int:
    if not g_is_integral(x):
        raise ValueError(f"{g_format(x)} is not in Z/2")
    return (x // 2) % 2


def g_format(x: int) -> str:
    return {0: "0", 1: "1/2", 2: "1", 3: "-1/2"}[x % 4]


def g_parse(text: str) -> int:
    table = {"0": 0, "1/2": 1, "+1/2": 1, "1": 2, "-1/2": 3, "3/2": 3, "-1": 2, "2": 0}
    try:
        return table[text.strip()]
    except KeyError:
        raise ValueError(f"not an element of G: {text!r}") from None


# -- S3 x| G^3 ---------------------------------------------------------------

GVec = tuple[int, int, int]


def act(g: Sequence[int], theta: Sequence[int]) -> GVec:
    """Right action ``(g . theta)_j = g_{theta(j)}``."""
    return (g[theta[0]], g[theta[1]], g[theta[2]])


@dataclass(frozen=True)
class SemidirectElement:
    perm: Perm3
    weights: GVec

    def __mul__(self, other: "SemidirectElement") -> "SemidirectElement":
        return semidirect_mul(self, other)

    def __str__(self) -> str:
        return f"({perm_name(self.perm)}, ({', '.join(g_format(w) for w in self.weights)}))"


NEUTRAL = SemidirectElement(IDENTITY, (0, 0, 0))


def semidirect_mul(x: SemidirectElement, y: SemidirectElement) -> SemidirectElement:
    """``(eta, g) . (theta, h) = (eta o theta, g . theta + h)``."""
    moved = act(x.weights, y.perm)
    return SemidirectElement(
        compose(x.perm, y.perm),
        tuple((a + b) % 4 for a, b in zip(moved, y.weights)),  # type: ignore[arg-type]
    )


# Section tables s: S3 -> G^3 (doubled entries).
SECTION_TABLE: Mapping[Perm3, GVec] = {
    IDENTITY: (0, 0, 0),
    CYCLE_012: (MINUS_HALF, MINUS_HALF, ONE),
    SWAP_01: (MINUS_HALF, HALF, 0),
    SWAP_02: (ONE, 0, ONE),
    CYCLE_021: (ONE, HALF, HALF),
    SWAP_12: (0, MINUS_HALF, HALF),
}

ALTERNATE_SECTION_TABLE: Mapping[Perm3, GVec] = {
    IDENTITY: (0, 0, 0),
    CYCLE_012: (MINUS_HALF, MINUS_HALF, ONE),
    SWAP_01: (HALF, MINUS_HALF, ONE),
    SWAP_02: (0, ONE, 0),
    CYCLE_021: (ONE, HALF, HALF),
    SWAP_12: (ONE, HALF, MINUS_HALF),
}


def psi(eta: Sequence[int], table: Mapping[Perm3, GVec] = SECTION_TABLE) -> SemidirectElement:
    p = tuple(eta)
    return SemidirectElement(p, table[p])  # type: ignore[arg-type,index]


def homomorphism_failures(table: Mapping[Perm3, GVec] = SECTION_TABLE) -> list[tuple[Perm3, Perm3]]:
    """Pairs (eta, theta) with psi(eta) psi(theta) != psi(eta o theta); empty iff psi is a homomorphism."""
    bad = []
    for eta in S3:
        for theta in S3:
            if psi(eta, table) * psi(theta, table) != psi(compose(eta, theta), table):
                bad.append((eta, theta))
    return bad
