"""Decorated 4-valent graphs and the fusion of multiply coloured edges.

A graph edge split by valence-2 vertices is stored as a chain of
:class:`Subedge` pieces read left to right along the edge's orientation.  Each
piece records the external orientation at both ends (``"r"`` points right,
``"l"`` points left), the bijection ``matching`` carrying strand labels at its
left end to strand labels at its right end, an optional internal orientation
(``"R"``/``"L"``) and a numerical weight in G (doubled, mod 4).

Even pieces (``left == right``) carry an even matching and a weight in {0, 1};
odd pieces carry a transposition and a weight of +-1/2.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from . import algebra as alg
from .branching import EMPTY, MINUS, PLUS, WeakBranching, classify_edge_type, label_permutation
from .gf2 import GF2Vector
from .triangulation import Triangulation


class FusionError(ValueError):
    """Two pieces cannot be fused (orientation mismatch or an excluded adjacency)."""


class OrderDependence(RuntimeError):
    """Weighted fusion produced different results under different orders."""


Z3_TO_PERM = {EMPTY: alg.IDENTITY, PLUS: alg.CYCLE_012, MINUS: alg.CYCLE_021}
PERM_TO_Z3 = {v: k for k, v in Z3_TO_PERM.items()}


@dataclass(frozen=True)
class Subedge:
    left: str
    right: str
    matching: alg.Perm3
    weight: int = 0
    internal: str | None = None

    def __post_init__(self):
        if self.left not in "rl" or self.right not in "rl":
            raise ValueError("end orientations are 'r' or 'l'")
        even = alg.is_even(self.matching)
        if even != (self.left == self.right):
            raise ValueError("matching parity must agree with the end orientations")
        if even:
            object.__setattr__(self, "internal", "R" if self.left == "r" else "L")
            if self.weight % 2:
                raise ValueError("even pieces carry weight 0 or 1")
        else:
            if self.internal not in ("R", "L"):
                raise ValueError("odd pieces need an internal orientation")
            if self.weight % 2 == 0:
                raise ValueError("odd pieces carry weight +-1/2")
        object.__setattr__(self, "weight", self.weight % 4)

    @property
    def is_even(self) -> bool:
        return self.left == self.right

    @property
    def color(self) -> alg.Perm3:
        """The colour read from the first end of the internal orientation."""
        return self.matching if self.internal == "R" else alg.inverse(self.matching)

    @property
    def shape(self) -> str:
        return self.left + ("" if self.is_even else self.internal) + self.right  # type: ignore[operator]

    def __str__(self) -> str:
        return f"{self.shape}[{alg.perm_name(self.matching)}]_{alg.g_format(self.weight)}"


def even_piece(orientation: str, matching: alg.Perm3 = alg.IDENTITY, weight: int = 0) -> Subedge:
    return Subedge(orientation, orientation, matching, weight)


def odd_piece(shape: str, matching: alg.Perm3, weight: int) -> Subedge:
    """``shape`` is one of ``rRl``, ``rLl``, ``lRr``, ``lLr``."""
    return Subedge(shape[0], shape[2], matching, weight, shape[1])


def parse_piece(token: str) -> Subedge:
    m = re.fullmatch(r"([rl])([RL]?)([rl])\[(.*)\]_(.*)", token)
    if not m:
        raise ValueError(f"bad piece {token!r}")
    left, internal, right, perm, w = m.groups()
    return Subedge(left, right, alg.parse_perm(perm), alg.g_parse(w), internal or None)


# -- fusion -----------------------------------------------------------------


def fuse_unweighted(x: Subedge, y: Subedge) -> Subedge:
    """Compose two adjacent pieces ignoring weights; colours compose as strand bijections."""
    if x.right != y.left:
        raise FusionError(f"orientations do not match across the valence-2 vertex: {x.shape}.{y.shape}")
    matching = alg.compose(y.matching, x.matching)
    if x.left == y.right:
        return Subedge(x.left, y.right, matching, 0)
    return Subedge(x.left, y.right, matching, 1, x.internal if not x.is_even else y.internal)


def fuse_chain_unweighted(chain: Sequence[Subedge]) -> Subedge:
    out = chain[0]
    for piece in chain[1:]:
        out = fuse_unweighted(out, piece)
    return out


def fuse_weighted(x: Subedge, y: Subedge) -> Subedge:
    """Weighted fusion of two adjacent pieces by the rr / ll / rDl / lDr rules."""
    if x.right != y.left:
        raise FusionError(f"orientations do not match across the valence-2 vertex: {x.shape}.{y.shape}")
    matching = alg.compose(y.matching, x.matching)
    a1, a2 = x.weight, y.weight
    if x.is_even and y.is_even:
        return Subedge(x.left, y.right, matching, a1 + a2)
    if x.is_even:
        # rr.rDl, ll.lDr
        return Subedge(x.left, y.right, matching, a1 + a2, y.internal)
    if y.is_even:
        return Subedge(x.left, y.right, matching, a1 + a2, x.internal)
    # two odd pieces fuse to an even one whose orientation is x.left
    ext = "R" if x.left == "r" else "L"
    di, dj = x.internal, y.internal
    if di == dj == ext:
        return Subedge(x.left, y.right, matching, a1 + a2)
    if di != ext and dj != ext:
        raise FusionError(f"excluded adjacency {x.shape}.{y.shape}")
    return Subedge(x.left, y.right, matching, a1 - a2)


def fuse_in_order(chain: Sequence[Subedge], order: Sequence[int]) -> Subedge:
    """Fuse a chain by the given sequence of adjacency positions (indices into the shrinking list)."""
    pieces = list(chain)
    for i in order:
        pieces[i : i + 2] = [fuse_weighted(pieces[i], pieces[i + 1])]
    if len(pieces) != 1:
        raise ValueError("fusion order does not reduce the chain to one piece")
    return pieces[0]


def random_order(length: int, rng: random.Random) -> list[int]:
    return [rng.randrange(k - 1) for k in range(length, 1, -1)]


def left_fold(length: int) -> list[int]:
    return [0] * (length - 1)


def fuse_all_weighted(chain: Sequence[Subedge], rng: random.Random | None = None, audit_orders: int = 3) -> Subedge:
    """Fuse a chain completely; the result is audited against random fusion orders."""
    if len(chain) == 1:
        return chain[0]
    result = fuse_in_order(chain, left_fold(len(chain)))
    rng = rng or random.Random(0)
    for _ in range(audit_orders):
        other = fuse_in_order(chain, random_order(len(chain), rng))
        if other != result:
            raise OrderDependence(f"{result} != {other}")
    return result


def non_associativity_witness(a: int = alg.HALF, b: int = alg.HALF, c: int = alg.HALF) -> tuple[Subedge, Subedge]:
    """Fuse rRl . lLr . rLl both ways; the two results differ."""
    x = odd_piece("rRl", alg.SWAP_01, a)
    y = odd_piece("lLr", alg.SWAP_12, b)
    z = odd_piece("rLl", alg.SWAP_02, c)
    return fuse_weighted(fuse_weighted(x, y), z), fuse_weighted(x, fuse_weighted(y, z))


# -- concatenation patterns with closed-form weights ------------------------


def concatenation(pattern: int, a: Sequence[int], b: Sequence[int], c: Sequence[int], d: Sequence[int]) -> list[Subedge]:
    """Build one of the four pure concatenation patterns.

    Patterns 1 and 3 use ``len(a) == len(b) == k`` and ``len(c) == len(d) == h``;
    patterns 2 and 4 additionally take ``b[0]`` and ``d[0]`` as the outer pieces
    (so ``len(b) == k + 1``, ``len(d) == h + 1``).  Matchings are random
    transpositions; only the weights matter here.
    """
    t = alg.SWAP_01
    if pattern in (1, 2):
        P, Q, S, U = "rRl", "lLr", "rLl", "lRr"
    else:
        P, Q, S, U = "lLr", "rRl", "lRr", "rLl"
    out: list[Subedge] = []
    if pattern in (1, 3):
        for ai, bi in zip(a, b):
            out += [odd_piece(P, t, ai), odd_piece(Q, t, bi)]
        for ci, di in zip(reversed(c), reversed(d)):
            out += [odd_piece(S, t, di), odd_piece(U, t, ci)]
        return out
    out.append(odd_piece(Q, t, b[0]))
    for ai, bi in zip(a, b[1:]):
        out += [odd_piece(P, t, ai), odd_piece(Q, t, bi)]
    for ci, di in zip(reversed(c), reversed(d[1:])):
        out += [odd_piece(S, t, di), odd_piece(U, t, ci)]
    out.append(odd_piece(S, t, d[0]))
    return out


def closed_form_weight(a: Sequence[int], b: Sequence[int], c: Sequence[int], d: Sequence[int]) -> int:
    """Sum a - Sum b + Sum c - Sum d; for patterns 2 and 4 pass b and d including b[0], d[0]."""
    return (sum(a) - sum(b) + sum(c) - sum(d)) % 4


def admissible_chain(rng: random.Random, max_len: int = 12, outer: bool | None = None) -> tuple[list[Subedge], int]:
    """A random chain of the shape produced by vertex-local weighted moves, with its predicted weight.

    The odd pieces form pattern 1 (or pattern 2 when ``outer``) and even pieces
    are sprinkled where the orientation allows; the prediction adds their weights.
    """
    if outer is None:
        outer = rng.random() < 0.5
    t = alg.SWAP_01
    half = lambda: rng.choice((alg.HALF, alg.MINUS_HALF))  # noqa: E731
    unit = lambda: rng.choice((0, alg.ONE))  # noqa: E731
    chain: list[Subedge] = []
    total = 0

    def evens(orientation: str) -> None:
        nonlocal total
        for _ in range(rng.randint(0, 1)):
            u = unit()
            total += u
            chain.append(even_piece(orientation, alg.IDENTITY, u))

    budget = max(0, max_len - 1 - (2 if outer else 0))
    k = rng.randint(0, budget // 2)
    h = rng.randint(0, (budget - 2 * k) // 2)
    if outer:
        evens("l")
        b0 = half()
        total -= b0
        chain.append(odd_piece("lLr", t, b0))
    for _ in range(k):
        evens("r")
        a, b = half(), half()
        total += a - b
        chain.append(odd_piece("rRl", t, a))
        evens("l")
        chain.append(odd_piece("lLr", t, b))
    w = unit()
    total += w
    chain.append(even_piece("r", alg.IDENTITY, w))
    for _ in range(h):
        d, c = half(), half()
        total += c - d
        chain.append(odd_piece("rLl", t, d))
        evens("l")
        chain.append(odd_piece("lRr", t, c))
        evens("r")
    if outer:
        d0 = half()
        total -= d0
        chain.append(odd_piece("rLl", t, d0))
        evens("l")
    if len(chain) > max_len:
        return admissible_chain(rng, max_len, outer)
    return chain, total % 4


# -- decorated graphs -------------------------------------------------------


@dataclass(frozen=True)
class GraphVertex:
    id: int
    index: int
    order: tuple[int, int, int, int]


@dataclass(frozen=True)
class GraphEdge:
    id: int
    tail: tuple[int, int]
    head: tuple[int, int]
    color: int | alg.Perm3
    weight: int = 0
    internal: str | None = None


@dataclass(frozen=True)
class DecoratedGraph:
    """A graph of the N (Z/3 colours) or A (S3 colours) family, with optional weights."""

    family: str
    vertices: tuple[GraphVertex, ...]
    edges: tuple[GraphEdge, ...]

    def to_text(self) -> str:
        lines = [f"vertex {v.id} index {v.index:+d}" for v in self.vertices]
        for e in self.edges:
            color = e.color if isinstance(e.color, int) else alg.perm_name(e.color)
            if isinstance(color, int):
                color = {0: "0", 1: "+1", -1: "-1"}[color]
            line = (
                f"edge {e.id} : {e.tail[0]},{e.tail[1]} -> {e.head[0]},{e.head[1]} "
                f"color {color} weight {alg.g_format(e.weight)}"
            )
            if e.internal:
                line += f" iorient {'+' if e.internal == 'R' else '-'}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    def weights(self) -> tuple[int, ...]:
        return tuple(e.weight for e in self.edges)


def parse_graph(text: str, family: str = "N_w") -> DecoratedGraph:
    vertices = []
    edges = []
    for raw in text.splitlines():
        line = raw.split("#")[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "vertex":
            vertices.append(GraphVertex(int(tok[1]), int(tok[3]), (0, 1, 2, 3)))
        elif tok[0] == "edge":
            m = re.fullmatch(
                r"edge (\d+) : (\d+),(\d+) -> (\d+),(\d+) color (\S+) weight (\S+)(?: iorient ([+-]))?", line
            )
            if not m:
                raise ValueError(f"bad edge line {line!r}")
            g = m.groups()
            color: int | alg.Perm3
            color = {"0": 0, "+1": 1, "-1": -1}[g[5]] if g[5] in ("0", "+1", "-1") else alg.parse_perm(g[5])
            internal = None if g[7] is None else ("R" if g[7] == "+" else "L")
            edges.append(GraphEdge(int(g[0]), (int(g[1]), int(g[2])), (int(g[3]), int(g[4])), color, alg.g_parse(g[6]), internal))
        else:
            raise ValueError(f"unexpected line {line!r}")
    return DecoratedGraph(family, tuple(sorted(vertices, key=lambda v: v.id)), tuple(sorted(edges, key=lambda e: e.id)))


def graph_of(tri: Triangulation, wb: WeakBranching, beta: GF2Vector | None = None) -> DecoratedGraph:
    """The graph of (T, omega, b) with Z/3 colours, weighted by the 2-chain ``beta`` if given."""
    vertices = tuple(GraphVertex(t, b.index, b.order) for t, b in enumerate(wb.branchings))
    edges = []
    for e in range(len(tri.pairings)):
        color = classify_edge_type(tri, wb.omega, wb.branchings, e)
        w = alg.ONE if beta is not None and beta[e] else 0
        edges.append(GraphEdge(e, wb.omega.tail(tri, e), wb.omega.head(tri, e), color, w))
    return DecoratedGraph("N" if beta is None else "N_w", vertices, tuple(edges))


def edge_data(graph: DecoratedGraph) -> tuple[tuple[tuple[int, int], tuple[int, int], int], ...]:
    """(tail germ, head germ, colour) per edge: the data a graph of the N family records."""
    return tuple((e.tail, e.head, e.color) for e in graph.edges)  # type: ignore[misc]


# -- split graphs and fusion at graph level ---------------------------------


def fuse_N(chain: Iterable[tuple[int, int]]) -> tuple[int, int]:
    """Fuse consistently oriented pieces of the N family: colours add in Z/3, weights in Z/2."""
    color, weight = 0, 0
    for c, w in chain:
        color = (color + c + 1) % 3 - 1
        weight = (weight + w) % 2
    return color, weight


def fuse_A(chain: Sequence[Subedge]) -> Subedge:
    """Unweighted fusion of a chain of the A family (associative)."""
    return fuse_chain_unweighted(chain)


@dataclass(frozen=True)
class SplitGraph:
    base: DecoratedGraph
    chains: Mapping[int, tuple[Subedge, ...]]

    def fuse(self, rng: random.Random | None = None) -> DecoratedGraph:
        edges = []
        for e in self.base.edges:
            if e.id not in self.chains:
                edges.append(e)
                continue
            piece = fuse_all_weighted(self.chains[e.id], rng)
            if not piece.is_even or piece.left != "r":
                raise FusionError(f"edge {e.id} does not fuse to a consistently oriented edge")
            color = PERM_TO_Z3[piece.matching]
            edges.append(replace(e, color=color, weight=piece.weight % 4))
        return replace(self.base, family="N_w", edges=tuple(edges))


def random_split(sigma: alg.Perm3, rng: random.Random, max_pieces: int = 6, weighted: bool = False) -> tuple[Subedge, ...]:
    """A random chain of pieces fusing (unweighted) to the even edge coloured ``sigma``.

    Intermediate valence-2 vertices get random strand labellings; the end
    orientation at each one is forced by the labelling's parity.
    """
    k = rng.randint(1, max_pieces)
    labellings = [alg.IDENTITY] + [rng.choice(alg.S3) for _ in range(k - 1)] + [tuple(sigma)]
    pieces = []
    for prev, nxt in zip(labellings, labellings[1:]):
        lam = alg.compose(nxt, alg.inverse(prev))
        left = "r" if alg.is_even(prev) else "l"
        right = "r" if alg.is_even(nxt) else "l"
        if left == right:
            w = rng.choice((0, alg.ONE)) if weighted else 0
            pieces.append(Subedge(left, right, lam, w))
        else:
            pieces.append(Subedge(left, right, lam, rng.choice((alg.HALF, alg.MINUS_HALF)), rng.choice("RL")))
    return tuple(pieces)


def random_split_graph(tri: Triangulation, wb: WeakBranching, rng: random.Random, edges: Sequence[int] | None = None) -> dict[int, tuple[Subedge, ...]]:
    ids = range(len(tri.pairings)) if edges is None else edges
    return {e: random_split(label_permutation(tri, wb.omega, wb.branchings, e), rng) for e in ids}
