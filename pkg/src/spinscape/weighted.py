"""Weighted moves at a single vertex of a split graph, and their local fusion.

A :class:`LocalVertex` is one tetrahedron vertex of the gluing graph together
with the pieces that earlier moves stacked on its four germs.  Every move
rewrites the vertex order and pushes one new piece onto each germ, between the
vertex and what was there before.  Pieces are stored in the orientation of the
gluing-graph edge they sit on (``tail`` germs have the vertex at the left end,
``head`` germs at the right end), so a stack fuses with the ordinary weighted
rules.

Move decorations are keyed by the position, in the order before the move, of
the vertex opposite the germ's face:

* even germs get an integral weight (0 or 1, doubled as 0 or 2),
* odd germs get a half weight and an internal orientation, ``"to"`` or
  ``"from"`` the vertex.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import algebra as alg
from .branching import TetBranching
from .calculus import FusionError, Subedge, fuse_all_weighted
from .triangulation import perm_sign

Order = tuple[int, int, int, int]


class WrongIndex(ValueError):
    """The move does not apply at a vertex of this index."""


# -- position permutations ----------------------------------------------------

# new_order[i] = old_order[perm[i]]
POSITION_MAPS: dict[str, tuple[int, int, int, int]] = {
    "I": (1, 2, 3, 0),
    "IIbar": (1, 2, 3, 0),
    "II": (3, 0, 1, 2),
    "Ibar": (3, 0, 1, 2),
    "M": (0, 1, 3, 2),
    "Mbar": (0, 1, 3, 2),
    "N": (1, 0, 2, 3),
    "Nbar": (1, 0, 2, 3),
}
DOMAIN_INDEX = {"I": -1, "II": -1, "M": -1, "N": -1, "Ibar": 1, "IIbar": 1, "Mbar": 1, "Nbar": 1}


def moved_order(order: Sequence[int], kind: str) -> Order:
    p = POSITION_MAPS[kind]
    return tuple(order[p[i]] for i in range(4))  # type: ignore[return-value]


# -- decorations ----------------------------------------------------------------


@dataclass(frozen=True)
class OddMark:
    weight: int  # HALF or MINUS_HALF
    internal: str  # "to" or "from" the vertex


Decoration = Mapping[int, "int | OddMark"]

# I, II and their inverses put weight 1 on the germ they leave in place
VERTEX_MOVE_DECORATIONS: dict[str, dict[int, int]] = {
    "I": {0: alg.ONE, 1: 0, 2: 0, 3: 0},
    "IIbar": {0: alg.ONE, 1: 0, 2: 0, 3: 0},
    "II": {0: 0, 1: 0, 2: 0, 3: alg.ONE},
    "Ibar": {0: 0, 1: 0, 2: 0, 3: alg.ONE},
}


# -- the local vertex ------------------------------------------------------------


@dataclass(frozen=True)
class LocalVertex:
    """A vertex with per-germ piece stacks; ``sides[f]`` is ``"tail"`` or ``"head"``."""

    order: Order
    sides: tuple[str, str, str, str]
    stacks: tuple[tuple[Subedge, ...], ...] = ((), (), (), ())

    @classmethod
    def plain(cls, order: Sequence[int]) -> "LocalVertex":
        b = TetBranching(tuple(order))  # type: ignore[arg-type]
        sides = tuple("tail" if f in b.out_faces else "head" for f in range(4))
        return cls(tuple(order), sides)  # type: ignore[arg-type]

    @property
    def index(self) -> int:
        return perm_sign(self.order)

    def is_out(self, f: int) -> bool:
        return f in TetBranching(self.order).out_faces

    def edge_chain(self, f: int) -> tuple[Subedge, ...]:
        """The pieces at germ ``f`` read along the gluing-graph edge."""
        return self.stacks[f] if self.sides[f] == "tail" else tuple(reversed(self.stacks[f]))


def _end(out: bool, side: str) -> str:
    # orientation symbol at the vertex end of a piece
    return "r" if out == (side == "tail") else "l"


def transition_piece(old: Sequence[int], new: Sequence[int], f: int, side: str, mark: "int | OddMark") -> Subedge:
    """The piece recording the change of branching ``old -> new`` at germ ``f``."""
    bo, bn = TetBranching(tuple(old)), TetBranching(tuple(new))  # type: ignore[arg-type]
    lo, ln = bo.face_labels(f), bn.face_labels(f)
    out_old, out_new = f in bo.out_faces, f in bn.out_faces
    m = [0, 0, 0]
    if side == "tail":
        for v in lo:
            m[ln[v]] = lo[v]
        left, right = _end(out_new, side), _end(out_old, side)
    else:
        for v in lo:
            m[lo[v]] = ln[v]
        left, right = _end(out_old, side), _end(out_new, side)
    matching = tuple(m)
    if left == right:
        if isinstance(mark, OddMark):
            raise ValueError("odd decoration on an even germ")
        return Subedge(left, right, matching, mark)  # type: ignore[arg-type]
    if not isinstance(mark, OddMark):
        raise ValueError("even decoration on an odd germ")
    toward = "L" if side == "tail" else "R"
    internal = toward if mark.internal == "to" else ("R" if toward == "L" else "L")
    return Subedge(left, right, matching, mark.weight, internal)  # type: ignore[arg-type]


def apply_move(vertex: LocalVertex, kind: str, decoration: Decoration) -> LocalVertex:
    """Rebranch by ``kind`` and push the decorated transition pieces on every germ."""
    if vertex.index != DOMAIN_INDEX[kind]:
        raise WrongIndex(f"{kind} needs index {DOMAIN_INDEX[kind]:+d}, vertex has {vertex.index:+d}")
    old = vertex.order
    new = moved_order(old, kind)
    stacks = []
    for f in range(4):
        piece = transition_piece(old, new, f, vertex.sides[f], decoration[old.index(f)])
        stacks.append((piece,) + vertex.stacks[f])
    return LocalVertex(new, vertex.sides, tuple(stacks))


NEUTRAL_PIECE = Subedge("r", "r", alg.IDENTITY, 0)


@dataclass(frozen=True)
class FusedVertex:
    order: Order
    pieces: tuple[Subedge, ...]  # one fused piece per germ, in edge orientation


def fuse_locally(vertex: LocalVertex, rng: random.Random | None = None) -> FusedVertex:
    """Fuse each germ's stack; an empty stack is the neutral piece."""
    pieces = []
    for f in range(4):
        chain = vertex.edge_chain(f)
        pieces.append(fuse_all_weighted(chain, rng) if chain else NEUTRAL_PIECE)
    return FusedVertex(vertex.order, tuple(pieces))


def equal_up_to_coboundary(a: FusedVertex, b: FusedVertex) -> bool:
    """Same order and pieces, weights equal or all differing by 1."""
    if a.order != b.order:
        return False
    if any((p.shape, p.matching, p.internal) != (q.shape, q.matching, q.internal) for p, q in zip(a.pieces, b.pieces)):
        return False
    diffs = {(p.weight - q.weight) % 4 for p, q in zip(a.pieces, b.pieces)}
    return diffs in ({0}, {alg.ONE})


def is_identity(fused: FusedVertex, start: Sequence[int]) -> bool:
    return equal_up_to_coboundary(fused, FusedVertex(tuple(start), (NEUTRAL_PIECE,) * 4))  # type: ignore[arg-type]


# -- whole graphs ------------------------------------------------------------------


class FusionMismatch(AssertionError):
    """Globally fused pieces disagree with the decoration they should produce."""


def fuse_graph(desc, vertex_moves: Mapping[int, Sequence[str]], table: Mapping[str, Decoration], rng: random.Random | None = None):
    """Apply weighted moves at vertices of ``desc``, fuse every edge, and read back a descriptor.

    Edges whose fused piece points left are reversed in the pre-branching.
    The fused colours must agree with the new vertex orders and every fused
    weight must be integral.
    """
    from .branching import PreBranching, WeakBranching, is_weak_branching, label_permutation
    from .gf2 import GF2Vector
    from .obstruction import SpinDescriptor

    tri, wb = desc.tri, desc.wb
    local = {}
    for t in range(tri.n):
        v = LocalVertex.plain(wb.branchings[t].order)
        for kind in vertex_moves.get(t, ()):
            v = apply_move(v, kind, table[kind])
        local[t] = v
    dirs = list(wb.omega.directions)
    fused = {}
    for e in range(len(tri.pairings)):
        (t0, f0), (t1, f1) = wb.omega.tail(tri, e), wb.omega.head(tri, e)
        sigma = label_permutation(tri, wb.omega, wb.branchings, e)
        core = Subedge("r", "r", sigma, alg.ONE if desc.beta[e] else 0)
        chain = local[t0].edge_chain(f0) + (core,) + local[t1].edge_chain(f1)
        piece = fuse_all_weighted(chain, rng)
        if not piece.is_even or piece.weight % 2:
            raise FusionMismatch(f"edge {e} fuses to {piece}")
        if piece.left == "l":
            dirs[e] ^= 1
        fused[e] = piece
    omega = PreBranching(tuple(dirs))
    branchings = tuple(TetBranching(local[t].order) for t in range(tri.n))
    if not is_weak_branching(tri, omega, branchings):
        raise FusionMismatch("fused graph is not a weak branching")
    bits = 0
    for e, piece in fused.items():
        want = label_permutation(tri, omega, branchings, e)
        got = piece.matching if piece.left == "r" else alg.inverse(piece.matching)
        if got != want:
            raise FusionMismatch(f"edge {e}: fused colour {got} but the branching gives {want}")
        if piece.weight == alg.ONE:
            bits |= 1 << e
    return SpinDescriptor(tri, WeakBranching(omega, branchings), GF2Vector(2, len(tri.pairings), bits))


# -- frozen decorations ----------------------------------------------------------------

_P, _N = alg.HALF, alg.MINUS_HALF

WEIGHTED_MOVE_DECORATIONS: dict[str, dict[int, "int | OddMark"]] = {
    "M": {0: OddMark(_P, "from"), 1: OddMark(_N, "to"), 2: 0, 3: 0},
    "Mbar": {0: OddMark(_P, "to"), 1: OddMark(_N, "from"), 2: 0, 3: 0},
    "N": {0: 0, 1: 0, 2: OddMark(_P, "from"), 3: OddMark(_N, "to")},
    "Nbar": {0: 0, 1: 0, 2: OddMark(_P, "to"), 3: OddMark(_N, "from")},
}

DECORATIONS: dict[str, Decoration] = {**VERTEX_MOVE_DECORATIONS, **WEIGHTED_MOVE_DECORATIONS}

# words read left to right; III at index -1 is I.IIbar, at index +1 it is Ibar.II
WORDS = {
    "III-": ("I", "IIbar"),
    "III+": ("Ibar", "II"),
    "alpha": ("I", "IIbar"),
    "beta": ("I", "Mbar"),
}

# (name, start index, left word, right word); an empty right word is the identity
RELATIONS: tuple[tuple[str, int, tuple[str, ...], tuple[str, ...]], ...] = (
    ("M.Mbar = id-", -1, ("M", "Mbar"), ()),
    ("N.Nbar = id-", -1, ("N", "Nbar"), ()),
    ("Mbar.M = id+", 1, ("Mbar", "M"), ()),
    ("Nbar.N = id+", 1, ("Nbar", "N"), ()),
    ("III-.M = N.III+", -1, ("I", "IIbar", "M"), ("N", "Ibar", "II")),
    ("III+.Mbar = Nbar.III-", 1, ("Ibar", "II", "Mbar"), ("Nbar", "I", "IIbar")),
    ("M.Nbar = N.Mbar", -1, ("M", "Nbar"), ("N", "Mbar")),
    ("Mbar.N = Nbar.M", 1, ("Mbar", "N"), ("Nbar", "M")),
    ("III- = I.IIbar = II.Ibar", -1, ("I", "IIbar"), ("II", "Ibar")),
    ("III+ = Ibar.II = IIbar.I", 1, ("Ibar", "II"), ("IIbar", "I")),
)


def orders_of_index(index: int) -> list[Order]:
    return [o for o in itertools.permutations(range(4)) if perm_sign(o) == index]  # type: ignore[misc]


def run_word(start: Sequence[int], word: Iterable[str], table: Mapping[str, Decoration] = DECORATIONS) -> LocalVertex:
    v = LocalVertex.plain(start)
    for kind in word:
        v = apply_move(v, kind, table[kind])
    return v


def words_agree(index: int, left: Sequence[str], right: Sequence[str], table: Mapping[str, Decoration] = DECORATIONS) -> bool:
    """The two words give the same locally fused vertex at every start of the given index."""
    for start in orders_of_index(index):
        try:
            a = fuse_locally(run_word(start, left, table))
            b = fuse_locally(run_word(start, right, table))
        except FusionError:
            return False
        if not equal_up_to_coboundary(a, b):
            return False
    return True


def relation_report(table: Mapping[str, Decoration] = DECORATIONS) -> dict[str, bool]:
    return {name: words_agree(index, left, right, table) for name, index, left, right in RELATIONS}


# -- the group of index-preserving moves ------------------------------------------------


def position_map(word: Sequence[str]) -> tuple[int, ...]:
    """Net effect of a word on positions: new_order[i] = old_order[p[i]]."""
    p = (0, 1, 2, 3)
    for kind in word:
        q = POSITION_MAPS[kind]
        p = tuple(p[q[i]] for i in range(4))
    return p


def pi_minus_closure() -> dict[tuple[int, ...], tuple[str, ...]]:
    """Breadth-first closure of <alpha, beta> acting on index -1 vertices: element -> shortest word."""
    gens = (WORDS["alpha"], WORDS["beta"])
    seen: dict[tuple[int, ...], tuple[str, ...]] = {(0, 1, 2, 3): ()}
    frontier = [()]
    while frontier:
        nxt = []
        for word in frontier:
            for g in gens:
                w = word + g
                p = position_map(w)
                if p not in seen:
                    seen[p] = w
                    nxt.append(w)
        frontier = nxt
    return seen


def _random_word(rng: random.Random, target: tuple[int, ...], max_len: int = 12) -> tuple[str, ...]:
    gens = (WORDS["alpha"], WORDS["beta"])
    while True:
        w: tuple[str, ...] = ()
        for _ in range(rng.randint(1, max_len)):
            w += rng.choice(gens)
            if position_map(w) == target:
                return w


def pi_minus_check(rng: random.Random | None = None, table: Mapping[str, Decoration] = DECORATIONS) -> dict:
    """Weighted relations of the presentation, closure size, and well-definedness samples."""
    rng = rng or random.Random(0)
    a, b = WORDS["alpha"], WORDS["beta"]
    closure = pi_minus_closure()
    samples = []
    for target, shortest in sorted(closure.items()):
        w1, w2 = _random_word(rng, target), _random_word(rng, target)
        samples.append(
            {
                "element": list(target),
                "words": [" ".join(w1), " ".join(w2)],
                "agree": words_agree(-1, w1, w2, table) and words_agree(-1, w1, shortest or w1, table),
            }
        )
    return {
        "alpha^2": words_agree(-1, a * 2, (), table),
        "beta^3": words_agree(-1, b * 3, (), table),
        "(alpha.beta)^3": words_agree(-1, (a + b) * 3, (), table),
        "alpha.beta = II.Mbar": words_agree(-1, a + b, ("II", "Mbar"), table),
        "closure_size": len(closure),
        "well_defined": samples,
    }


# -- circuit generation -------------------------------------------------------------


def generating_moves(desc, circuits: Sequence[tuple[Sequence[int], str]]) -> dict[int, list[str]]:
    """Elementary weighted moves realizing a family of over/under circuits vertex by vertex.

    An overcircuit through a vertex asks for M (index -1) or Mbar (+1), an
    undercircuit for N or Nbar; a vertex on both gets the composite M.Nbar
    (or Mbar.N).
    """
    from .moves import _circuit_vertices

    need: dict[int, set[str]] = {}
    for edges, arc in circuits:
        for t in _circuit_vertices(desc, edges, arc):
            need.setdefault(t, set()).add(arc)
    out = {}
    for t, arcs in need.items():
        minus = desc.wb.branchings[t].index == -1
        if arcs == {"over"}:
            out[t] = ["M" if minus else "Mbar"]
        elif arcs == {"under"}:
            out[t] = ["N" if minus else "Nbar"]
        else:
            out[t] = ["M", "Nbar"] if minus else ["Mbar", "N"]
    return out


# -- derivation (oracle) -----------------------------------------------------------------


def _candidate_decorations(odd_positions: tuple[int, int]):
    marks = [OddMark(w, i) for w in (_P, _N) for i in ("to", "from")]
    even_positions = [k for k in range(4) if k not in odd_positions]
    for m0, m1, u0, u1 in itertools.product(marks, marks, (0, alg.ONE), (0, alg.ONE)):
        yield {odd_positions[0]: m0, odd_positions[1]: m1, even_positions[0]: u0, even_positions[1]: u1}


def canonical_decoration(deco: Decoration) -> tuple:
    """A decoration reduced modulo adding 1 on all four germs."""
    shift = next(v for v in deco.values() if not isinstance(v, OddMark))
    out = []
    for k in sorted(deco):
        v = deco[k]
        if isinstance(v, OddMark):
            out.append((k, (v.weight - shift) % 4, v.internal))
        else:
            out.append((k, (v - shift) % 4))
    return tuple(out)


def derive_decorations(circuit_cases: Sequence = ()) -> list[dict[str, Decoration]]:
    """Every decoration of M, Mbar, N, Nbar satisfying the relations and, for each
    ``(desc, circuits, expected)`` case, reproducing the expected descriptor after fusion.

    Solutions are returned one per class modulo vertex coboundaries.
    """
    from .obstruction import spin_equal

    base = dict(VERTEX_MOVE_DECORATIONS)
    m_cands = list(_candidate_decorations((0, 1)))
    n_cands = list(_candidate_decorations((2, 3)))
    pairs = []
    for M in m_cands:
        for Mb in m_cands:
            t = {**base, "M": M, "Mbar": Mb}
            if words_agree(-1, ("M", "Mbar"), (), t) and words_agree(1, ("Mbar", "M"), (), t):
                if words_agree(-1, WORDS["beta"] * 3, (), t):
                    pairs.append(t)
    found = {}
    for t in pairs:
        Ns = [N for N in n_cands if words_agree(-1, ("I", "IIbar", "M"), ("N", "Ibar", "II"), {**t, "N": N})]
        Nbs = [Nb for Nb in n_cands if words_agree(1, ("Ibar", "II", "Mbar"), ("Nbar", "I", "IIbar"), {**t, "Nbar": Nb})]
        for N in Ns:
            for Nb in Nbs:
                full = {**t, "N": N, "Nbar": Nb}
                if not all(relation_report(full).values()):
                    continue
                if not pi_minus_check(random.Random(1), full)["(alpha.beta)^3"]:
                    continue
                ok = True
                for desc, circuits, expected in circuit_cases:
                    try:
                        got = fuse_graph(desc, generating_moves(desc, circuits), full)
                        got.check()
                    except Exception:
                        ok = False
                        break
                    if got.wb != expected.wb or not spin_equal(got, expected):
                        ok = False
                        break
                if ok:
                    key = tuple(canonical_decoration(full[k]) for k in ("M", "Mbar", "N", "Nbar"))
                    found.setdefault(key, {k: full[k] for k in ("M", "Mbar", "N", "Nbar")})
    return list(found.values())
