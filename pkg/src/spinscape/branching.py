"""Branchings on tetrahedra, pre-branchings of the gluing graph, weak branchings.

A branching of a tetrahedron is stored as its vertex order ``(v0, v1, v2, v3)``:
``order[j]`` is the tetrahedron vertex receiving ``j`` incoming edges, so every
edge points from the lower position to the higher one.  The face opposite
``v_k`` is the germ with position ``k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

from .triangulation import (
    ABSTRACT_EDGES,
    GluingGraph,
    Triangulation,
    face_vertices,
    perm_inverse,
    perm_sign,
)

IN, OUT = "in", "out"


class BranchingError(ValueError):
    pass


class GuardExceeded(RuntimeError):
    """An exhaustive search was asked to exceed its configured size guard."""


@dataclass(frozen=True)
class TetBranching:
    order: tuple[int, int, int, int]

    def __post_init__(self):
        if sorted(self.order) != [0, 1, 2, 3]:
            raise BranchingError(f"not a vertex order: {self.order}")

    @property
    def index(self) -> int:
        return perm_sign(self.order)

    @cached_property
    def position(self) -> tuple[int, int, int, int]:
        """``position[v]`` is the number of edges pointing to tetrahedron vertex ``v``."""
        return perm_inverse(self.order)  # type: ignore[return-value]

    def edge_direction(self, a: int, b: int) -> int:
        """+1 if the edge between vertices a and b points from a to b."""
        return 1 if self.position[a] < self.position[b] else -1

    def edge_type(self, a: int, b: int) -> tuple[int, int]:
        """The positions ``(i, j)``, ``i < j``, so the edge is of type ``v_i v_j``."""
        i, j = sorted((self.position[a], self.position[b]))
        return i, j

    def face_labels(self, f: int) -> dict[int, int]:
        """Label 0, 1, 2 of each vertex of face ``f``: its incoming-edge count inside the face."""
        verts = sorted(face_vertices(f), key=lambda v: self.position[v])
        return {v: k for k, v in enumerate(verts)}

    def face_position(self, f: int) -> int:
        return self.position[f]

    @property
    def out_faces(self) -> frozenset[int]:
        return OUT_FACES[self.order]

    def pattern(self) -> dict[int, str]:
        return {f: (OUT if f in self.out_faces else IN) for f in range(4)}

    def has_cycle_face(self) -> bool:
        # a total order never produces a cyclic face; kept as an audit
        for f in range(4):
            a, b, c = face_vertices(f)
            d = [self.edge_direction(a, b), self.edge_direction(b, c), self.edge_direction(c, a)]
            if len(set(d)) == 1:
                return True
        return False

    def __str__(self) -> str:
        return " ".join(map(str, self.order))


def _transversal_out_positions(index: int) -> frozenset[int]:
    # germ at the face opposite v_k points out iff index * (-1)^k == +1
    return frozenset(k for k in range(4) if index * (-1) ** k == 1)


def derive_out_faces() -> dict[tuple[int, ...], frozenset[int]]:
    table = {}
    for order in itertools.permutations(range(4)):
        idx = perm_sign(order)
        table[order] = frozenset(order[k] for k in _transversal_out_positions(idx))
    return table


# Frozen transversality table (order -> faces whose gluing-graph germ points outward).
# Regenerated by derive_out_faces and compared in the bootstrap tests.
FROZEN_OUT_FACES: dict[tuple[int, ...], tuple[int, int]] = {
    (0, 1, 2, 3): (0, 2), (0, 1, 3, 2): (1, 2), (0, 2, 1, 3): (2, 3), (0, 2, 3, 1): (0, 3),
    (0, 3, 1, 2): (0, 1), (0, 3, 2, 1): (1, 3), (1, 0, 2, 3): (0, 3), (1, 0, 3, 2): (1, 3),
    (1, 2, 0, 3): (0, 1), (1, 2, 3, 0): (0, 2), (1, 3, 0, 2): (2, 3), (1, 3, 2, 0): (1, 2),
    (2, 0, 1, 3): (1, 2), (2, 0, 3, 1): (0, 1), (2, 1, 0, 3): (1, 3), (2, 1, 3, 0): (2, 3),
    (2, 3, 0, 1): (0, 2), (2, 3, 1, 0): (0, 3), (3, 0, 1, 2): (0, 2), (3, 0, 2, 1): (2, 3),
    (3, 1, 0, 2): (0, 3), (3, 1, 2, 0): (0, 1), (3, 2, 0, 1): (1, 2), (3, 2, 1, 0): (1, 3),
}
OUT_FACES: dict[tuple[int, ...], frozenset[int]] = {o: frozenset(f) for o, f in FROZEN_OUT_FACES.items()}


def enumerate_tet_branchings() -> list[TetBranching]:
    return [TetBranching(p) for p in itertools.permutations(range(4))]  # type: ignore[arg-type]


def balanced(pattern: Mapping[int, str]) -> bool:
    return sorted(pattern.values()) == [IN, IN, OUT, OUT] and set(pattern) == {0, 1, 2, 3}


def compatible_tet_branchings(pattern: Mapping[int, str]) -> list[TetBranching]:
    """All branchings whose transversal in/out pattern equals ``pattern``."""
    if not balanced(pattern):
        raise BranchingError(f"pattern must have two 'in' and two 'out' germs: {dict(pattern)}")
    outs = frozenset(f for f, d in pattern.items() if d == OUT)
    return [b for b in enumerate_tet_branchings() if b.out_faces == outs]


# -- pre-branchings ---------------------------------------------------------


@dataclass(frozen=True)
class PreBranching:
    """Direction per gluing-graph edge: 0 means source germ -> target germ."""

    directions: tuple[int, ...]

    def tail(self, tri: Triangulation, edge: int) -> tuple[int, int]:
        p = tri.pairings[edge]
        return p.source if self.directions[edge] == 0 else p.target

    def head(self, tri: Triangulation, edge: int) -> tuple[int, int]:
        p = tri.pairings[edge]
        return p.target if self.directions[edge] == 0 else p.source

    def pattern(self, tri: Triangulation, t: int) -> dict[int, str]:
        out = {}
        for f in range(4):
            e = tri.pairing_index(t, f)
            out[f] = OUT if self.tail(tri, e) == (t, f) else IN
        return out

    def reversed_on(self, edges: Sequence[int]) -> "PreBranching":
        d = list(self.directions)
        for e in edges:
            d[e] ^= 1
        return PreBranching(tuple(d))

    def to_text(self) -> str:
        return "".join(f"edge {i} dir {d}\n" for i, d in enumerate(self.directions))


def audit_pre_branching(graph: GluingGraph, directions: Sequence[int]) -> bool:
    """True iff every vertex has exactly two outgoing and two incoming germs."""
    outs = [0] * graph.n_vertices
    ins = [0] * graph.n_vertices
    for (a, b), d in zip(graph.edges, directions):
        tail, head = (a, b) if d == 0 else (b, a)
        outs[tail[0]] += 1
        ins[head[0]] += 1
    return all(o == 2 and i == 2 for o, i in zip(outs, ins))


def find_pre_branching(graph: GluingGraph) -> PreBranching:
    """Orient the edges along an Eulerian circuit (Hierholzer, canonical edge order)."""
    incident: dict[int, list[tuple[int, int]]] = {v: [] for v in range(graph.n_vertices)}
    for idx, ((a, _), (b, _)) in enumerate(graph.edges):
        incident[a].append((idx, 0))
        incident[b].append((idx, 1))
    used = [False] * len(graph.edges)
    directions = [0] * len(graph.edges)
    pointer = {v: 0 for v in incident}
    # iterative Hierholzer; the direction of each edge is the traversal direction
    stack: list[int] = [graph.edges[0][0][0]] if graph.edges else []
    while stack:
        v = stack[-1]
        lst = incident[v]
        while pointer[v] < len(lst) and used[lst[pointer[v]][0]]:
            pointer[v] += 1
        if pointer[v] == len(lst):
            stack.pop()
            continue
        idx, end = lst[pointer[v]]
        used[idx] = True
        a, b = graph.edges[idx]
        # leaving v through end `end`: end 0 is the source germ
        directions[idx] = 0 if end == 0 else 1
        stack.append(b[0] if end == 0 else a[0])
    if not all(used) or not audit_pre_branching(graph, directions):
        raise BranchingError("graph is not connected and 4-valent")
    return PreBranching(tuple(directions))


def enumerate_pre_branchings(graph: GluingGraph, guard: int = 20) -> list[PreBranching]:
    m = len(graph.edges)
    if m > guard:
        raise GuardExceeded(f"{m} gluing-graph edges exceed the guard of {guard}")
    return [
        PreBranching(d)
        for d in itertools.product((0, 1), repeat=m)
        if audit_pre_branching(graph, d)
    ]


# -- edge types -------------------------------------------------------------

EMPTY, PLUS, MINUS = 0, 1, -1
ODD = None


def label_permutation(tri: Triangulation, omega: PreBranching, branchings: Sequence[TetBranching], edge: int) -> tuple[int, int, int]:
    """Bijection of labels {0,1,2}: tail-germ label j is glued to head-germ label sigma[j]."""
    t, f = omega.tail(tri, edge)
    t2, perm = tri.neighbour(t, f)
    tail_labels = branchings[t].face_labels(f)
    head_labels = branchings[t2].face_labels(perm[f])
    sigma = [0, 0, 0]
    for v, j in tail_labels.items():
        sigma[j] = head_labels[perm[v]]
    return tuple(sigma)  # type: ignore[return-value]


PERM_TO_TYPE = {(0, 1, 2): EMPTY, (1, 2, 0): PLUS, (2, 0, 1): MINUS}


def edge_type_of_permutation(sigma: Sequence[int]):
    """identity -> EMPTY, (012) -> PLUS, (021) -> MINUS, odd permutations -> ODD."""
    return PERM_TO_TYPE.get(tuple(sigma), ODD)


def classify_edge_type(tri: Triangulation, omega: PreBranching, branchings: Sequence[TetBranching], edge: int):
    return edge_type_of_permutation(label_permutation(tri, omega, branchings, edge))


def type_symbol(t) -> str:
    return {EMPTY: "0", PLUS: "+1", MINUS: "-1", ODD: "odd"}[t]


# -- weak branchings --------------------------------------------------------


@dataclass(frozen=True)
class WeakBranching:
    omega: PreBranching
    branchings: tuple[TetBranching, ...]

    def edge_types(self, tri: Triangulation) -> tuple:
        return tuple(classify_edge_type(tri, self.omega, self.branchings, e) for e in range(len(tri.pairings)))

    def indices(self) -> tuple[int, ...]:
        return tuple(b.index for b in self.branchings)

    def to_text(self) -> str:
        return "".join(f"tet {t} order {b}\n" for t, b in enumerate(self.branchings))


def is_weak_branching(tri: Triangulation, omega: PreBranching, branchings: Sequence[TetBranching]) -> bool:
    for t, b in enumerate(branchings):
        if b.pattern() != omega.pattern(tri, t):
            return False
    return all(
        classify_edge_type(tri, omega, branchings, e) is not ODD for e in range(len(tri.pairings))
    )


def _weak_search(tri: Triangulation, omega: PreBranching) -> Iterator[tuple[TetBranching, ...]]:
    options = [compatible_tet_branchings(omega.pattern(tri, t)) for t in range(tri.n)]
    # gluing-graph edges checkable once both ends are assigned
    ready: dict[int, list[int]] = {t: [] for t in range(tri.n)}
    for e, p in enumerate(tri.pairings):
        ready[max(p.source[0], p.target[0])].append(e)
    chosen: list[TetBranching] = []

    def rec(t: int):
        if t == tri.n:
            yield tuple(chosen)
            return
        for b in options[t]:
            chosen.append(b)
            partial = chosen + [b] * (tri.n - len(chosen))
            if all(classify_edge_type(tri, omega, partial, e) is not ODD for e in ready[t]):
                yield from rec(t + 1)
            chosen.pop()

    yield from rec(0)


def find_weak_branching(tri: Triangulation, omega: PreBranching) -> WeakBranching | None:
    """First compatible weak branching in search order, or None after exhausting 4^n choices."""
    for sol in _weak_search(tri, omega):
        return WeakBranching(omega, sol)
    return None


def enumerate_weak_branchings(tri: Triangulation, omega: PreBranching) -> list[WeakBranching]:
    return [WeakBranching(omega, sol) for sol in _weak_search(tri, omega)]


def enumerate_decorations(tri: Triangulation, guard: int = 20) -> Iterator[WeakBranching]:
    """Every (omega, b) pair on ``tri``."""
    for omega in enumerate_pre_branchings(tri.gluing_graph(), guard):
        yield from (WeakBranching(omega, sol) for sol in _weak_search(tri, omega))


# -- Z/2-taut structures ----------------------------------------------------


@dataclass(frozen=True)
class TautStructure:
    """Sign per abstract edge ``(tet, (a, b))``; -1 exactly on the v0v2 and v1v3 edges."""

    signs: Mapping[tuple[int, tuple[int, int]], int]

    def negative_edges(self) -> frozenset[tuple[int, tuple[int, int]]]:
        return frozenset(k for k, s in self.signs.items() if s == -1)


def diagonal_edges(b: TetBranching) -> list[tuple[int, int]]:
    """The two abstract edges of type v0v2 and v1v3, as sorted vertex pairs."""
    return [tuple(sorted((b.order[0], b.order[2]))), tuple(sorted((b.order[1], b.order[3])))]  # type: ignore[misc]


def z2_taut(tri: Triangulation, wb: WeakBranching, *, cross_check: bool = True) -> TautStructure:
    signs = {}
    for t, b in enumerate(wb.branchings):
        diag = set(diagonal_edges(b))
        for ab in ABSTRACT_EDGES:
            signs[(t, ab)] = -1 if ab in diag else 1
    for ec in tri.edge_classes:
        negatives = sum(1 for t, ab, _ in ec.fiber if signs[(t, ab)] == -1)
        if negatives % 2:
            raise AssertionError(f"edge class {ec.id} has {negatives} negative abstract edges")
    taut = TautStructure(signs)
    if cross_check:
        for other in enumerate_weak_branchings(tri, wb.omega):
            if other != wb:
                if z2_taut(tri, other, cross_check=False).negative_edges() != taut.negative_edges():
                    raise AssertionError("negative edge set depends on the weak branching")
                break
    return taut


# -- global branchings ------------------------------------------------------


@dataclass(frozen=True)
class BranchabilityReport:
    branchable: bool | None
    witness: tuple[TetBranching, ...] | None
    refuted: int
    total: int


def _matched_all(tri: Triangulation, branchings: Sequence[TetBranching], edge: int) -> bool:
    p = tri.pairings[edge]
    t, f = p.source
    t2 = p.target[0]
    perm = p.perm
    b1, b2 = branchings[t], branchings[t2]
    return all(
        b1.edge_direction(a, c) == b2.edge_direction(perm[a], perm[c])
        for a, c in itertools.combinations(face_vertices(f), 2)
    )


def global_branching_exists(tri: Triangulation, guard: int = 6) -> BranchabilityReport:
    """Exhaustive backtracking over the 24^n branching assignments.

    ``refuted`` counts complete assignments excluded (a pruned partial
    assignment refutes all its completions).
    """
    total = 24 ** tri.n
    if tri.n > guard:
        return BranchabilityReport(None, None, 0, total)
    all_b = enumerate_tet_branchings()
    ready: dict[int, list[int]] = {t: [] for t in range(tri.n)}
    for e, p in enumerate(tri.pairings):
        ready[max(p.source[0], p.target[0])].append(e)
    chosen: list[TetBranching] = []
    refuted = 0

    def rec(t: int):
        nonlocal refuted
        if t == tri.n:
            return tuple(chosen)
        for b in all_b:
            chosen.append(b)
            if all(_matched_all(tri, chosen, e) for e in ready[t]):
                found = rec(t + 1)
                if found:
                    return found
            else:
                refuted += 24 ** (tri.n - t - 1)
            chosen.pop()
        return None

    witness = rec(0)
    if witness is not None:
        return BranchabilityReport(True, witness, refuted, total)
    return BranchabilityReport(False, None, refuted, total)


def induced_pre_branching(tri: Triangulation, branchings: Sequence[TetBranching]) -> PreBranching:
    """The pre-branching carried by a global branching (all gluings of type EMPTY)."""
    dirs = []
    for p in tri.pairings:
        t, f = p.source
        dirs.append(0 if f in branchings[t].out_faces else 1)
    return PreBranching(tuple(dirs))
