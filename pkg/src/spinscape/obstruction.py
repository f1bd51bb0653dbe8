"""The obstruction 1-chain of a weakly branched triangulation and the spin structures it carries.

Three independent evaluations are provided:

* :func:`alpha_bar` works on abstract edges of the triangulation (fiber signs
  from the edge classes, matched orientations across gluings);
* :func:`alpha_spine` walks the attaching circle of every region of the dual
  spine and reads contributions off region labels;
* :func:`alpha_split_first_method` / :func:`alpha_split_second_method` do the
  same walk on a graph whose edges were split into multiply coloured pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import algebra as alg
from .branching import (
    EMPTY,
    MINUS,
    PLUS,
    ODD,
    WeakBranching,
    classify_edge_type,
    label_permutation,
)
from .gf2 import GF2Vector, boundary_matrix, homology_rank, in_span
from .triangulation import Triangulation, face_vertices, perm_sign


class ObstructionError(RuntimeError):
    """A parity audit failed; this signals a bug, not bad input."""


class ObstructionNotBoundary(RuntimeError):
    """The obstruction chain is not a boundary."""


@dataclass(frozen=True)
class EdgeLedger:
    """Unreduced G-valued contributions to one edge class (doubled integers mod 4)."""

    initial: int
    first_type: tuple[int, ...]
    second_type: tuple[int, ...]

    @property
    def first_sum(self) -> int:
        return sum(self.first_type) % 4

    @property
    def second_sum(self) -> int:
        return sum(self.second_type) % 4

    @property
    def total(self) -> int:
        return (self.initial + self.first_sum + self.second_sum) % 4

    def value(self) -> int:
        return alg.g_to_z2(self.total)


@dataclass(frozen=True)
class ObstructionChain:
    ledgers: tuple[EdgeLedger, ...]

    @property
    def chain(self) -> GF2Vector:
        return GF2Vector.from_support(1, len(self.ledgers), [i for i, l in enumerate(self.ledgers) if l.value()])

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(l.value() for l in self.ledgers)

    def audit(self) -> None:
        for i, l in enumerate(self.ledgers):
            if not (alg.g_is_integral(l.first_sum) and alg.g_is_integral(l.second_sum)):
                raise ObstructionError(
                    f"edge {i}: contributions {alg.g_format(l.first_sum)} / {alg.g_format(l.second_sum)} not in Z/2"
                )

    def to_json(self) -> list[dict]:
        return [
            {
                "edge": i,
                "first_type": [alg.g_format(x) for x in l.first_type],
                "second_type": [alg.g_format(x) for x in l.second_type],
                "value": l.value(),
            }
            for i, l in enumerate(self.ledgers)
        ]


def is_diagonal(i: int, j: int) -> bool:
    """Positions (i, j) of type v0v2 or v1v3."""
    return (i, j) in ((0, 2), (1, 3))


def alpha_bar(tri: Triangulation, wb: WeakBranching) -> ObstructionChain:
    """Evaluate the obstruction chain edge class by edge class."""
    b = wb.branchings
    first: list[list[int]] = [[] for _ in tri.edge_classes]
    second: list[list[int]] = [[] for _ in tri.edge_classes]
    for ec in tri.edge_classes:
        for t, (u, v), sign in ec.fiber:
            if is_diagonal(*b[t].edge_type(u, v)):
                agree = sign * b[t].edge_direction(u, v)
                first[ec.id].append(alg.HALF if agree == 1 else alg.MINUS_HALF)
    for e, p in enumerate(tri.pairings):
        kind = classify_edge_type(tri, wb.omega, b, e)
        if kind is ODD:
            raise ObstructionError(f"gluing {e} has an odd label permutation")
        t, f = p.source
        t2 = p.target[0]
        perm = p.perm
        verts = face_vertices(f)
        for i, j in ((0, 1), (0, 2), (1, 2)):
            x, y = verts[i], verts[j]
            cls = tri.edge_lookup[(t, (x, y))][0]
            if kind == EMPTY:
                second[cls].append(0)
            elif b[t].edge_direction(x, y) == b[t2].edge_direction(perm[x], perm[y]):
                second[cls].append(alg.ONE)
            else:
                second[cls].append(alg.MINUS_HALF if kind == PLUS else alg.HALF)
    chain = ObstructionChain(
        tuple(EdgeLedger(alg.ONE, tuple(first[i]), tuple(second[i])) for i in range(len(tri.edge_classes)))
    )
    chain.audit()
    return chain


# -- dual spine: attaching circles of regions --------------------------------


@dataclass(frozen=True)
class Passage:
    """One step of a region's attaching circle: a wing at a vertex, then a gluing-graph edge."""

    tet: int
    edge: tuple[int, int]  # abstract edge, oriented along the walk's rotation axis
    exit_face: int
    pairing: int


@dataclass(frozen=True)
class RegionBoundary:
    region: int
    passages: tuple[Passage, ...]

    def multiplicity(self, pairing: int) -> int:
        return sum(1 for p in self.passages if p.pairing == pairing)


def region_boundary(tri: Triangulation, region: int) -> RegionBoundary:
    """Walk once around the edge class ``region`` rotating positively about its reference orientation."""
    t0, (a0, b0) = tri.edge_classes[region].reference
    t, a, b = t0, a0, b0
    passages = []
    while True:
        c, d = (x for x in range(4) if x not in (a, b))
        if perm_sign((a, b, c, d)) != 1:
            c, d = d, c
        # (a, b, c, d) is positively ordered: leave through the face opposite d
        passages.append(Passage(t, (a, b), d, tri.pairing_index(t, d)))
        t2, perm = tri.neighbour(t, d)
        t, a, b = t2, perm[a], perm[b]
        if (t, a, b) == (t0, a0, b0):
            break
        if len(passages) > 6 * tri.n:
            raise ObstructionError(f"attaching circle of region {region} does not close")
    return RegionBoundary(region, tuple(passages))


def region_label(b, face: int, edge: tuple[int, int]) -> int:
    """Label of the region germ at ``face`` containing the face-edge ``edge``."""
    (opposite,) = (v for v in face_vertices(face) if v not in edge)
    return b.face_labels(face)[opposite]


def even_color_contribution(color: int, tail_label: int) -> int:
    """G-contribution of an even coloured edge to the strand with label ``tail_label`` at its tail."""
    if color == EMPTY:
        return 0
    if color == PLUS:
        return alg.ONE if tail_label == 2 else alg.MINUS_HALF
    return alg.ONE if tail_label == 0 else alg.HALF


EdgeStrandRule = Callable[[int, int], int]


def arrow_contribution(b, edge: tuple[int, int]) -> int:
    """Arrow of a sink/source wing, read against the positively rotating attaching circle."""
    return alg.HALF if b.edge_direction(*edge) == 1 else alg.MINUS_HALF


def strand_at_tail(tri: Triangulation, wb: WeakBranching, passage: Passage) -> int:
    """Label, at the tail germ of the crossed edge, of the strand a passage follows."""
    t, f = passage.tet, passage.exit_face
    e = passage.pairing
    tail = wb.omega.tail(tri, e)
    if tail == (t, f):
        return region_label(wb.branchings[t], f, passage.edge)
    t2, perm = tri.neighbour(t, f)
    return region_label(wb.branchings[t2], perm[f], (perm[passage.edge[0]], perm[passage.edge[1]]))


def alpha_spine(
    tri: Triangulation,
    wb: WeakBranching,
    edge_rule: EdgeStrandRule | None = None,
) -> ObstructionChain:
    """Evaluate the obstruction region by region along attaching circles.

    ``edge_rule(pairing, tail_label)`` overrides the contribution of a gluing-graph
    edge to a strand; by default it is read from the edge colour.
    """
    b = wb.branchings
    colors = [classify_edge_type(tri, wb.omega, b, e) for e in range(len(tri.pairings))]
    if edge_rule is None:
        edge_rule = lambda e, j: even_color_contribution(colors[e], j)  # noqa: E731
    ledgers = []
    for r in range(len(tri.edge_classes)):
        walk = region_boundary(tri, r)
        arrows = []
        edges = []
        for step in walk.passages:
            if is_diagonal(*b[step.tet].edge_type(*step.edge)):
                arrows.append(arrow_contribution(b[step.tet], step.edge))
            edges.append(edge_rule(step.pairing, strand_at_tail(tri, wb, step)))
        ledgers.append(EdgeLedger(alg.ONE, tuple(arrows), tuple(edges)))
    chain = ObstructionChain(tuple(ledgers))
    chain.audit()
    return chain


def alpha_fundamental(tri: Triangulation, wb: WeakBranching) -> int:
    """The obstruction evaluated on the sum of all regions."""
    return sum(alpha_bar(tri, wb).values) % 2


# -- split-edge methods -----------------------------------------------------

# Odd sub-edge contributions, keyed by the transposition and by whether the two
# end orientations converge toward the sub-edge (True) or diverge from it.
ODD_SUBEDGE_TABLE: Mapping[tuple[alg.Perm3, bool], alg.GVec] = {
    (alg.SWAP_01, True): (alg.HALF, alg.HALF, 0),
    (alg.SWAP_02, True): (alg.ONE, alg.ONE, alg.ONE),
    (alg.SWAP_12, True): (0, alg.MINUS_HALF, alg.MINUS_HALF),
    (alg.SWAP_01, False): (alg.MINUS_HALF, alg.MINUS_HALF, 0),
    (alg.SWAP_02, False): (alg.ONE, alg.ONE, alg.ONE),
    (alg.SWAP_12, False): (0, alg.HALF, alg.HALF),
}


def _even_subedge_contribution(sub, left_label: int) -> int:
    # the colour of an even piece is read from its own first end
    if sub.left == "r":
        return even_color_contribution(_type_of(sub.matching), left_label)
    sigma = alg.inverse(sub.matching)
    return even_color_contribution(_type_of(sigma), sub.matching[left_label])


def _type_of(sigma) -> int:
    return {alg.IDENTITY: EMPTY, alg.CYCLE_012: PLUS, alg.CYCLE_021: MINUS}[tuple(sigma)]


def first_method_strand_weights(chain: Sequence) -> alg.GVec:
    """Per tail-label contributions of a split edge by the first method."""
    total = [0, 0, 0]
    for j in range(3):
        label = j
        for sub in chain:
            if sub.is_even:
                total[j] += _even_subedge_contribution(sub, label)
            else:
                converging = sub.left == "r"
                total[j] += ODD_SUBEDGE_TABLE[(sub.matching, converging)][label]
            label = sub.matching[label]
    return tuple(x % 4 for x in total)  # type: ignore[return-value]


def second_method_strand_weights(chain: Sequence, table=alg.SECTION_TABLE) -> alg.GVec:
    """Per tail-label contributions of a split edge by the second method.

    Every piece contributes ``s`` of its colour when its internal orientation
    agrees with the edge's, ``s`` of the inverse colour otherwise, attached at
    the piece's left end.
    """
    total = [0, 0, 0]
    for j in range(3):
        label = j
        for sub in chain:
            eta = sub.color
            h = table[eta] if sub.internal == "R" else table[alg.inverse(eta)]
            total[j] += h[label]
            label = sub.matching[label]
    return tuple(x % 4 for x in total)  # type: ignore[return-value]


def _split_rule(tri, wb, chains, method) -> EdgeStrandRule:
    colors = [classify_edge_type(tri, wb.omega, wb.branchings, e) for e in range(len(tri.pairings))]
    cache: dict[int, alg.GVec] = {}

    def rule(e: int, j: int) -> int:
        if e not in chains:
            return even_color_contribution(colors[e], j)
        if e not in cache:
            cache[e] = method(chains[e])
        return cache[e][j]

    return rule


def check_split_chains(tri: Triangulation, wb: WeakBranching, chains: Mapping[int, Sequence]) -> None:
    from .calculus import fuse_chain_unweighted

    for e, chain in chains.items():
        sigma = label_permutation(tri, wb.omega, wb.branchings, e)
        fused = fuse_chain_unweighted(chain)
        if fused.matching != sigma or fused.left != "r" or fused.right != "r":
            raise ValueError(f"split of edge {e} does not fuse back to its colour")


def alpha_split_first_method(tri: Triangulation, wb: WeakBranching, chains: Mapping[int, Sequence]) -> ObstructionChain:
    check_split_chains(tri, wb, chains)
    return alpha_spine(tri, wb, _split_rule(tri, wb, chains, first_method_strand_weights))


def alpha_split_second_method(tri: Triangulation, wb: WeakBranching, chains: Mapping[int, Sequence]) -> ObstructionChain:
    check_split_chains(tri, wb, chains)
    return alpha_spine(tri, wb, _split_rule(tri, wb, chains, second_method_strand_weights))


# -- spin structures --------------------------------------------------------


@dataclass(frozen=True)
class SpinDescriptor:
    tri: Triangulation
    wb: WeakBranching
    beta: GF2Vector

    def check(self) -> None:
        d2 = boundary_matrix(self.tri, 2)
        if d2.matvec(self.beta.bits) != alpha_bar(self.tri, self.wb).chain.bits:
            raise ObstructionError("descriptor does not bound the obstruction")


@dataclass(frozen=True)
class SpinClasses:
    particular: SpinDescriptor
    representatives: tuple[SpinDescriptor, ...]
    homology_rank: int
    cycle_basis: tuple[int, ...] = field(default=())

    @property
    def count(self) -> int:
        return len(self.representatives)


def _cycle_class_basis(tri: Triangulation) -> list[int]:
    """2-cycles whose classes form a basis of H_2(T; Z/2)."""
    d2 = boundary_matrix(tri, 2)
    d3 = boundary_matrix(tri, 3)
    span = [d3.column(j) for j in range(d3.ncols)]
    basis = []
    for z in d2.kernel():
        if not in_span(span + basis, z):
            basis.append(z)
    return basis


def solve_spin(tri: Triangulation, wb: WeakBranching) -> SpinClasses:
    """All spin structures carried by (T, omega, b): one 2-chain per homology class."""
    alpha = alpha_bar(tri, wb).chain
    d2 = boundary_matrix(tri, 2)
    sol = d2.solve(alpha.bits)
    if not sol.feasible:
        raise ObstructionNotBoundary("the obstruction chain is not a boundary")
    nf = len(tri.pairings)
    basis = _cycle_class_basis(tri)
    reps = []
    for mask in range(1 << len(basis)):
        x = sol.particular
        for i, z in enumerate(basis):
            if (mask >> i) & 1:
                x ^= z
        reps.append(SpinDescriptor(tri, wb, GF2Vector(2, nf, x)))
    rank = homology_rank(tri, 2)
    if rank != len(basis):
        raise ObstructionError("cycle basis size disagrees with the homology rank")
    return SpinClasses(reps[0], tuple(reps), rank, tuple(basis))


def spin_equal(d0: SpinDescriptor, d1: SpinDescriptor) -> bool:
    """True iff the two descriptors, over the same (T, omega, b), carry the same spin structure."""
    if d0.tri != d1.tri or d0.wb != d1.wb:
        raise ValueError("descriptors have different base data")
    diff = (d0.beta + d1.beta).bits
    d3 = boundary_matrix(d0.tri, 3)
    if d3.solve(diff).feasible:
        return True
    if boundary_matrix(d0.tri, 2).matvec(diff):
        raise ValueError("difference of descriptors is not a cycle")
    return False
