"""Spin-preserving moves on decorated triangulations (T, omega, b, beta).

Every move returns a :class:`MoveInstance` holding the descriptor before and
after and the faces whose weight changed.  The universal certificate is
``alpha(after) - alpha(before) == boundary(delta_beta)``; it is checked on
construction unless explicitly disabled.

Vertex orders are rewritten by position permutations:

* ``I`` / ``II`` (index -1 -> +1): cyclic shift by +1 / -1,
* ``Ibar`` / ``IIbar`` (index +1 -> -1): cyclic shift by -1 / +1,
* ``III``: shift by 2 (index preserved),
* circuit moves: swap positions 2,3 (overcircuit) or 0,1 (undercircuit).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .branching import (
    IN,
    OUT,
    PreBranching,
    TetBranching,
    WeakBranching,
    classify_edge_type,
    is_weak_branching,
    EMPTY,
    PLUS,
    MINUS,
)
from .calculus import DecoratedGraph, graph_of
from .gf2 import GF2Vector, boundary_matrix
from .obstruction import SpinDescriptor, alpha_bar, solve_spin, spin_equal
from .triangulation import Triangulation, face_vertices, validate


class MoveError(ValueError):
    """A move was requested at a site where it does not apply."""


class CertificateFailure(AssertionError):
    """The change of the obstruction is not the boundary of the weight change."""


# -- descriptor helpers -----------------------------------------------------


def zero_beta(tri: Triangulation) -> GF2Vector:
    return GF2Vector.zero(2, len(tri.pairings))


def descriptor_for(tri: Triangulation, wb: WeakBranching, which: int = 0) -> SpinDescriptor:
    return solve_spin(tri, wb).representatives[which]


def certificate_holds(before: SpinDescriptor, after: SpinDescriptor) -> bool:
    """``Delta alpha == boundary(Delta beta)`` for two descriptors over the same T."""
    if before.tri != after.tri:
        raise ValueError("certificate compares descriptors on one triangulation")
    d2 = boundary_matrix(after.tri, 2)
    da = alpha_bar(before.tri, before.wb).chain.bits ^ alpha_bar(after.tri, after.wb).chain.bits
    return d2.matvec(before.beta.bits ^ after.beta.bits) == da


def structural_certificate(inst: "MoveInstance") -> bool:
    """Both descriptors are spin structures and the local weights are the ones applied."""
    for d in (inst.before, inst.after):
        d2 = boundary_matrix(d.tri, 2)
        if d2.matvec(d.beta.bits) != alpha_bar(d.tri, d.wb).chain.bits:
            return False
    return inst.structure is None or inst.structure.descriptor == inst.after


@dataclass(frozen=True)
class MoveInstance:
    kind: str
    target: object
    before: SpinDescriptor
    after: SpinDescriptor
    weighted_faces: tuple[int, ...] = ()
    reversed_edges: tuple[int, ...] = ()
    children: tuple["MoveInstance", ...] = ()
    structure: "StructuralResult | None" = None

    @property
    def graph(self) -> DecoratedGraph:
        return graph_of(self.after.tri, self.after.wb, self.after.beta)

    def certificate(self) -> dict:
        same = self.before.tri == self.after.tri
        return {
            "move": self.kind,
            "target": self.target if isinstance(self.target, (int, list)) else str(self.target),
            "weighted_faces": list(self.weighted_faces),
            "reversed_edges": list(self.reversed_edges),
            "alpha_before": list(alpha_bar(self.before.tri, self.before.wb).values),
            "alpha_after": list(alpha_bar(self.after.tri, self.after.wb).values),
            "certified": certificate_holds(self.before, self.after) if same else structural_certificate(self),
        }


def _finish(kind, target, before: SpinDescriptor, wb: WeakBranching, faces: Iterable[int], reversed_edges=(), check=True) -> MoveInstance:
    tri = before.tri
    bits = before.beta.bits
    for f in faces:
        bits ^= 1 << f
    if not is_weak_branching(tri, wb.omega, wb.branchings):
        raise MoveError(f"{kind} at {target} does not produce a weak branching")
    after = SpinDescriptor(tri, wb, GF2Vector(2, len(tri.pairings), bits))
    faces = tuple(sorted(f for f in set(faces) if list(faces).count(f) % 2))
    inst = MoveInstance(kind, target, before, after, faces, tuple(reversed_edges))
    if check and not certificate_holds(before, after):
        raise CertificateFailure(f"{kind} at {target}: Delta alpha != boundary(Delta beta)")
    return inst


# -- vertex moves -----------------------------------------------------------

SHIFTS = {"I": 1, "II": -1, "Ibar": -1, "IIbar": 1}
REQUIRED_INDEX = {"I": -1, "II": -1, "Ibar": 1, "IIbar": 1}


def shift_order(order: Sequence[int], k: int) -> tuple[int, int, int, int]:
    """Cyclic shift: shift by +1 sends (u0,u1,u2,u3) to (u1,u2,u3,u0)."""
    k %= 4
    return tuple(order[(i + k) % 4] for i in range(4))  # type: ignore[return-value]


def retained_face(order: Sequence[int], k: int) -> int:
    """The face keeping all three edge orientations under a shift by ``k`` = +-1."""
    return order[0] if k % 4 == 1 else order[3]


def _rebranch(wb: WeakBranching, t: int, order: Sequence[int], omega: PreBranching | None = None) -> WeakBranching:
    b = list(wb.branchings)
    b[t] = TetBranching(tuple(order))  # type: ignore[arg-type]
    return WeakBranching(omega or wb.omega, tuple(b))


def vertex_move(desc: SpinDescriptor, t: int, kind: str, check: bool = True) -> MoveInstance:
    """Apply I, II, Ibar, IIbar or III at tetrahedron ``t``."""
    order = desc.wb.branchings[t].order
    index = desc.wb.branchings[t].index
    if kind == "III":
        first = "I" if index == -1 else "Ibar"
        a = vertex_move(desc, t, first, check=False)
        second = "IIbar" if index == -1 else "II"
        b = vertex_move(a.after, t, second, check=False)
        faces = a.weighted_faces + b.weighted_faces
        return _finish("III", t, desc, b.after.wb, faces, check=check)
    if kind not in SHIFTS:
        raise MoveError(f"unknown vertex move {kind!r}")
    if index != REQUIRED_INDEX[kind]:
        raise MoveError(f"{kind} needs index {REQUIRED_INDEX[kind]:+d} at tetrahedron {t}")
    k = SHIFTS[kind]
    face = desc.tri.pairing_index(t, retained_face(order, k))
    wb = _rebranch(desc.wb, t, shift_order(order, k))
    return _finish(kind, t, desc, wb, [face], check=check)


def coboundary(desc: SpinDescriptor, t: int) -> MoveInstance:
    """Add 1 to the weights of the four faces of tetrahedron ``t``."""
    faces = [desc.tri.pairing_index(t, f) for f in range(4)]
    return _finish("coboundary", t, desc, desc.wb, faces)


# -- circuits ---------------------------------------------------------------


def overarc_faces(b: TetBranching) -> tuple[int, int]:
    return b.order[0], b.order[1]


def underarc_faces(b: TetBranching) -> tuple[int, int]:
    return b.order[2], b.order[3]


def _circuit_vertices(desc: SpinDescriptor, edges: Sequence[int], arc: str) -> list[int]:
    """Tetrahedra visited by the closed path ``edges``; checks simplicity and the over/under condition."""
    tri, omega = desc.tri, desc.wb.omega
    if not edges:
        raise MoveError("empty circuit")
    if len(set(edges)) != len(edges):
        raise MoveError("circuit repeats an edge")
    visited = []
    for i, e in enumerate(edges):
        t_head, f_in = omega.head(tri, e)
        t_next, f_out = omega.tail(tri, edges[(i + 1) % len(edges)])
        if t_head != t_next:
            raise MoveError(f"edges {e} and {edges[(i + 1) % len(edges)]} are not consecutive")
        b = desc.wb.branchings[t_head]
        faces = overarc_faces(b) if arc == "over" else underarc_faces(b)
        if {f_in, f_out} != set(faces):
            raise MoveError(f"circuit is not an {arc}arc at tetrahedron {t_head}")
        visited.append(t_head)
    if len(set(visited)) != len(visited):
        raise MoveError("circuit is not simple")
    return visited


def _swap(order: Sequence[int], i: int, j: int) -> tuple[int, int, int, int]:
    o = list(order)
    o[i], o[j] = o[j], o[i]
    return tuple(o)  # type: ignore[return-value]


def distinct_index_edges(desc: SpinDescriptor, edges: Iterable[int]) -> list[int]:
    tri, wb = desc.tri, desc.wb
    out = []
    for e in edges:
        t0 = wb.omega.tail(tri, e)[0]
        t1 = wb.omega.head(tri, e)[0]
        if wb.branchings[t0].index != wb.branchings[t1].index:
            out.append(e)
    return out


def circuit_move(desc: SpinDescriptor, edges: Sequence[int], arc: str = "over", check: bool = True) -> MoveInstance:
    """Reverse a simple circuit that is an overarc (or underarc) at every vertex it visits."""
    return multi_circuit_move(desc, [(tuple(edges), arc)], check=check, kind="circuit")


def multi_circuit_move(
    desc: SpinDescriptor, circuits: Sequence[tuple[Sequence[int], str]], check: bool = True, kind: str = "multi_circuit"
) -> MoveInstance:
    """Reverse several circuits at once; each is uniformly over or uniformly under."""
    orders = [list(b.order) for b in desc.wb.branchings]
    all_edges: list[int] = []
    touched: dict[int, set[str]] = {}
    for edges, arc in circuits:
        if arc not in ("over", "under"):
            raise MoveError(f"a circuit is 'over' or 'under', not {arc!r}")
        for t in _circuit_vertices(desc, edges, arc):
            if arc in touched.setdefault(t, set()):
                raise MoveError(f"two {arc}circuits share tetrahedron {t}")
            touched[t].add(arc)
        all_edges.extend(edges)
    if len(set(all_edges)) != len(all_edges):
        raise MoveError("circuits share an edge")
    for t, arcs in touched.items():
        o = desc.wb.branchings[t].order
        if "over" in arcs:
            o = _swap(o, 2, 3)
        if "under" in arcs:
            o = _swap(o, 0, 1)
        orders[t] = list(o)
    wb = WeakBranching(desc.wb.omega.reversed_on(all_edges), tuple(TetBranching(tuple(o)) for o in orders))  # type: ignore[arg-type]
    faces = distinct_index_edges(desc, all_edges)
    return _finish(kind, [list(c) for c, _ in circuits], desc, wb, faces, all_edges, check=check)


def find_circuits(desc: SpinDescriptor, arc: str = "over") -> list[tuple[int, ...]]:
    """All simple circuits that are an overarc (underarc) at each visited vertex.

    Following an arc through a vertex is deterministic, so each arc-edge lies
    on exactly one such closed path; the simple ones are returned.
    """
    tri, wb = desc.tri, desc.wb
    seen: set[int] = set()
    out = []
    for start in range(len(tri.pairings)):
        if start in seen:
            continue
        path = []
        e = start
        ok = True
        while True:
            t, f_in = wb.omega.head(tri, e)
            faces = overarc_faces(wb.branchings[t]) if arc == "over" else underarc_faces(wb.branchings[t])
            if f_in not in faces:
                ok = False
                break
            path.append(e)
            (f_out,) = [f for f in faces if f != f_in]
            e = tri.pairing_index(t, f_out)
            if wb.omega.tail(tri, e) != (t, f_out):
                ok = False
                break
            if e == start or e in path:
                break
        seen.update(path)
        if not ok or e != start:
            continue
        try:
            _circuit_vertices(desc, path, arc)
        except MoveError:
            continue
        out.append(tuple(path))
    return out




# -- structural moves ---------------------------------------------------------
#
# A local patch of old tetrahedra is described by naming its vertices as
# abstract points; new tetrahedra are label -> point maps.  Faces are matched by
# their point sets, which determines every gluing of the new tetrahedra.  The
# weight change is solved on the abstract patch (where no edges or faces are
# identified) and then pushed into the triangulation.

Point = tuple
Labels = dict  # label -> point


def _point_classes(tri: Triangulation, patch: Sequence[int], through: Iterable[tuple[int, int]]) -> dict[int, Labels]:
    """Name the vertices of the patch tetrahedra, identifying them across the germs in ``through``."""
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, f in through:
        t2, perm = tri.neighbour(t, f)
        for v in face_vertices(f):
            parent[find((t, v))] = find((t2, perm[v]))
    return {t: {v: find((t, v)) for v in range(4)} for t in patch}


def _invert4(p: Sequence[int]) -> tuple[int, int, int, int]:
    inv = [0] * 4
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)  # type: ignore[return-value]


@dataclass
class LocalPatch:
    """The abstract ball where a structural move happens.

    Simplices are point tuples in branching order.  Faces are point sets with
    the global pairing they map to (old pairing for removed faces, new pairing
    for the others).
    """

    old_simplices: list = field(default_factory=list)
    new_simplices: list = field(default_factory=list)
    removed_faces: list = field(default_factory=list)  # (points, old pairing)
    internal_faces: list = field(default_factory=list)  # (points, new pairing)
    boundary_faces: list = field(default_factory=list)  # (points, new pairing)
    point_order: tuple = ()
    fixed: dict = field(default_factory=dict)  # internal face index -> forced weight

    @staticmethod
    def _edges(simplices) -> set:
        return {frozenset(c) for s in simplices for c in itertools.combinations(s, 2)}

    def obstruction_change(self) -> dict:
        """Per local edge of the new patch: the change of the obstruction in G (doubled)."""
        old_edges = self._edges(self.old_simplices) | self._edges(tuple(pts) for pts, _ in self.removed_faces)
        out = {}
        for edge in self._edges(self.new_simplices):
            value = 0 if edge in old_edges else 2
            for sign, simplices in ((1, self.new_simplices), (-1, self.old_simplices)):
                for s in simplices:
                    if edge <= set(s):
                        i, j = sorted(s.index(x) for x in edge)
                        if (i, j) in ((0, 2), (1, 3)):
                            value += sign
            out[edge] = value % 4
        return out

    def solve(self, old_beta: GF2Vector) -> dict[str, list[int]]:
        """Weights on the new faces compensating the change of the obstruction.

        Solutions flipping fewer boundary faces win, then fewer faces overall,
        then the lexicographically least list of faces written as vertex ranks.
        Returns indices into ``internal_faces`` / ``boundary_faces``.
        """
        change = self.obstruction_change()
        for edge, value in change.items():
            if value % 2:
                raise CertificateFailure(f"obstruction change on a local edge is not integral: {sorted(edge)}")
        rhs = {}
        for edge, value in change.items():
            r = value // 2
            for pts, pairing in self.removed_faces:
                if edge <= pts:
                    r ^= old_beta[pairing]
            rhs[edge] = r
        faces = [pts for pts, _ in self.internal_faces] + [pts for pts, _ in self.boundary_faces]
        ni = len(self.internal_faces)
        rank = {x: i for i, x in enumerate(self.point_order)}
        ranks = [tuple(sorted(rank.get(x, -1) for x in pts)) for pts in faces]

        def key(mask):
            chosen = [k for k in range(len(faces)) if (mask >> k) & 1]
            return (sum(1 for k in chosen if k >= ni), len(chosen), sorted((ranks[k], k) for k in chosen))

        solutions = []
        for mask in range(1 << len(faces)):
            if any(((mask >> k) & 1) != v for k, v in self.fixed.items()):
                continue
            if all(
                sum((mask >> k) & 1 for k, pts in enumerate(faces) if edge <= pts) % 2 == r
                for edge, r in rhs.items()
            ):
                solutions.append(mask)
        if not solutions:
            raise CertificateFailure("no local weights compensate the change of the obstruction")
        best = min(solutions, key=key)
        return {
            "internal": [k for k in range(ni) if (best >> k) & 1],
            "boundary": [k - ni for k in range(ni, len(faces)) if (best >> k) & 1],
        }


@dataclass(frozen=True)
class StructuralResult:
    descriptor: SpinDescriptor
    patch: LocalPatch
    local_solution: dict
    germ_map: dict

    @property
    def changed(self) -> tuple[int, ...]:
        """Global pairings whose weight differs from the transported one."""
        bits = 0
        for k in self.local_solution["internal"]:
            bits ^= 1 << self.patch.internal_faces[k][1]
        for k in self.local_solution["boundary"]:
            bits ^= 1 << self.patch.boundary_faces[k][1]
        return tuple(support_of(bits))


def support_of(bits: int) -> list[int]:
    return [i for i in range(bits.bit_length()) if (bits >> i) & 1]


def _omega_from_branchings(tri: Triangulation, branchings: Sequence[TetBranching]) -> PreBranching:
    dirs = []
    for p in tri.pairings:
        s_out = p.source[1] in branchings[p.source[0]].out_faces
        t_out = p.target[1] in branchings[p.target[0]].out_faces
        if s_out == t_out:
            raise MoveError(f"pairing {p.source}-{p.target} gets two {'out' if s_out else 'in'} germs")
        dirs.append(0 if s_out else 1)
    return PreBranching(tuple(dirs))


def assemble(desc: SpinDescriptor, table, orders, germ_map: dict, patch: LocalPatch, new_germs: dict) -> StructuralResult:
    """Build the new descriptor from a gluing table, vertex orders and the surviving-germ map.

    ``new_germs`` maps the faces listed in ``patch`` (by list and index) to a
    germ of the new triangulation; the patch's pairing slots are filled here.
    Surviving pairings keep their weights; the local solution is added on top
    and the global certificate is checked.
    """
    tri, wb = desc.tri, desc.wb
    new_tri = Triangulation.from_gluings(table)
    problems = validate(new_tri)
    if problems:
        raise MoveError("retriangulation is invalid: " + "; ".join(problems))
    branchings = tuple(TetBranching(tuple(o)) for o in orders)
    omega = _omega_from_branchings(new_tri, branchings)
    if not is_weak_branching(new_tri, omega, branchings):
        raise MoveError("retriangulation carries no weak branching")
    for kind in ("internal_faces", "boundary_faces"):
        faces = getattr(patch, kind)
        for k, (pts, _) in enumerate(faces):
            faces[k] = (pts, new_tri.pairing_index(*new_germs[(kind, k)]))
    bits = 0
    for i, p in enumerate(tri.pairings):
        if p.source in germ_map and p.target in germ_map:
            j = new_tri.pairing_index(*germ_map[p.source])
            if omega.tail(new_tri, j) != germ_map[wb.omega.tail(tri, i)]:
                raise MoveError(f"pairing {i} changes direction")
            if desc.beta[i]:
                bits |= 1 << j
    solution = patch.solve(desc.beta)
    for k in solution["internal"]:
        bits ^= 1 << patch.internal_faces[k][1]
    for k in solution["boundary"]:
        bits ^= 1 << patch.boundary_faces[k][1]
    new_wb = WeakBranching(omega, branchings)
    after = SpinDescriptor(new_tri, new_wb, GF2Vector(2, len(new_tri.pairings), bits))
    if boundary_matrix(new_tri, 2).matvec(bits) != alpha_bar(new_tri, new_wb).chain.bits:
        raise CertificateFailure("local weights do not bound the new obstruction")
    return StructuralResult(after, patch, solution, germ_map)


def retriangulate(desc: SpinDescriptor, patch: dict[int, Labels], new_tets: Sequence[Labels], point_order: Sequence[Point], removed: Sequence[int]) -> StructuralResult:
    """Replace the patch tetrahedra by ``new_tets`` (label -> point maps).

    The new tetrahedra reuse the patch slots in increasing order; extra ones
    are appended and surplus slots removed (later tetrahedra shift down).
    ``removed`` lists the old pairings interior to the patch.
    """
    tri, wb = desc.tri, desc.wb
    slots = sorted(patch)
    keep = [t for t in range(tri.n) if t not in patch]
    n_new = len(keep) + len(new_tets)
    dropped = slots[len(new_tets):]
    shift = {t: t - sum(1 for r in dropped if r < t) for t in keep}
    used = set(shift.values())
    index = {}
    for i in range(min(len(new_tets), len(slots))):
        s = slots[i] - sum(1 for r in dropped if r < slots[i])
        index[i] = s
        used.add(s)
    spare = iter(t for t in range(n_new) if t not in used)
    for i in range(len(new_tets)):
        if i not in index:
            index[i] = next(spare)

    def faces_of(labels: Labels):
        return {frozenset(labels[l] for l in range(4) if l != g): g for g in range(4)}

    new_faces = [faces_of(lab) for lab in new_tets]
    old_faces = {t: faces_of(lab) for t, lab in patch.items()}
    old_tab = tri.gluing_table()

    def new_germs_with(pts, exclude=None):
        return [(i, fs[pts]) for i, fs in enumerate(new_faces) if pts in fs and (i, fs[pts]) != exclude]

    local = LocalPatch(
        old_simplices=[tuple(patch[t][v] for v in wb.branchings[t].order) for t in slots],
        removed_faces=[(frozenset(patch[p.source[0]][v] for v in face_vertices(p.source[1])), i) for i, p in enumerate(tri.pairings) if i in removed],
    )
    local_germs: dict = {}
    table: list = [[None] * 4 for _ in range(n_new)]
    germ_map: dict[tuple[int, int], tuple[int, int]] = {}
    for t in keep:
        for f in range(4):
            t2, perm = old_tab[t][f]
            germ_map[(t, f)] = (shift[t], f)
            if t2 not in patch:
                table[shift[t]][f] = (shift[t2], perm)
    seen_internal = set()
    for i, lab in enumerate(new_tets):
        T = index[i]
        for pts, g in new_faces[i].items():
            internal = new_germs_with(pts, exclude=(i, g))
            olds = [(t, fs[pts]) for t, fs in old_faces.items() if pts in fs]
            if internal:
                if len(internal) > 1:
                    raise MoveError("a face is shared by three new tetrahedra")
                j, g2 = internal[0]
                inv_other = {pt: m for m, pt in new_tets[j].items()}
                perm = tuple(g2 if l == g else inv_other[lab[l]] for l in range(4))
                table[T][g] = (index[j], perm)
                if pts not in seen_internal:
                    seen_internal.add(pts)
                    local_germs[("internal_faces", len(local.internal_faces))] = (T, g)
                    local.internal_faces.append((pts, None))
                continue
            if len(olds) != 1:
                raise MoveError("a new boundary face matches no old face")
            t, f = olds[0]
            germ_map[(t, f)] = (T, g)
            local_germs[("boundary_faces", len(local.boundary_faces))] = (T, g)
            local.boundary_faces.append((pts, None))
            old_inv = {pt: l for l, pt in patch[t].items()}
            first = [f if l == g else old_inv[lab[l]] for l in range(4)]  # new label -> old label
            t2, perm_old = old_tab[t][f]
            if t2 not in patch:
                perm = tuple(perm_old[first[l]] for l in range(4))
                table[T][g] = (shift[t2], perm)
                table[shift[t2]][perm[g]] = (T, _invert4(perm))
                continue
            f2 = perm_old[f]
            hits = new_germs_with(frozenset(patch[t2][v] for v in range(4) if v != f2))
            if len(hits) != 1:
                raise MoveError("a gluing inside the patch does not survive the move")
            j, g2 = hits[0]
            inv_other = {pt: m for m, pt in new_tets[j].items()}
            table[T][g] = (index[j], tuple(g2 if l == g else inv_other[patch[t2][perm_old[first[l]]]] for l in range(4)))
    orders: list = [None] * n_new
    for t in keep:
        orders[shift[t]] = wb.branchings[t].order
    for i, lab in enumerate(new_tets):
        inv = {pt: l for l, pt in lab.items()}
        orders[index[i]] = tuple(inv[pt] for pt in point_order if pt in inv)
        local.new_simplices.append(tuple(pt for pt in point_order if pt in inv))
    local.point_order = tuple(point_order)
    return assemble(desc, table, orders, germ_map, local, local_germs)


def total_order(orders: Sequence[Sequence[Point]], tie: Sequence[Point] = ()) -> list[Point]:
    """A total order on the union of several orders; ``tie`` ranks otherwise incomparable points."""
    points: list = []
    for o in orders:
        for x in o:
            if x not in points:
                points.append(x)
    before: dict = {x: set() for x in points}
    for o in orders:
        for i, x in enumerate(o):
            before[x].update(o[:i])
    out: list = []
    rank = {x: i for i, x in enumerate(tie)}
    while len(out) < len(points):
        ready = [x for x in points if x not in out and before[x] <= set(out)]
        if not ready:
            raise MoveError("the vertex orders of the patch contain a cycle")
        if len(ready) > 1 and not all(x in rank for x in ready):
            raise MoveError("the vertex orders of the patch leave two points incomparable")
        ready.sort(key=lambda x: rank.get(x, 0))
        out.append(ready[0])
    return out


def is_normalized(desc: SpinDescriptor, e: int) -> bool:
    """Distinct ends, colour 0, weight 0, an overpass at both ends and not index +1 -> -1."""
    tri, wb = desc.tri, desc.wb
    (t0, f0), (t1, f1) = wb.omega.tail(tri, e), wb.omega.head(tri, e)
    if t0 == t1 or desc.beta[e]:
        return False
    if classify_edge_type(tri, wb.omega, wb.branchings, e) != EMPTY:
        return False
    if wb.branchings[t0].index == 1 and wb.branchings[t1].index == -1:
        return False
    return f0 in overarc_faces(wb.branchings[t0]) and f1 in overarc_faces(wb.branchings[t1])


def _structural(kind, target, desc, result: StructuralResult) -> MoveInstance:
    return MoveInstance(kind, target, desc, result.descriptor, result.changed, structure=result)


def move_23(desc: SpinDescriptor, e: int, apex_first: str = "tail") -> MoveInstance:
    """Replace the two tetrahedra meeting along face pairing ``e`` by three around a new edge.

    Each new tetrahedron is the tail tetrahedron with one vertex of the common
    face replaced by the head's apex, so it keeps the tail's labels.  When the
    two apexes are incomparable in the merged vertex order, ``apex_first``
    decides which comes first.
    """
    if not is_normalized(desc, e):
        raise MoveError(f"face pairing {e} is not in normalized position")
    tri, wb = desc.tri, desc.wb
    (t0, f0), (t1, f1) = wb.omega.tail(tri, e), wb.omega.head(tri, e)
    pts = _point_classes(tri, (t0, t1), [(t0, f0)])
    p, q = pts[t0][f0], pts[t1][f1]
    new = []
    for x in face_vertices(f0):
        lab = dict(pts[t0])
        lab[x] = q
        new.append(lab)
    orders = [[pts[t][v] for v in wb.branchings[t].order] for t in (t0, t1)]
    tie = (p, q) if apex_first == "tail" else (q, p)
    result = retriangulate(desc, {t0: pts[t0], t1: pts[t1]}, new, total_order(orders, tie), [e])
    return _structural("move23", e, desc, result)


def degree_three_edges(tri: Triangulation) -> list[int]:
    return [c.id for c in tri.edge_classes if c.degree == 3 and len({t for t, _, _ in c.fiber}) == 3]


def move_32(desc: SpinDescriptor, edge_class: int) -> MoveInstance:
    """Replace the three tetrahedra around a degree-3 edge by two."""
    tri, wb = desc.tri, desc.wb
    cls = tri.edge_classes[edge_class]
    tets = [t for t, _, _ in cls.fiber]
    if cls.degree != 3 or len(set(tets)) != 3:
        raise MoveError(f"edge {edge_class} is not a degree-3 edge in three distinct tetrahedra")
    through = []
    for t, (a, b), _ in cls.fiber:
        for f in range(4):
            if f in (a, b):
                continue
            # faces containing the edge: opposite the two other vertices
            t2, perm = tri.neighbour(t, f)
            if (t2, (min(perm[a], perm[b]), max(perm[a], perm[b]))) in [(u, e) for u, e, _ in cls.fiber] and t2 != t:
                through.append((t, f))
    pts = _point_classes(tri, tets, through)
    t_first, (a, b), _ = cls.fiber[0]
    p, q = pts[t_first][a], pts[t_first][b]
    if any({pts[t][x] for x in e} != {p, q} for t, e, _ in cls.fiber):
        raise MoveError("edge endpoints are not identified consistently")
    everything = {x for t in tets for x in pts[t].values()}
    if len(everything) != 5:
        raise MoveError("the patch does not span five distinct vertices")
    (x,) = everything - set(pts[t_first].values())
    top = dict(pts[t_first])
    top[b] = x
    bottom = dict(pts[t_first])
    bottom[a] = x
    orders = [[pts[t][v] for v in wb.branchings[t].order] for t in tets]
    removed = sorted({tri.pairing_index(t, f) for t, f in through})
    result = retriangulate(desc, {t: pts[t] for t in tets}, [top, bottom], total_order(orders), removed)
    return _structural("move32", edge_class, desc, result)


def bubble(desc: SpinDescriptor, e: int, position: int) -> MoveInstance:
    """Open face pairing ``e`` and insert two tetrahedra sharing three faces around a new vertex.

    The copy next to the head keeps the tail's labels on the opened face with
    the new vertex at the tail's apex label; the copy next to the tail swaps
    two of those labels.  ``position`` (0..3) is the rank of the new vertex in
    the branching of both copies.
    """
    tri, wb = desc.tri, desc.wb
    (t0, f0), (t1, f1) = wb.omega.tail(tri, e), wb.omega.head(tri, e)
    if not 0 <= position <= 3:
        raise MoveError("position is 0..3")
    face = face_vertices(f0)
    tau = list(range(4))
    tau[face[0]], tau[face[1]] = face[1], face[0]
    tau = tuple(tau)
    near, far = tri.n, tri.n + 1
    _, head_perm = tri.neighbour(t0, f0)
    table = [list(row) for row in tri.gluing_table()] + [[None] * 4, [None] * 4]
    table[t0][f0] = (near, tau)
    table[near][f0] = (t0, tau)
    for g in face:
        table[near][g] = (far, tau)
        table[far][tau[g]] = (near, tau)
    table[far][f0] = (t1, head_perm)
    table[t1][f1] = (far, _invert4(head_perm))
    face_order = [w for w in wb.branchings[t0].order if w != f0]
    far_order = face_order[:position] + [f0] + face_order[position:]
    near_order = [tau[w] for w in far_order]
    orders = [b.order for b in wb.branchings] + [near_order, far_order]
    germ_map = {(t, f): (t, f) for t in range(tri.n) for f in range(4) if (t, f) not in ((t0, f0), (t1, f1))}
    # local patch: points are the tail's labels on the face plus "v"
    point = {w: ("p", w) for w in face}
    point[f0] = ("v",)
    simplex = tuple(point[w] for w in far_order)
    side = lambda g: frozenset(point[w] for w in range(4) if w != g)  # noqa: E731
    patch = LocalPatch(
        old_simplices=[],
        new_simplices=[simplex, simplex],
        removed_faces=[(side(f0), e)],
        internal_faces=[(side(f0), None), (side(f0), None)] + [(side(g), None) for g in face],
        point_order=simplex,
        fixed={0: desc.beta[e], 1: 0},
    )
    new_germs = {("internal_faces", 0): (near, f0), ("internal_faces", 1): (far, f0)}
    for k, g in enumerate(face):
        new_germs[("internal_faces", 2 + k)] = (far, g)
    result = assemble(desc, table, orders, germ_map, patch, new_germs)
    return _structural("bubble", (e, position), desc, result)


def branched_isomorphism(a: SpinDescriptor, b: SpinDescriptor) -> dict[int, int] | None:
    """A pairing map ``a -> b`` induced by an order-preserving relabelling of tetrahedra.

    Each tetrahedron of ``a`` goes to one of ``b`` with vertex order mapped to
    vertex order, so a tetrahedron bijection determines everything.
    """
    ta, tb = a.tri, b.tri
    if ta.n != tb.n or len(ta.pairings) != len(tb.pairings):
        return None
    for image in itertools.permutations(range(tb.n)):
        relabel = []
        for t in range(ta.n):
            oa, ob = a.wb.branchings[t].order, b.wb.branchings[image[t]].order
            relabel.append({oa[i]: ob[i] for i in range(4)})
        ok = True
        for t in range(ta.n):
            for f in range(4):
                t2, perm = ta.neighbour(t, f)
                u2, perm_b = tb.neighbour(image[t], relabel[t][f])
                if u2 != image[t2] or any(perm_b[relabel[t][v]] != relabel[t2][perm[v]] for v in range(4)):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        return {i: tb.pairing_index(image[p.source[0]], relabel[p.source[0]][p.source[1]]) for i, p in enumerate(ta.pairings)}
    return None


def same_spin_structure(a: SpinDescriptor, b: SpinDescriptor) -> bool:
    """Spin equality across a relabelling of tetrahedra (same branched triangulation up to isomorphism)."""
    iso = branched_isomorphism(a, b)
    if iso is None:
        raise MoveError("the two descriptors live on non-isomorphic branched triangulations")
    bits = 0
    for i, j in iso.items():
        if a.beta[i]:
            bits |= 1 << j
    moved = SpinDescriptor(b.tri, b.wb, GF2Vector(2, len(b.tri.pairings), bits))
    return spin_equal(moved, b)


# -- normalization ------------------------------------------------------------


def _ends(desc: SpinDescriptor, e: int) -> tuple[int, int]:
    return desc.wb.omega.tail(desc.tri, e)[0], desc.wb.omega.head(desc.tri, e)[0]


def normalization_plan(color: int, index0: int, index1: int) -> list[tuple[int, str]]:
    """Moves (end, kind) turning an edge that is an overpass at both ends into colour 0.

    ``end`` is 0 for the tail and 1 for the head.
    """
    if color == PLUS:
        if index0 == -1 and index1 == -1:
            return [(0, "I"), (1, "II")]
        if index0 == -1:
            return [(1, "IIbar")]
        return [(0, "Ibar")]
    if color == MINUS:
        if index0 == 1 and index1 == 1:
            return [(0, "Ibar"), (1, "IIbar")]
        if index0 == 1:
            return [(1, "II")]
        return [(0, "I")]
    if index0 == 1 and index1 == -1:
        return [(0, "Ibar"), (1, "II")]
    return []


def normalize_edge(desc: SpinDescriptor, e: int) -> list[MoveInstance]:
    """Vertex moves (and a final coboundary if needed) putting face pairing ``e`` in normalized position."""
    ends = _ends(desc, e)
    if ends[0] == ends[1]:
        raise MoveError(f"face pairing {e} is a loop")
    steps: list[MoveInstance] = []
    cur = desc
    for j in (0, 1):
        t = ends[j]
        germ = cur.wb.omega.tail(cur.tri, e) if j == 0 else cur.wb.omega.head(cur.tri, e)
        if germ[1] in underarc_faces(cur.wb.branchings[t]):
            steps.append(vertex_move(cur, t, "III"))
            cur = steps[-1].after
    color = classify_edge_type(cur.tri, cur.wb.omega, cur.wb.branchings, e)
    plan = normalization_plan(color, *(cur.wb.branchings[t].index for t in ends))
    for j, kind in plan:
        steps.append(vertex_move(cur, ends[j], kind))
        cur = steps[-1].after
    if color != EMPTY:
        plan = normalization_plan(EMPTY, *(cur.wb.branchings[t].index for t in ends))
        for j, kind in plan:
            steps.append(vertex_move(cur, ends[j], kind))
            cur = steps[-1].after
    if cur.beta[e]:
        steps.append(coboundary(cur, ends[0]))
        cur = steps[-1].after
    if not is_normalized(cur, e):
        raise AssertionError(f"normalization of face pairing {e} failed")
    return steps


def final(desc: SpinDescriptor, steps: Sequence[MoveInstance]) -> SpinDescriptor:
    return steps[-1].after if steps else desc


# -- good labelings ---------------------------------------------------------------

Germ = tuple[int, int]


@dataclass(frozen=True)
class GoodLabeling:
    labels: dict  # germ (tet, face) -> "o" | "u"

    def over_pair(self, t: int) -> tuple[int, int]:
        return tuple(sorted(f for (u, f), lab in self.labels.items() if u == t and lab == "o"))  # type: ignore[return-value]


def _germ_partner(desc: SpinDescriptor, g: Germ) -> Germ:
    t2, perm = desc.tri.neighbour(*g)
    return (t2, perm[g[1]])


def _same_direction_partner(desc: SpinDescriptor, g: Germ) -> Germ:
    t, f = g
    outs = desc.wb.branchings[t].out_faces
    (other,) = [h for h in range(4) if h != f and (h in outs) == (f in outs)]
    return (t, other)


def is_good_labeling(desc: SpinDescriptor, labels: dict) -> bool:
    """Equal labels at both ends of each edge; at each vertex the two germs labelled o are one in, one out."""
    for g, lab in labels.items():
        if labels[_germ_partner(desc, g)] != lab:
            return False
    for t in range(desc.tri.n):
        outs = desc.wb.branchings[t].out_faces
        over = [f for f in range(4) if labels[(t, f)] == "o"]
        if len(over) != 2 or sum(1 for f in over if f in outs) != 1:
            return False
    return True


def good_labeling(desc: SpinDescriptor, start: int = 0) -> GoodLabeling:
    """Propagate labels from a vertex: copy across edges, flip between same-direction germs at vertices.

    Each propagation path closes up on itself; when it does, a fresh path is
    started at a germ next to the labelled part.
    """
    germs = [(t, f) for t in range(desc.tri.n) for f in range(4)]
    labels: dict[Germ, str] = {}
    order = sorted(germs, key=lambda g: (g[0] != start, g))
    while len(labels) < len(germs):
        touched = {t for t, _ in labels}
        fresh = [g for g in order if g not in labels]
        seed = next((g for g in fresh if g[0] in touched), fresh[0])
        g, lab = seed, "o"
        while g not in labels:
            labels[g] = lab
            h = _germ_partner(desc, g)  # same label across the edge
            if h in labels:
                if labels[h] != lab:
                    raise AssertionError("propagation met an inconsistent edge")
                break
            labels[h] = lab
            g, lab = _same_direction_partner(desc, h), ("u" if lab == "o" else "o")
        else:
            if labels[g] != lab:
                raise AssertionError("propagation met an inconsistent vertex")
    if not is_good_labeling(desc, labels):
        raise AssertionError("propagated labeling is not good")
    return GoodLabeling(labels)


def all_good_labelings(desc: SpinDescriptor) -> list[dict]:
    """Exhaustive oracle over every o/u assignment to the germs."""
    germs = [(t, f) for t in range(desc.tri.n) for f in range(4)]
    out = []
    for bits in range(1 << len(germs)):
        labels = {g: ("o" if (bits >> i) & 1 else "u") for i, g in enumerate(germs)}
        if is_good_labeling(desc, labels):
            out.append(labels)
    return out


def realize_labeling(desc: SpinDescriptor, labeling: GoodLabeling) -> list[MoveInstance]:
    """Vertex moves bringing each vertex's o-germs to its overarc."""
    steps: list[MoveInstance] = []
    cur = desc
    for t in range(desc.tri.n):
        want = set(labeling.over_pair(t))
        # breadth-first search over I, II, Ibar, IIbar at t
        frontier: list[tuple[SpinDescriptor, list[MoveInstance]]] = [(cur, [])]
        seen = {cur.wb.branchings[t].order}
        found = None
        while frontier and found is None:
            nxt = []
            for d, path in frontier:
                if set(overarc_faces(d.wb.branchings[t])) == want:
                    found = (d, path)
                    break
                for kind in ("I", "II", "Ibar", "IIbar"):
                    if d.wb.branchings[t].index != REQUIRED_INDEX[kind]:
                        continue
                    m = vertex_move(d, t, kind)
                    o = m.after.wb.branchings[t].order
                    if o not in seen:
                        seen.add(o)
                        nxt.append((m.after, path + [m]))
            frontier = nxt
        if found is None:
            raise AssertionError(f"no vertex move sequence puts germs {sorted(want)} over at tetrahedron {t}")
        cur = found[0]
        steps.extend(found[1])
    return steps


def double_passage_report(desc: SpinDescriptor) -> dict[int, str]:
    """Per edge: 'over' / 'under' if both ends agree, else 'mixed'."""
    out = {}
    for e in range(len(desc.tri.pairings)):
        ends = []
        for t, f in (desc.wb.omega.tail(desc.tri, e), desc.wb.omega.head(desc.tri, e)):
            ends.append("over" if f in overarc_faces(desc.wb.branchings[t]) else "under")
        out[e] = ends[0] if ends[0] == ends[1] else "mixed"
    return out


# -- move scripts and the invariance harness ----------------------------------------

SPLIT_MOVES = ("M", "Mbar", "N", "Nbar")
VERTEX_MOVES = ("I", "II", "Ibar", "IIbar", "III")


@dataclass(frozen=True)
class ScriptStep:
    line: int
    kind: str
    args: tuple

    def __str__(self) -> str:
        if self.kind == "circuit":
            return f"circuit {self.args[0]} {','.join(map(str, self.args[1]))}"
        return f"{self.kind} {' '.join(map(str, self.args))}".strip()


class ScriptError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def parse_script(text: str) -> list[ScriptStep]:
    """One move per line: ``I 3``, ``circuit 0,4,2``, ``circuit under 1,2``, ``move23 5``, ``bubble 2 1``..."""
    steps = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        tok = line.split()
        kind, rest = tok[0], tok[1:]
        if kind not in VERTEX_MOVES + SPLIT_MOVES + ("coboundary", "normalize", "move32", "move23", "bubble", "circuit", "fuse"):
            raise ScriptError(n, f"unknown move {kind!r}")
        try:
            if kind in VERTEX_MOVES + SPLIT_MOVES + ("coboundary", "normalize", "move32"):
                (x,) = rest
                args: tuple = (int(x),)
            elif kind == "move23":
                args = (int(rest[0]), rest[1] if len(rest) > 1 else "tail")
            elif kind == "bubble":
                args = (int(rest[0]), int(rest[1]) if len(rest) > 1 else 2)
            elif kind == "circuit":
                arc = "over"
                if rest and rest[0] in ("over", "under"):
                    arc, rest = rest[0], rest[1:]
                (edges,) = rest
                args = (arc, tuple(int(e) for e in edges.split(",")))
            elif kind == "fuse":
                if rest:
                    raise ValueError
                args = ()
        except (ValueError, IndexError):
            raise ScriptError(n, f"bad arguments in {line!r}") from None
        steps.append(ScriptStep(n, kind, args))
    return steps


@dataclass
class StepReport:
    step: str
    line: int
    certified: bool
    weighted_faces: list
    classes_before: int
    classes_after: int

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "line": self.line,
            "certified": self.certified,
            "weighted_faces": self.weighted_faces,
            "classes_before": self.classes_before,
            "classes_after": self.classes_after,
        }


@dataclass
class InvarianceReport:
    steps: list = field(default_factory=list)
    start: SpinDescriptor | None = None
    end: SpinDescriptor | None = None
    class_map_bijective: bool = True
    returns_to_start: bool = False
    spin_preserved: bool = True

    def to_json(self) -> dict:
        return {
            "steps": [s.to_json() for s in self.steps],
            "class_map_bijective": self.class_map_bijective,
            "returns_to_start": self.returns_to_start,
            "spin_preserved": self.spin_preserved,
        }


def _check_target(cur: SpinDescriptor, step: ScriptStep) -> None:
    tri = cur.tri
    kind, args = step.kind, step.args
    if kind in VERTEX_MOVES + ("coboundary",):
        targets, limit, what = [args[0]], tri.n, "tetrahedron"
    elif kind == "circuit":
        targets, limit, what = list(args[1]), len(tri.pairings), "gluing"
    elif kind in ("move23", "bubble"):
        targets, limit, what = [args[0]], len(tri.pairings), "gluing"
    else:
        targets, limit, what = [args[0]], len(tri.edge_classes), "edge class"
    for x in targets:
        if not 0 <= x < limit:
            raise MoveError(f"{what} {x} does not exist (have {limit})")


def _apply_step(cur: SpinDescriptor, step: ScriptStep) -> tuple[SpinDescriptor, MoveInstance | None]:
    _check_target(cur, step)
    kind, args = step.kind, step.args
    if kind in VERTEX_MOVES:
        m = vertex_move(cur, args[0], kind)
    elif kind == "coboundary":
        m = coboundary(cur, args[0])
    elif kind == "circuit":
        m = circuit_move(cur, args[1], args[0])
    elif kind == "normalize":
        steps = normalize_edge(cur, args[0])
        return final(cur, steps), (steps[-1] if steps else None)
    elif kind == "move23":
        m = move_23(cur, args[0], args[1])
    elif kind == "move32":
        m = move_32(cur, args[0])
    elif kind == "bubble":
        m = bubble(cur, args[0], args[1])
    else:
        raise MoveError(f"{kind} is not a whole-graph move")
    return m.after, m


def _class_images(reps: Sequence[SpinDescriptor], transport) -> list[SpinDescriptor]:
    return [transport(r) for r in reps]


def verify_invariance(desc: SpinDescriptor, steps: Sequence[ScriptStep] | str) -> InvarianceReport:
    """Run a move script, certifying every step and tracking all spin classes of the start.

    Every spin class of the start is pushed through the same moves.  The
    images must stay pairwise distinct (the induced map on classes is a
    bijection once class counts agree), and when the script ends on the
    starting decoration each class must come back to itself.
    """
    from .weighted import DECORATIONS, fuse_graph

    if isinstance(steps, str):
        steps = parse_script(steps)
    report = InvarianceReport(start=desc)
    tracks = list(solve_spin(desc.tri, desc.wb).representatives)
    # put the given descriptor first
    tracks = [desc] + [r for r in tracks if not spin_equal(r, desc)]
    pending: dict[int, list[str]] = {}
    pending_line = 0

    def flush(line: int) -> None:
        nonlocal tracks, pending
        if not pending:
            return
        before = tracks
        new = []
        for d in before:
            try:
                after = fuse_graph(d, pending, DECORATIONS)
            except Exception as exc:  # fusion did not land in the weighted N family
                raise ScriptError(line, f"weighted moves do not fuse back: {exc}") from None
            new.append(after)
        ok = all(certificate_holds(b, a) if b.tri == a.tri else False for b, a in zip(before, new))
        word = "; ".join(f"{' '.join(w)} {t}" for t, w in sorted(pending.items()))
        faces = support_of(before[0].beta.bits ^ new[0].beta.bits)
        report.steps.append(StepReport(f"fuse [{word}]", line, ok, faces, len(before), solve_spin(new[0].tri, new[0].wb).count))
        tracks = new
        pending = {}

    for step in steps:
        if step.kind in SPLIT_MOVES:
            pending.setdefault(step.args[0], []).append(step.kind)
            pending_line = step.line
            continue
        if step.kind == "fuse":
            flush(step.line)
            continue
        flush(pending_line)
        new = []
        first = None
        for d in tracks:
            try:
                after, inst = _apply_step(d, step)
            except (MoveError, CertificateFailure) as exc:
                raise ScriptError(step.line, str(exc)) from None
            if first is None:
                first = inst
            new.append(after)
        certified = True
        if first is not None:
            cert = first.certificate()
            certified = bool(cert["certified"])
        report.steps.append(
            StepReport(
                str(step), step.line, certified, list(first.weighted_faces) if first else [],
                len(tracks), solve_spin(new[0].tri, new[0].wb).count,
            )
        )
        tracks = new
    flush(pending_line)
    report.end = tracks[0]
    end_count = solve_spin(report.end.tri, report.end.wb).count
    distinct = all(not spin_equal(a, b) for a, b in itertools.combinations(tracks, 2))
    report.class_map_bijective = distinct and end_count == len(tracks)
    same_base = report.end.tri == desc.tri and report.end.wb == desc.wb
    report.returns_to_start = same_base
    if same_base:
        report.spin_preserved = spin_equal(report.end, desc) and report.class_map_bijective
    else:
        report.spin_preserved = report.class_map_bijective and all(s.certified for s in report.steps)
    return report
