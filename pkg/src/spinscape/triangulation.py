"""Triangulations of oriented 3-manifolds given by face-pairing data.

Tetrahedra carry the vertex labels 0..3 with the orientation of (0, 1, 2, 3).
Face ``i`` of a tetrahedron is the face opposite vertex ``i``; its vertices
are the other three labels in increasing order.  A gluing of face ``f`` of
tetrahedron ``t`` to face ``f2`` of tetrahedron ``t2`` is stored as a
permutation of {0, 1, 2, 3} sending the vertices of ``t`` to those of ``t2``
(so ``perm[f] == f2``).  An oriented triangulation has all gluing
permutations odd.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

Perm4 = tuple[int, int, int, int]
Germ = tuple[int, int]  # (tetrahedron, face)

ABSTRACT_EDGES: tuple[tuple[int, int], ...] = tuple(itertools.combinations(range(4), 2))


class TriangulationError(ValueError):
    """Raised for structurally invalid triangulation data."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


def perm_sign(p: Sequence[int]) -> int:
    sign = 1
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


def perm_inverse(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def face_vertices(f: int) -> tuple[int, int, int]:
    return tuple(v for v in range(4) if v != f)  # type: ignore[return-value]


def extend_face_map(f: int, f2: int, images: Sequence[int]) -> Perm4:
    """Extend the images of the increasing vertices of face ``f`` to a 4-permutation."""
    perm = [0] * 4
    for v, w in zip(face_vertices(f), images):
        perm[v] = w
    perm[f] = f2
    return tuple(perm)  # type: ignore[return-value]


@dataclass(frozen=True)
class FacePairing:
    source: Germ
    target: Germ
    vertex_map: tuple[int, int, int]

    @property
    def perm(self) -> Perm4:
        return extend_face_map(self.source[1], self.target[1], self.vertex_map)

    def reversed(self) -> "FacePairing":
        p = perm_inverse(self.perm)
        f2 = self.target[1]
        return FacePairing(self.target, self.source, tuple(p[v] for v in face_vertices(f2)))


@dataclass(frozen=True)
class EdgeClass:
    """An edge of the triangulation: the abstract edges identified by gluings.

    ``fiber`` lists ``(tet, (a, b), sign)`` with ``a < b``; ``sign`` is +1 when the
    orientation a->b agrees with the reference orientation (the first member,
    read as a->b).
    """

    id: int
    fiber: tuple[tuple[int, tuple[int, int], int], ...]

    @property
    def reference(self) -> tuple[int, tuple[int, int]]:
        t, ab, _ = self.fiber[0]
        return t, ab

    @property
    def degree(self) -> int:
        return len(self.fiber)


class Triangulation:
    """An immutable triangulation given by ``n`` tetrahedra and face pairings.

    Construction does not validate; use :func:`validate` or
    :meth:`Triangulation.checked`.
    """

    def __init__(self, n_tetrahedra: int, pairings: Iterable[FacePairing]):
        self.n = int(n_tetrahedra)
        canon = []
        for p in pairings:
            if p.target < p.source:
                p = p.reversed()
            canon.append(p)
        canon.sort(key=lambda p: (p.source, p.target))
        self.pairings: tuple[FacePairing, ...] = tuple(canon)

    @classmethod
    def checked(cls, n_tetrahedra: int, pairings: Iterable[FacePairing]) -> "Triangulation":
        tri = cls(n_tetrahedra, pairings)
        problems = validate(tri)
        if problems:
            raise TriangulationError(problems)
        return tri

    @classmethod
    def from_gluings(cls, gluings: Sequence[Sequence[tuple[int, Perm4]]]) -> "Triangulation":
        """Build from a table ``gluings[t][f] = (t2, perm)`` (each pairing listed twice)."""
        pairs = []
        for t, row in enumerate(gluings):
            for f, (t2, perm) in enumerate(row):
                f2 = perm[f]
                if (t, f) <= (t2, f2):
                    pairs.append(FacePairing((t, f), (t2, f2), tuple(perm[v] for v in face_vertices(f))))
        return cls(len(gluings), pairs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Triangulation) and self.n == other.n and self.pairings == other.pairings

    def __hash__(self) -> int:
        return hash((self.n, self.pairings))

    def __repr__(self) -> str:
        return f"Triangulation(n={self.n}, pairings={len(self.pairings)})"

    # -- adjacency -------------------------------------------------------

    @cached_property
    def _adjacency(self) -> dict[Germ, tuple[Germ, Perm4, int]]:
        adj: dict[Germ, tuple[Germ, Perm4, int]] = {}
        for idx, p in enumerate(self.pairings):
            perm = p.perm
            adj[p.source] = (p.target, perm, idx)
            adj[p.target] = (p.source, perm_inverse(perm), idx)  # type: ignore[assignment]
        return adj

    def neighbour(self, t: int, f: int) -> tuple[int, Perm4]:
        (t2, _), perm, _ = self._adjacency[(t, f)]
        return t2, perm

    def pairing_index(self, t: int, f: int) -> int:
        return self._adjacency[(t, f)][2]

    def gluing_table(self) -> list[list[tuple[int, Perm4]]]:
        return [[self.neighbour(t, f) for f in range(4)] for t in range(self.n)]

    # -- derived structure -----------------------------------------------

    @cached_property
    def edge_classes(self) -> tuple[EdgeClass, ...]:
        return compute_edge_classes(self)

    @cached_property
    def edge_lookup(self) -> dict[tuple[int, tuple[int, int]], tuple[int, int]]:
        """Map an abstract edge ``(t, (a, b))`` with ``a < b`` to ``(class id, sign)``."""
        out = {}
        for ec in self.edge_classes:
            for t, ab, s in ec.fiber:
                out[(t, ab)] = (ec.id, s)
        return out

    @cached_property
    def vertex_classes(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        parent = {(t, v): (t, v) for t in range(self.n) for v in range(4)}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for p in self.pairings:
            perm = p.perm
            t, f = p.source
            t2 = p.target[0]
            for v in face_vertices(f):
                a, b = find((t, v)), find((t2, perm[v]))
                if a != b:
                    parent[max(a, b)] = min(a, b)
        groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for key in sorted(parent):
            groups.setdefault(find(key), []).append(key)
        return tuple(tuple(g) for g in sorted(groups.values()))

    def gluing_graph(self) -> "GluingGraph":
        return GluingGraph(self.n, tuple((p.source, p.target) for p in self.pairings))

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        lines = [f"tri {self.n}"]
        for p in self.pairings:
            (t, f), (t2, f2) = p.source, p.target
            a, b, c = p.vertex_map
            lines.append(f"glue {t} {f} : {t2} {f2} : {a} {b} {c}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        data = {
            "tetrahedra": self.n,
            "gluings": [
                {"source": list(p.source), "target": list(p.target), "vertices": list(p.vertex_map)}
                for p in self.pairings
            ],
        }
        return json.dumps(data, indent=2)


@dataclass(frozen=True)
class GluingGraph:
    """The 4-valent graph dual to a triangulation: tetrahedra and face pairings."""

    n_vertices: int
    edges: tuple[tuple[Germ, Germ], ...]

    def degree(self, v: int) -> int:
        return sum((a[0] == v) + (b[0] == v) for a, b in self.edges)

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return False
        seen = {0}
        stack = [0]
        nbrs: dict[int, list[int]] = {v: [] for v in range(self.n_vertices)}
        for (a, _), (b, _) in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices


def compute_edge_classes(tri: Triangulation) -> tuple[EdgeClass, ...]:
    """Partition the 6n abstract edges into edge classes with orientation signs."""
    # union-find carrying the relative orientation to the parent
    parent: dict[tuple[int, tuple[int, int]], tuple[tuple[int, tuple[int, int]], int]] = {}
    for t in range(tri.n):
        for ab in ABSTRACT_EDGES:
            parent[(t, ab)] = ((t, ab), 1)

    def find(x):
        sign = 1
        path = []
        while parent[x][0] != x:
            path.append(x)
            nxt, s = parent[x]
            sign *= s
            x = nxt
        root = x
        # path compression
        acc = sign
        for node in path:
            _, s = parent[node]
            parent[node] = (root, acc)
            acc *= s
        return root, sign

    for p in tri.pairings:
        perm = p.perm
        t, f = p.source
        t2 = p.target[0]
        for a, b in itertools.combinations(face_vertices(f), 2):
            a2, b2 = perm[a], perm[b]
            rel = 1 if a2 < b2 else -1
            x = (t, (a, b))
            y = (t2, (min(a2, b2), max(a2, b2)))
            rx, sx = find(x)
            ry, sy = find(y)
            if rx == ry:
                continue
            # orient(x) = sx * orient(rx); orient(y) = sy * orient(ry); orient(y) = rel * orient(x)
            # attach the larger root below the smaller one
            if ry < rx:
                parent[rx] = (ry, sx * rel * sy)
            else:
                parent[ry] = (rx, sy * rel * sx)

    groups: dict[tuple[int, tuple[int, int]], list[tuple[tuple[int, tuple[int, int]], int]]] = {}
    for key in sorted(parent):
        root, s = find(key)
        groups.setdefault(root, []).append((key, s))
    classes = []
    for i, members in enumerate(sorted(groups.values(), key=lambda m: m[0][0])):
        ref_sign = members[0][1]
        fiber = tuple((t, ab, s * ref_sign) for (t, ab), s in members)
        classes.append(EdgeClass(i, fiber))
    return tuple(classes)


def validate(tri: Triangulation) -> list[str]:
    """Return every invariant violation of ``tri``; empty iff valid."""
    problems: list[str] = []
    if tri.n <= 0:
        return ["triangulation has no tetrahedra"]
    seen: dict[Germ, int] = {}
    for idx, p in enumerate(tri.pairings):
        for germ in (p.source, p.target):
            t, f = germ
            if not (0 <= t < tri.n and 0 <= f < 4):
                problems.append(f"pairing {idx}: germ {germ} out of range")
                continue
            if germ in seen:
                problems.append(f"face {germ} paired twice (pairings {seen[germ]} and {idx})")
            else:
                seen[germ] = idx
        if p.source == p.target:
            problems.append(f"pairing {idx}: face {p.source} glued to itself")
        if sorted(p.vertex_map) != sorted(face_vertices(p.target[1])) if 0 <= p.target[1] < 4 else True:
            problems.append(f"pairing {idx}: vertex map {p.vertex_map} is not a bijection onto face {p.target}")
            continue
        if perm_sign(p.perm) != -1:
            problems.append(f"pairing {idx} {p.source}->{p.target}: not orientation-reversing")
    for t in range(tri.n):
        for f in range(4):
            if (t, f) not in seen:
                problems.append(f"face {(t, f)} is unglued")
    if not problems and not tri.gluing_graph().is_connected():
        problems.append("gluing graph is disconnected")
    return problems


# -- text / JSON formats ----------------------------------------------------


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def parse_triangulation(text: str) -> Triangulation:
    """Parse the ``tri``/``glue`` text format and validate the result."""
    n = None
    pairings: list[FacePairing] = []
    germ_line: dict[Germ, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        tokens = line.split()
        if n is None:
            if tokens[0] != "tri" or len(tokens) != 2 or not tokens[1].isdigit():
                raise ParseError("expected 'tri <n>'", lineno, col)
            n = int(tokens[1])
            continue
        if tokens[0] != "glue":
            raise ParseError(f"unexpected token {tokens[0]!r}", lineno, col)
        parts = " ".join(tokens[1:]).split(":")
        if len(parts) != 3:
            raise ParseError("expected 'glue <t> <f> : <t2> <f2> : <a> <b> <c>'", lineno, col)
        try:
            src = tuple(int(x) for x in parts[0].split())
            tgt = tuple(int(x) for x in parts[1].split())
            verts = tuple(int(x) for x in parts[2].split())
        except ValueError:
            raise ParseError("non-integer field", lineno, col) from None
        if len(src) != 2 or len(tgt) != 2 or len(verts) != 3:
            raise ParseError("wrong number of fields", lineno, col)
        for germ in (src, tgt):
            if germ in germ_line:
                raise ParseError(f"face {germ} paired twice (first on line {germ_line[germ]})", lineno, col)
            germ_line[germ] = lineno  # type: ignore[index]
        pairings.append(FacePairing(src, tgt, verts))  # type: ignore[arg-type]
    if n is None:
        raise ParseError("empty input", 1)
    if len(pairings) != 2 * n:
        raise TriangulationError([f"expected {2 * n} glue lines, found {len(pairings)}"] + validate(Triangulation(n, pairings)))
    return Triangulation.checked(n, pairings)


def parse_triangulation_json(text: str) -> Triangulation:
    data = json.loads(text)
    pairings = [
        FacePairing(tuple(g["source"]), tuple(g["target"]), tuple(g["vertices"]))  # type: ignore[arg-type]
        for g in data["gluings"]
    ]
    return Triangulation.checked(int(data["tetrahedra"]), pairings)


def load_triangulation(path: str | Path) -> Triangulation:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return parse_triangulation_json(text)
    return parse_triangulation(text)
