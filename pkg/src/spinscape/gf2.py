"""Dense GF(2) linear algebra on Python int bitsets, and the mod-2 chain complex of a triangulation.

Cells are classes: vertex classes (0), edge classes (1), face pairings (2)
and tetrahedra (3).  Incidences are counted with multiplicity and reduced mod 2.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .triangulation import Triangulation, face_vertices


def bits_of(indices: Iterable[int]) -> int:
    v = 0
    for i in indices:
        v ^= 1 << i
    return v


def support(v: int) -> list[int]:
    out = []
    i = 0
    while v:
        if v & 1:
            out.append(i)
        v >>= 1
        i += 1
    return out


@dataclass(frozen=True)
class GF2Vector:
    grade: int
    length: int
    bits: int

    def __post_init__(self):
        if self.bits >> self.length:
            raise ValueError("vector has support outside its length")

    @classmethod
    def from_support(cls, grade: int, length: int, cells: Iterable[int]) -> "GF2Vector":
        return cls(grade, length, bits_of(cells))

    @classmethod
    def zero(cls, grade: int, length: int) -> "GF2Vector":
        return cls(grade, length, 0)

    def __add__(self, other: "GF2Vector") -> "GF2Vector":
        if (self.grade, self.length) != (other.grade, other.length):
            raise ValueError("grade or length mismatch")
        return GF2Vector(self.grade, self.length, self.bits ^ other.bits)

    def __getitem__(self, i: int) -> int:
        return (self.bits >> i) & 1

    @property
    def support(self) -> list[int]:
        return support(self.bits)

    def weight(self) -> int:
        return bin(self.bits).count("1")

    def to_text(self) -> str:
        return f"chain {self.grade}: " + ",".join(map(str, self.support))


_CHAIN_RE = re.compile(r"^\s*chain\s+(\d+)\s*:\s*([\d,\s]*)$")


def parse_chain(text: str, length: int) -> GF2Vector:
    m = _CHAIN_RE.match(text.strip())
    if not m:
        raise ValueError(f"not a chain line: {text!r}")
    cells = [int(x) for x in m.group(2).replace(" ", "").split(",") if x]
    if any(c >= length for c in cells):
        raise ValueError("cell id out of range")
    return GF2Vector.from_support(int(m.group(1)), length, cells)


class GF2Matrix:
    """An ``nrows x ncols`` matrix over GF(2); row ``i`` is an int whose bit ``j`` is entry (i, j)."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[int]):
        self.nrows = nrows
        self.ncols = ncols
        self.rows = tuple(rows)

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[int]) -> "GF2Matrix":
        rows = [0] * nrows
        for j, col in enumerate(columns):
            for i in support(col):
                rows[i] |= 1 << j
        return cls(nrows, len(columns), rows)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]]) -> "GF2Matrix":
        ncols = len(dense[0]) if dense else 0
        return cls(len(dense), ncols, [bits_of(j for j, x in enumerate(r) if x % 2) for r in dense])

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def to_dense(self) -> list[list[int]]:
        return [[self.entry(i, j) for j in range(self.ncols)] for i in range(self.nrows)]

    def column(self, j: int) -> int:
        return bits_of(i for i in range(self.nrows) if self.entry(i, j))

    def transpose(self) -> "GF2Matrix":
        return GF2Matrix.from_columns(self.ncols, self.rows)

    def matvec(self, x: int) -> int:
        out = 0
        for i, r in enumerate(self.rows):
            if bin(r & x).count("1") & 1:
                out |= 1 << i
        return out

    def __matmul__(self, other: "GF2Matrix") -> "GF2Matrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        cols = [self.matvec(other.column(j)) for j in range(other.ncols)]
        return GF2Matrix.from_columns(self.nrows, cols)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def _echelon(self):
        """Reduced row echelon form: list of (pivot column, row bits, combination of original rows)."""
        pivots: list[tuple[int, int, int]] = []
        for i, r in enumerate(self.rows):
            comb = 1 << i
            for p, pr, pc in pivots:
                if (r >> p) & 1:
                    r ^= pr
                    comb ^= pc
            if r:
                p = (r & -r).bit_length() - 1
                # keep the form reduced
                new = []
                for q, qr, qc in pivots:
                    if (qr >> p) & 1:
                        qr ^= r
                        qc ^= comb
                    new.append((q, qr, qc))
                pivots = new + [(p, r, comb)]
        return pivots

    def rank(self) -> int:
        return len(self._echelon())

    def kernel(self) -> list[int]:
        """A basis of the null space {x : A x = 0}."""
        piv = self._echelon()
        pivot_cols = {p: r for p, r, _ in piv}
        basis = []
        for free in range(self.ncols):
            if free in pivot_cols:
                continue
            x = 1 << free
            for p, r in pivot_cols.items():
                if (r >> free) & 1:
                    x |= 1 << p
            basis.append(x)
        return basis

    def solve(self, target: int) -> "Solution":
        """Solve A x = target; returns a particular solution (or None) and a kernel basis."""
        x = 0
        # eliminate on the rows augmented by the target bit
        aug_rows = [(r, (target >> i) & 1) for i, r in enumerate(self.rows)]
        pivots: list[tuple[int, int, int]] = []
        for r, t in aug_rows:
            for p, pr, pt in pivots:
                if (r >> p) & 1:
                    r ^= pr
                    t ^= pt
            if r:
                p = (r & -r).bit_length() - 1
                new = []
                for q, qr, qt in pivots:
                    if (qr >> p) & 1:
                        qr ^= r
                        qt ^= t
                    new.append((q, qr, qt))
                pivots = new + [(p, r, t)]
            elif t:
                return Solution(None, self.kernel())
        for p, _, t in pivots:
            if t:
                x |= 1 << p
        return Solution(x, self.kernel())


@dataclass(frozen=True)
class Solution:
    particular: int | None
    kernel_basis: list[int]

    @property
    def feasible(self) -> bool:
        return self.particular is not None


def in_span(vectors: Sequence[int], target: int) -> bool:
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            p = v.bit_length() - 1
            if p in basis:
                v ^= basis[p]
            else:
                basis[p] = v
                break
    t = target
    while t:
        p = t.bit_length() - 1
        if p not in basis:
            return False
        t ^= basis[p]
    return True


# -- chain complex of a triangulation -------------------------------------


def cell_counts(tri: Triangulation) -> tuple[int, int, int, int]:
    return len(tri.vertex_classes), len(tri.edge_classes), len(tri.pairings), tri.n


def _vertex_class_lookup(tri: Triangulation) -> dict[tuple[int, int], int]:
    return {key: i for i, cls in enumerate(tri.vertex_classes) for key in cls}


def boundary_matrix(tri: Triangulation, k: int) -> GF2Matrix:
    """Mod-2 boundary from k-cells to (k-1)-cells, k in {1, 2, 3}."""
    nv, ne, nf, nt = cell_counts(tri)
    if k == 3:
        cols = []
        for t in range(tri.n):
            c = 0
            for f in range(4):
                c ^= 1 << tri.pairing_index(t, f)
            cols.append(c)
        return GF2Matrix.from_columns(nf, cols)
    if k == 2:
        cols = []
        for p in tri.pairings:
            t, f = p.source
            c = 0
            for a, b in ((0, 1), (0, 2), (1, 2)):
                verts = face_vertices(f)
                c ^= 1 << tri.edge_lookup[(t, (verts[a], verts[b]))][0]
            cols.append(c)
        return GF2Matrix.from_columns(ne, cols)
    if k == 1:
        vlook = _vertex_class_lookup(tri)
        cols = []
        for ec in tri.edge_classes:
            t, (a, b) = ec.reference
            cols.append((1 << vlook[(t, a)]) ^ (1 << vlook[(t, b)]))
        return GF2Matrix.from_columns(nv, cols)
    raise ValueError("k must be 1, 2 or 3")


def homology_rank(tri: Triangulation, k: int) -> int:
    """Rank of H_k(T; Z/2) of the identified cell complex, k in {0, 1, 2, 3}."""
    counts = cell_counts(tri)
    if k not in (0, 1, 2, 3):
        raise ValueError("k must be 0..3")
    rank_out = boundary_matrix(tri, k).rank() if k > 0 else 0
    rank_in = boundary_matrix(tri, k + 1).rank() if k < 3 else 0
    return counts[k] - rank_out - rank_in


def spine_cohomology_rank(tri: Triangulation) -> int:
    """Rank of H^1(P; Z/2) for the dual spine P (tetrahedra, pairings, edge classes as cells)."""
    # cells of P are dual to tetrahedra, pairings and edge classes, so its
    # coboundaries are d3 (C^0 -> C^1) and d2 (C^1 -> C^2) read as matrices
    nf = len(tri.pairings)
    return nf - boundary_matrix(tri, 3).rank() - boundary_matrix(tri, 2).rank()
