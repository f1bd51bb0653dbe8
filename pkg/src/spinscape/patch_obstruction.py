"""Local recomputation of the obstruction change for vertex moves and circuit moves.

Contributions are evaluated on a synthetic patch (one or two vertices with
free colours on the surrounding edges), so every entry is checked against all
realizations rather than read off a particular triangulation.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from . import algebra as alg
from .branching import EMPTY, MINUS, PLUS, TetBranching
from .calculus import PERM_TO_Z3, Z3_TO_PERM
from .obstruction import arrow_contribution, even_color_contribution, is_diagonal
from .triangulation import perm_sign
from .weighted import DOMAIN_INDEX, moved_order

INDEX_PAIRS = ((1, 1), (-1, -1), (1, -1), (-1, 1))

# rows: (colour, position of the region relative to the circuit edge); columns follow INDEX_PAIRS
CIRCUIT_DELTA_ALPHA: dict[tuple[int, str], tuple[int, int, int, int]] = {
    (EMPTY, "in-out-right"): (0, 0, 1, 1),
    (EMPTY, "along"): (0, 0, 0, 0),
    (EMPTY, "in-out-left"): (0, 0, 1, 1),
    (PLUS, "in-out"): (0, 0, 1, 1),
    (PLUS, "in"): (1, 0, 1, 0),
    (PLUS, "out"): (1, 0, 0, 1),
    (MINUS, "in-out"): (0, 0, 1, 1),
    (MINUS, "in"): (1, 0, 1, 0),
    (MINUS, "out"): (1, 0, 0, 1),
}


def _arrow(b: TetBranching, edge: tuple[int, int]) -> int:
    return arrow_contribution(b, edge) if is_diagonal(*b.edge_type(*edge)) else 0


def _swap_top(order: Sequence[int]) -> tuple[int, int, int, int]:
    return (order[0], order[1], order[3], order[2])


def _label_perm(bt: TetBranching, ft: int, bh: TetBranching, fh: int, perm: Sequence[int]) -> alg.Perm3:
    tl, hl = bt.face_labels(ft), bh.face_labels(fh)
    s = [0, 0, 0]
    for v, j in tl.items():
        s[j] = hl[perm[v]]
    return tuple(s)  # type: ignore[return-value]


def circuit_edge_contributions(color: int, v_order: Sequence[int], w_order: Sequence[int]) -> dict[tuple[int, str], int] | None:
    """Change carried by one circuit edge V -> W to each of its three regions.

    V is left through its outgoing overarc face and W entered through its
    incoming overarc face.  A region collects the change of the edge's strand
    term, the change of the arrow on its wing at V, and the change of the arrow
    on its wing at W when it leaves the circuit there.  Regions are walked
    against the circuit's orientation.  Returns None when no
    orientation-reversing gluing realizes the colour.
    """
    bv, bw = TetBranching(tuple(v_order)), TetBranching(tuple(w_order))  # type: ignore[arg-type]
    fv = v_order[0] if bv.index == 1 else v_order[1]
    fw = w_order[1] if bw.index == 1 else w_order[0]
    sigma = Z3_TO_PERM[color]
    x = {j: v for v, j in bv.face_labels(fv).items()}
    y = {j: v for v, j in bw.face_labels(fw).items()}
    perm = [0] * 4
    perm[fv] = fw
    for j in range(3):
        perm[x[j]] = y[sigma[j]]
    if perm_sign(perm) != -1:
        return None
    inv = [0] * 4
    for i, p in enumerate(perm):
        inv[p] = i
    bv2, bw2 = TetBranching(_swap_top(v_order)), TetBranching(_swap_top(w_order))
    color_after = PERM_TO_Z3[_label_perm(bw2, fw, bv2, fv, inv)]
    out = {}
    for j in range(3):
        a, b = (x[k] for k in range(3) if k != j)
        if perm_sign((a, b, x[j], fv)) == 1:
            a, b = b, a
        a2, b2 = perm[a], perm[b]
        along_v = {a, b} == {v_order[2], v_order[3]}
        along_w = {a2, b2} == {w_order[2], w_order[3]}
        kind = {(True, True): "along", (True, False): "out", (False, True): "in", (False, False): "in-out"}[(along_v, along_w)]
        if kind == "in-out" and color == EMPTY:
            kind += "-right" if j == 1 else "-left"
        before = even_color_contribution(color, j) + _arrow(bv, (a, b))
        after = even_color_contribution(color_after, bw2.face_labels(fw)[perm[x[j]]]) + _arrow(bv2, (a, b))
        if not along_w:
            before += _arrow(bw, (a2, b2))
            after += _arrow(bw2, (a2, b2))
        out[(color, kind)] = (after - before) % 4
    return out


def circuit_delta_alpha_table() -> dict[tuple[int, str], tuple[int, ...]]:
    """Recompute the contribution table over all vertex orders realizing each entry.

    Raises if an entry is not integral or depends on the realization.
    """
    values: dict[tuple[tuple[int, str], int], set[int]] = {}
    for color in (EMPTY, PLUS, MINUS):
        for col, (ev, ew) in enumerate(INDEX_PAIRS):
            for vo in itertools.permutations(range(4)):
                if perm_sign(vo) != ev:
                    continue
                for wo in itertools.permutations(range(4)):
                    if perm_sign(wo) != ew:
                        continue
                    got = circuit_edge_contributions(color, vo, wo)
                    for key, v in (got or {}).items():
                        values.setdefault((key, col), set()).add(v)
    table = {}
    for key in CIRCUIT_DELTA_ALPHA:
        row = []
        for col in range(4):
            vals = values.get((key, col), set())
            if len(vals) != 1:
                raise ValueError(f"entry {key} / {INDEX_PAIRS[col]} takes values {sorted(vals)}")
            (v,) = vals
            row.append(alg.g_to_z2(v))
        table[key] = tuple(row)
    return table


# -- vertex moves -----------------------------------------------------------------


def wing_deltas(order: Sequence[int], kind: str, colors: Sequence[int], reverse: bool = False) -> dict[tuple[int, int], int] | None:
    """Obstruction change on the six wings at a vertex after a vertex move.

    ``colors[f]`` is the colour of the edge at germ ``f`` before the move.
    Keys are wings written by positions in the old order.  Returns None if the
    move would make some edge odd.
    """
    b0 = TetBranching(tuple(order))  # type: ignore[arg-type]
    b1 = TetBranching(moved_order(order, kind))
    sigmas = {}
    for f in range(4):
        l0, l1 = b0.face_labels(f), b1.face_labels(f)
        lam = [0, 0, 0]
        for v in l0:
            lam[l1[v]] = l0[v]
        s = Z3_TO_PERM[colors[f]]
        tail = f in b0.out_faces
        new = alg.compose(s, tuple(lam)) if tail else alg.compose(alg.inverse(tuple(lam)), s)
        if new not in PERM_TO_Z3:
            return None
        sigmas[f] = (s, new, tail)

    def strand(b, face, opposite, sigma, tail):
        label = b.face_labels(face)[opposite]
        return label if tail else alg.inverse(sigma)[label]

    pos = {v: i for i, v in enumerate(order)}
    out = {}
    for a, b in itertools.combinations(range(4), 2):
        c, d = (x for x in range(4) if x not in (a, b))
        if perm_sign((a, b, c, d)) != 1:
            c, d = d, c
        if reverse:
            a, b, c, d = b, a, d, c
        total = _arrow(b1, (a, b)) - _arrow(b0, (a, b))
        for face, opposite in ((c, d), (d, c)):
            s, new, tail = sigmas[face]
            total += even_color_contribution(PERM_TO_Z3[new], strand(b1, face, opposite, new, tail))
            total -= even_color_contribution(PERM_TO_Z3[s], strand(b0, face, opposite, s, tail))
        out[tuple(sorted((pos[a], pos[b])))] = total % 4
    return out


def vertex_move_wing_table(kind: str) -> dict[tuple[int, int], int]:
    """Wing changes of a vertex move, checked constant over all orders, colours and walk directions."""
    values: dict[tuple[int, int], set[int]] = {}
    for order in itertools.permutations(range(4)):
        if perm_sign(order) != DOMAIN_INDEX[kind]:
            continue
        for colors in itertools.product((EMPTY, PLUS, MINUS), repeat=4):
            for reverse in (False, True):
                got = wing_deltas(order, kind, colors, reverse)
                for k, v in (got or {}).items():
                    values.setdefault(k, set()).add(v)
    table = {}
    for k, vals in sorted(values.items()):
        if len(vals) != 1:
            raise ValueError(f"wing {k} takes values {sorted(vals)}")
        table[k] = alg.g_to_z2(vals.pop())
    return table
