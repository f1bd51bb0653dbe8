"""Carry a spin structure through a 2-3 move and back, and through a bubble.

A face pairing has to be normalized first (colour 0, weight 0, overpass at
both ends); the 2-3 move then adds a tetrahedron, and the 3-2 move at the new
degree-3 edge removes it again.

    python3 demos/pachner_round_trip.py [fixture] [face pairing]
"""

import sys

from spinscape.cli import bundled_fixtures, decorate
from spinscape.moves import (
    branched_isomorphism,
    bubble,
    degree_three_edges,
    final,
    move_23,
    move_32,
    normalize_edge,
    same_spin_structure,
    structural_certificate,
)
from spinscape.obstruction import solve_spin
from spinscape.triangulation import load_triangulation

name = sys.argv[1] if len(sys.argv) > 1 else "lens_8_3"
e = int(sys.argv[2]) if len(sys.argv) > 2 else 1
tri = load_triangulation(bundled_fixtures()[name])
wb = decorate(tri, guard=6)
classes = solve_spin(tri, wb)
print(f"{name}: {tri.n} tetrahedra, {classes.count} spin classes")

for d in classes.representatives:
    print(f"\nclass with beta on {d.beta.support}")
    steps = normalize_edge(d, e)
    print(f"  normalizing face pairing {e}: {' '.join(f'{s.kind}@{s.target}' for s in steps) or 'already normal'}")
    cur = final(d, steps)

    up = move_23(cur, e)
    print(f"  2-3: {up.after.tri.n} tetrahedra, new weights on {list(up.weighted_faces)}, certified {structural_certificate(up)}")
    print(f"       spin classes after: {solve_spin(up.after.tri, up.after.wb).count}")
    for c in degree_three_edges(up.after.tri):
        down = move_32(up.after, c)
        if branched_isomorphism(down.after, cur) is not None:
            print(f"  3-2 at edge class {c}: back to {down.after.tri.n} tetrahedra, same spin structure {same_spin_structure(down.after, cur)}")
            break

    for pos in range(4):
        m = bubble(d, e, pos)
        # local faces 0 and 1 are the two copies of the opened face, 2..4 the sides of the pillow
        sides = [int(2 + k in m.structure.local_solution["internal"]) for k in range(3)]
        print(f"  bubble, new vertex at rank {pos}: side weights {sides}, certified {structural_certificate(m)}")
