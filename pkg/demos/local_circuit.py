"""An overcircuit reversed in one go, and the same reversal assembled from M / Mbar at its vertices.

The local moves leave valence-2 vertices behind; fusing them gives back the
decorated graph of the global move, weights included.

    python3 demos/local_circuit.py [fixture]
"""

import sys

from spinscape.cli import bundled_fixtures, decorate
from spinscape.calculus import graph_of
from spinscape.moves import circuit_move, find_circuits
from spinscape.obstruction import solve_spin, spin_equal
from spinscape.triangulation import load_triangulation
from spinscape.weighted import DECORATIONS, fuse_graph, generating_moves

name = sys.argv[1] if len(sys.argv) > 1 else "figure_eight"
tri = load_triangulation(bundled_fixtures()[name])
wb = decorate(tri, guard=6)

for d in solve_spin(tri, wb).representatives:
    print(f"spin class with beta on {d.beta.support}")
    print("  decorated graph:")
    for line in graph_of(d.tri, d.wb, d.beta).to_text().splitlines():
        print("   ", line)
    for arc in ("over", "under"):
        for circuit in find_circuits(d, arc):
            direct = circuit_move(d, circuit, arc)
            plan = generating_moves(d, [(circuit, arc)])
            local = fuse_graph(d, plan, DECORATIONS)
            words = ", ".join(f"{' '.join(w)} at {t}" for t, w in sorted(plan.items()))
            print(f"  {arc}circuit {list(circuit)}: {words}")
            print(f"    weights changed by the global move on faces {list(direct.weighted_faces)}")
            print(f"    fused local moves give the same decoration: {local.wb == direct.after.wb}")
            print(f"    and the same spin structure: {spin_equal(local, direct.after)}")
