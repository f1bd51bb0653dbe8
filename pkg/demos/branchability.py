"""Two census manifolds with two tetrahedra each, only one of which admits a global branching.

Both still carry weak branchings, and the spin count comes out the same way
for every decoration tried.

    python3 demos/branchability.py
"""

import itertools

from spinscape.branching import EMPTY, classify_edge_type, enumerate_decorations, global_branching_exists, type_symbol
from spinscape.cli import bundled_fixtures
from spinscape.gf2 import spine_cohomology_rank
from spinscape.obstruction import solve_spin
from spinscape.triangulation import load_triangulation

for name in ("figure_eight", "figure_eight_sister"):
    tri = load_triangulation(bundled_fixtures()[name])
    report = global_branching_exists(tri)
    if report.branchable:
        orders = " | ".join(" ".join(map(str, b.order)) for b in report.witness)
        verdict = f"branchable, e.g. vertex orders {orders}"
    else:
        verdict = f"not branchable ({report.refuted}/{report.total} assignments refuted)"
    print(f"{name}: {verdict}")

    decorations = list(enumerate_decorations(tri))
    counts = {solve_spin(tri, wb).count for wb in decorations}
    print(f"  {len(decorations)} weak branchings, spin classes per decoration: {sorted(counts)}")
    print(f"  H^1 rank of the spine: {spine_cohomology_rank(tri)}")

    wb = decorations[0]
    for rep in solve_spin(tri, wb).representatives:
        print(f"  class with beta supported on faces {rep.beta.support}")
    print()

# a global branching is a weak one with every gluing of type 0; the sister has none
for name in ("figure_eight", "figure_eight_sister"):
    tri = load_triangulation(bundled_fixtures()[name])
    all_empty = 0
    for wb in enumerate_decorations(tri):
        types = [classify_edge_type(tri, wb.omega, wb.branchings, e) for e in range(len(tri.pairings))]
        all_empty += all(t == EMPTY for t in types)
    print(f"{name}: {all_empty} weak branchings with all gluings of type 0")

sister = load_triangulation(bundled_fixtures()["figure_eight_sister"])
print("edge types of the sister's first weak branchings:")
for wb in itertools.islice(enumerate_decorations(sister), 4):
    print("  ", " ".join(type_symbol(classify_edge_type(sister, wb.omega, wb.branchings, e)) for e in range(len(sister.pairings))))
