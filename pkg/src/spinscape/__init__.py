"""Spin structures on oriented 3-manifolds from decorated triangulations.

Typical use::

    from spinscape import load_triangulation, find_pre_branching, find_weak_branching, solve_spin

    tri = load_triangulation("figure_eight.tri")
    wb = find_weak_branching(tri, find_pre_branching(tri.gluing_graph()))
    print(solve_spin(tri, wb).count)
"""

from .branching import (
    PreBranching,
    TetBranching,
    WeakBranching,
    enumerate_decorations,
    find_pre_branching,
    find_weak_branching,
    global_branching_exists,
    z2_taut,
)
from .obstruction import SpinDescriptor, alpha_bar, alpha_spine, solve_spin, spin_equal
from .triangulation import Triangulation, load_triangulation, parse_triangulation, validate

__all__ = [
    "PreBranching",
    "SpinDescriptor",
    "TetBranching",
    "Triangulation",
    "WeakBranching",
    "alpha_bar",
    "alpha_spine",
    "enumerate_decorations",
    "find_pre_branching",
    "find_weak_branching",
    "global_branching_exists",
    "load_triangulation",
    "parse_triangulation",
    "solve_spin",
    "spin_equal",
    "validate",
    "z2_taut",
]
