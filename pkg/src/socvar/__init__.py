"""Second-order variational analysis of Lorentz-cone constraint systems.

Modules
-------
soc_geometry       exact cone geometry (classification, projection, distances)
cone_sets          the convex-set algebra with decidable membership
epi2               second-order epi-derivatives and the derivative of N_Q
constraint_system  the feasible set, multipliers, curvature, qualifications
conic_lp           multiplier linear programs and approximate duality
graph_derivative   graphical derivative of the constraint normal-cone map
stability          isolated calmness of perturbed variational systems
golden             bundled reference problems and the verification suite
cli                command-line front end (``socvar``)
"""
from . import (cli, cone_sets, conic_lp, constraint_system, epi2, golden,
               graph_derivative, oracles, soc_geometry, stability)
from .soc_geometry import PointClass, SocVector

__all__ = [
    "PointClass",
    "SocVector",
    "cli",
    "cone_sets",
    "conic_lp",
    "constraint_system",
    "epi2",
    "golden",
    "graph_derivative",
    "oracles",
    "soc_geometry",
    "stability",
]

__version__ = "0.1.0"
