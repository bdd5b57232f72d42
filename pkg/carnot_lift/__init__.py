"""
.. include:: ../README.md

# Usage as library

While the command line reads JSON workspaces, every operation is a plain
function on the objects of the submodules:

- `carnot_lift.algebra`: stratified algebras, graded spaces and maps
- `carnot_lift.forms`: left-invariant forms, d0 and the E0 projections
- `carnot_lift.groups`: group law, frames and coframes in exponential coordinates
- `carnot_lift.fieldforms`: forms with expression coefficients and the Rumin operators
- `carnot_lift.extensions`: cocycles and central extensions
- `carnot_lift.contact`: maps between groups, contact test and Pansu pullback
- `carnot_lift.lifting`: the lifting criteria
- `carnot_lift.paths`: horizontal curves, path lifting and the grid lift
- `carnot_lift.serialization`: JSON workspaces
- `carnot_lift.fixtures`: the worked examples

Functions never read configuration; tolerances, seeds and sample counts are
keyword arguments defaulting to the constants in `carnot_lift.sampling`.
"""

from carnot_lift.algebra import GradedSpace, StratifiedAlgebra, make_standard
from carnot_lift.contact import GroupMap
from carnot_lift.errors import CarnotError
from carnot_lift.extensions import CentralExtension, Cocycle, extend
from carnot_lift.lifting import check_lift

__all__ = [
    "CarnotError",
    "CentralExtension",
    "Cocycle",
    "GradedSpace",
    "GroupMap",
    "StratifiedAlgebra",
    "check_lift",
    "extend",
    "make_standard",
]
