"""Exceptions raised by carnot-lift.

Every failure has its own class so callers (and the cli) can react to the
kind of problem. Classes that signal a bad argument also derive from
`ValueError`.
"""

from typing import Any


class CarnotError(Exception):
    """Base class for all carnot-lift errors."""


class DimensionMismatch(CarnotError, ValueError):
    """Vectors, matrices or forms do not have the expected size."""


class AlgebraMismatch(CarnotError, ValueError):
    """Objects living over different algebras were combined."""


class NotGraded(CarnotError, ValueError):
    """A linear map sends some layer outside the matching target layer."""


class UnknownFamily(CarnotError, ValueError):
    """No standard algebra is known under the requested family name."""


class InvalidParameter(CarnotError, ValueError):
    """A numeric parameter is out of range."""


class StepTooLarge(CarnotError, ValueError):
    """The group law is only available up to a fixed nilpotency step."""


class NotCocycle(CarnotError, ValueError):
    """A 2-form that had to be closed under d0 is not."""


class NotClosed(NotCocycle):
    """An extension was requested for a cocycle with d0(rho) != 0."""


class GradingIncompatible(CarnotError, ValueError):
    """A cocycle or value space does not respect the layer grading."""


class NotStratified(CarnotError):
    """The derived algebra of an extension is not bracket generated."""


class NoSolution(CarnotError):
    """A linear system coming from the lifting criteria has no solution."""


class NotHomomorphism(CarnotError, ValueError):
    """A linear map does not preserve brackets."""


class NotContact(CarnotError):
    """A map does not preserve the horizontal distribution."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class NotContactAt(NotContact):
    """A map is not contact at the given point."""


class Inconsistent(CarnotError):
    """The bracket extension of a horizontal differential is not well defined."""


class NotSimplyConnected(CarnotError):
    """The domain of a map is not asserted to be simply connected."""


class NotHorizontal(CarnotError, ValueError):
    """A curve leaves the horizontal distribution."""


class BasepointMismatch(CarnotError, ValueError):
    """A basepoint does not lie over the start of the curve it should lift."""


class LoopNotClosed(CarnotError, ValueError):
    """A curve used as a loop does not end where it starts."""


class InconsistentHolonomy(CarnotError):
    """Two grid paths to the same node disagree on the lift.

    The loop with the largest disagreement is kept in `worst`.
    """

    def __init__(self, message: str, worst: Any = None) -> None:
        super().__init__(message)
        self.worst = worst


class RankMismatch(CarnotError, ValueError):
    """The value space of an extension has a horizontal part."""


class TowerMismatch(CarnotError, ValueError):
    """A chain of extensions does not fit together or does not fit the map."""


class UnsupportedExpression(CarnotError, ValueError):
    """An expression uses a node type outside the supported set."""


class Violation(CarnotError):
    """A lift fails the fiber homomorphism property."""

    def __init__(self, message: str, witness: Any = None) -> None:
        super().__init__(message)
        self.witness = witness


class SchemaError(CarnotError, ValueError):
    """An input document does not match its schema.

    `pointer` is a JSON pointer to the offending location.
    """

    def __init__(self, pointer: str, message: str) -> None:
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
