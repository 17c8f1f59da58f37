"""Exact rock extensions of polytopes, right-hand-side perturbation and a row-basis simplex."""
from .errors import RockforgeError
from .system import Basis, CheckReport, InequalitySystem, SolveOutcome

__version__ = "0.1.0"

__all__ = ["Basis", "CheckReport", "InequalitySystem", "RockforgeError", "SolveOutcome", "__version__"]
