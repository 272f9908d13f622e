"""An engine for the node replication calculus: terms with explicit
substitutions and distributors, call-by-name and fully lazy call-by-need
strategies, and a quantitative intersection type system."""

from .errors import LambdaRError
from .syntax import parse, show
from .term_core import Abs, App, Dist, FreshSupply, Sub, Var, alpha_eq

__all__ = ["LambdaRError", "parse", "show", "Var", "Abs", "App", "Sub", "Dist", "FreshSupply", "alpha_eq"]
__version__ = "0.1.0"
