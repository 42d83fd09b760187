"""confhyp: exact conformal-hypersurface calculus and expansion engine.

Truncated power series over multivariate rational functions with exact
rational coefficients, tensor and tractor calculus in a chosen scale, an
order-by-order Einstein expansion solver, boundary Dirichlet-to-Neumann
tensors in dimensions 4..8, and an exhaustion classifier for natural
conformal hypersurface invariants.
"""

from .coeffs import Coeff, CoeffField
from .expr import BudgetExhausted, Chart, RestrictionError, ScalarExpr
from .parser import ParseError, UnknownIdentifierError, parse_expr, print_expr
from .tensor import MetricData, TensorField

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "Chart",
    "Coeff",
    "CoeffField",
    "MetricData",
    "ParseError",
    "RestrictionError",
    "ScalarExpr",
    "TensorField",
    "UnknownIdentifierError",
    "parse_expr",
    "print_expr",
    "__version__",
]
