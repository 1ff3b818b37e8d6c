"""Classification and propagation tools for parity (xor) constraints."""

from xorcraft.core import (
    CnfXorFormula,
    XorClause,
    cnf_of_xor,
    evaluate,
    normalize,
    substitute,
    xor_add,
)

__version__ = "0.1.0"

__all__ = [
    "CnfXorFormula",
    "XorClause",
    "cnf_of_xor",
    "evaluate",
    "normalize",
    "substitute",
    "xor_add",
    "__version__",
]
