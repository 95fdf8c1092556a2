"""Noncommutative square functions on a periodic dyadic grid, with a numerical verifier."""
from .cz import CuculescuResult, CZParts, cuculescu, cz_decompose, default_lambda, zeta
from .estimators import CZDecomposition, SquareFunction, check_matrix_field
from .field import MatrixField, distribution, lp_norm, trace, weak_l1_quasinorm
from .grid import GridSpec
from .operators import SignSample, ball_avg, cond_exp, linearize, t_op, truncated_avg
from .report import CheckReport
from .seqnorms import column_norm, rc_norm, row_norm, weak_rc_quasinorm
from .weights import Weight, a1_constant, ap_constant, estimate_delta, make_weight

__version__ = "0.1.0"

__all__ = [
    "CZDecomposition",
    "CZParts",
    "CheckReport",
    "CuculescuResult",
    "GridSpec",
    "MatrixField",
    "SignSample",
    "SquareFunction",
    "Weight",
    "a1_constant",
    "ap_constant",
    "ball_avg",
    "check_matrix_field",
    "column_norm",
    "cond_exp",
    "cuculescu",
    "cz_decompose",
    "default_lambda",
    "distribution",
    "estimate_delta",
    "linearize",
    "lp_norm",
    "make_weight",
    "rc_norm",
    "row_norm",
    "t_op",
    "trace",
    "truncated_avg",
    "weak_l1_quasinorm",
    "weak_rc_quasinorm",
    "zeta",
]
