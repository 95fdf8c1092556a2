"""Numerical tolerances shared by every module.

All defaults live here so that a run can be reproduced from one record.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    #: reconstruction / algebraic identities (relative)
    identity: float = 1e-10
    #: operator-order checks such as ``A <= B``
    psd: float = 1e-8
    #: eigenvalues within ``eig_zero * max(1, ||A||)`` of 0 count as 0
    eig_zero: float = 1e-12
    #: Jacobi stops once every off-diagonal entry is below ``jacobi * ||A||``
    jacobi: float = 1e-13
    jacobi_max_sweeps: int = 100
    #: singular-value cutoff used by the projection join
    join_cutoff: float = 1e-10
    #: projection invariants P = P*, P^2 = P
    projection: float = 1e-10
    #: vanishing quantities (conditional expectations of bad parts, ...)
    vanish: float = 1e-9
    #: slack on inequalities ``lhs <= rhs * (1 + inequality)``
    inequality: float = 1e-9


DEFAULT = Tolerances()
