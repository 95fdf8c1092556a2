"""Executable checks, each returning :class:`~ncsq.report.CheckReport` records."""
from .cz_checks import (
    cadilhac_family,
    check_bd_vanishing,
    check_cadilhac,
    check_cuculescu,
    check_cz_proposition,
    check_zeta,
)
from .decay import check_main_lemma, check_offdiag_sum
from .orthogonality import AOInstance, bd_instance, check_almost_orthogonality, random_instance
from .square import check_good_part, check_refinement, check_strong_pp, check_weak11

__all__ = [
    "AOInstance",
    "bd_instance",
    "cadilhac_family",
    "check_almost_orthogonality",
    "check_bd_vanishing",
    "check_cadilhac",
    "check_cuculescu",
    "check_cz_proposition",
    "check_good_part",
    "check_main_lemma",
    "check_offdiag_sum",
    "check_refinement",
    "check_strong_pp",
    "check_weak11",
    "check_zeta",
    "random_instance",
]
