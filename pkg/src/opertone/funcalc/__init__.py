"""Analytic functional calculus by diagonalization and by contour quadrature."""

from .calc import CalcResult, analytic_calc, build_contour, calc_both, calc_hermitian, hypothesis_margins, select_case
from .contour import Contour, integrate

__all__ = [
    "CalcResult",
    "Contour",
    "analytic_calc",
    "build_contour",
    "calc_both",
    "calc_hermitian",
    "hypothesis_margins",
    "integrate",
    "select_case",
]
