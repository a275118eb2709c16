"""Custom coefficients from a small expression grammar.

Accepted expressions are polynomials in ``u`` combined with ``sqrt(u)`` and
real powers ``u**r``, e.g. ``"0.5 - u"`` or ``"sqrt(u + u**2)"``.
"""

from __future__ import annotations

from tokenize import TokenError

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from ..core.errors import ConfigurationError
from .models import CoefficientSet

U = sp.Symbol("u", nonnegative=True)
_LOCALS = {"u": U, "sqrt": sp.sqrt}


def _check_grammar(expr: sp.Expr, source: str) -> None:
    for node in sp.preorder_traversal(expr):
        if isinstance(node, sp.Symbol) and node != U:
            raise ConfigurationError(f"{source!r}: unknown symbol {node}")
        if isinstance(node, (sp.Number, sp.Symbol, sp.Add, sp.Mul)):
            continue
        if isinstance(node, sp.Pow) and node.exp.is_number and node.exp.is_real:
            continue
        raise ConfigurationError(f"{source!r}: {node} is outside the polynomial/sqrt/power grammar")


class CompiledExpression:
    """A parsed expression in ``u`` evaluated with numpy; picklable through its source."""

    def __init__(self, source: str):
        self.source = source
        try:
            self.expr = parse_expr(source, local_dict=dict(_LOCALS), transformations=standard_transformations, evaluate=True)
        except (SyntaxError, TokenError, TypeError, ValueError, sp.SympifyError) as exc:
            raise ConfigurationError(f"cannot parse coefficient expression {source!r}: {exc}") from exc
        _check_grammar(self.expr, source)
        self._fn = sp.lambdify(U, self.expr, modules="numpy")

    def __call__(self, u: np.ndarray) -> np.ndarray:
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.asarray(self._fn(u), dtype=float)
        return np.broadcast_to(out, u.shape).copy()

    def __getstate__(self):
        return {"source": self.source}

    def __setstate__(self, state):
        self.__init__(state["source"])

    def __repr__(self) -> str:
        return f"CompiledExpression({self.source!r})"


def custom_coefficients(
    drift: str,
    noise: str,
    *,
    theta: float = 1.0,
    r: float,
    L_b: float = 0.0,
    l_b: float = 0.0,
    L_sigma: float = 0.0,
) -> CoefficientSet:
    """Build a ``CoefficientSet`` from expressions for b(u) and sigma(u)."""
    sigma = CompiledExpression(noise)
    if float(sigma(np.zeros(1))[0]) != 0.0:
        raise ConfigurationError(f"noise amplitude {noise!r} must vanish at u = 0")
    return CoefficientSet(
        b=CompiledExpression(drift),
        sigma=sigma,
        theta=theta,
        r=r,
        L_b=L_b,
        l_b=l_b,
        L_sigma=L_sigma,
        label="custom",
    )
