"""Expression evaluation, shared by the scalar and vectorised interpreters.

The caller supplies how variables are read; everything else (literals,
operator dispatch by argument kinds, index construction) is common.
"""

from __future__ import annotations

from typing import Callable

from .indices import Index
from .ops import apply_op, resolve
from .syntax import (INT, Expr, IndexExpr, IntLit, PrimOp, RealLit, Var,
                     Variable)


def expr_kind(e: Expr) -> str:
    """Static kind of an expression: "int", "real", or "index"."""
    if isinstance(e, IntLit):
        return INT
    if isinstance(e, RealLit):
        return "real"
    if isinstance(e, Var):
        return e.var.type
    if isinstance(e, IndexExpr):
        return "index"
    if isinstance(e, PrimOp):
        kinds = tuple(expr_kind(a) for a in e.args)
        result, _ = resolve(e.op, kinds)
        return result
    raise TypeError(f"not an expression: {e!r}")


def eval_expr(e: Expr, read_var: Callable[[Variable], object]):
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, RealLit):
        return e.value
    if isinstance(e, Var):
        return read_var(e.var)
    if isinstance(e, PrimOp):
        kinds = tuple(expr_kind(a) for a in e.args)
        args = tuple(eval_expr(a, read_var) for a in e.args)
        return apply_op(e.op, kinds, args)
    if isinstance(e, IndexExpr):
        return Index(tuple((name, eval_expr(z, read_var)) for name, z in e.pairs))
    raise TypeError(f"not an expression: {e!r}")
