"""Tiny arithmetic expression language over coordinates ``v1..vn``.

Grammar: numbers, ``v1``..``vn``, ``+ - * / ^`` (``**`` also accepted),
parentheses, and the functions ``min``, ``max``, ``abs``.  Expressions are
parsed with :mod:`ast` and evaluated by walking a whitelisted tree; nothing
is ever passed to ``eval``.
"""

import ast
import operator
import re

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"min": min, "max": max, "abs": abs}
_VAR = re.compile(r"^v([1-9][0-9]*)$")


class ExpressionError(ValueError):
    pass


def _check(node, n_vars):
    if isinstance(node, ast.Expression):
        return _check(node.body, n_vars)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _check(node.left, n_vars) | _check(node.right, n_vars)
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _check(node.operand, n_vars)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return set()
    if isinstance(node, ast.Name):
        m = _VAR.match(node.id)
        if not m:
            raise ExpressionError(f"unknown name {node.id!r}")
        idx = int(m.group(1))
        if n_vars is not None and idx > n_vars:
            raise ExpressionError(f"{node.id} exceeds dimension {n_vars}")
        return {idx}
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
            raise ExpressionError("only min, max and abs calls are allowed")
        if node.func.id == "abs" and len(node.args) != 1:
            raise ExpressionError("abs takes one argument")
        if node.func.id != "abs" and len(node.args) < 2:
            raise ExpressionError(f"{node.func.id} takes at least two arguments")
        used = set()
        for arg in node.args:
            used |= _check(arg, n_vars)
        return used
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _eval(node, v):
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, v), _eval(node.right, v))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, v))
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return float(v[int(node.id[1:]) - 1])
    return _FUNCS[node.func.id](*(_eval(a, v) for a in node.args))


class Expression:
    """Compiled expression; call it with a coordinate vector."""

    def __init__(self, source, n_vars=None):
        self.source = source
        try:
            tree = ast.parse(source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from None
        self.variables = _check(tree, n_vars)
        self._tree = tree.body

    def __call__(self, v):
        return _eval(self._tree, v)

    def __repr__(self):
        return f"Expression({self.source!r})"
