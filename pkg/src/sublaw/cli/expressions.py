"""Arithmetic expressions over driver coordinates, e.g. ``max(X1, X2) * X3 >= 0``.

Parsed with :mod:`ast` and evaluated from a whitelist; nothing is passed to eval.
"""

from __future__ import annotations

import ast
import operator
import re

import numpy as np

from sublaw.expectation import RandomFunctional, constant, coordinate

_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv}
_COMPARE = {ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">", ast.GtE: ">=", ast.Eq: "=="}
_COORD = re.compile(r"X([1-9][0-9]*)$")


class ExpressionError(ValueError):
    pass


def _as_functional(v):
    return v if isinstance(v, RandomFunctional) else constant(v)


def _pairwise(fn, a, b, label):
    if not isinstance(a, RandomFunctional) and not isinstance(b, RandomFunctional):
        return float(fn(a, b))
    a, b = _as_functional(a), _as_functional(b)
    return a.combine(b, fn, label)


def _call(name: str, args: list):
    if name == "abs" and len(args) == 1:
        return abs(args[0])
    if name in ("min", "max") and len(args) >= 2:
        fn = np.minimum if name == "min" else np.maximum
        out = args[0]
        for a in args[1:]:
            out = _pairwise(fn, out, a, name)
        return out
    if name == "clip" and len(args) == 2 and not isinstance(args[1], RandomFunctional):
        c = float(args[1])
        return _as_functional(args[0]).map(lambda v: np.clip(v, -c, c), f"clip({c:g})")
    raise ExpressionError(f"unsupported call {name}() with {len(args)} arguments")


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name):
        m = _COORD.match(node.id)
        if not m:
            raise ExpressionError(f"unknown name {node.id!r}; use X1, X2, ...")
        return coordinate(int(m.group(1)))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a, b = _eval(node.left), _eval(node.right)
        if isinstance(node.op, ast.Pow):
            if isinstance(b, RandomFunctional):
                raise ExpressionError("exponent must be a number")
            return a**b
        op = _BINARY.get(type(node.op))
        if op is None:
            raise ExpressionError(f"unsupported operator {type(node.op).__name__}")
        if op is operator.truediv and isinstance(b, RandomFunctional):
            return _pairwise(op, a, b, "div")
        if isinstance(a, RandomFunctional) or isinstance(b, RandomFunctional):
            if not isinstance(a, RandomFunctional):
                return _pairwise(op, a, b, "op")
            return op(a, b)
        return float(op(a, b))
    if isinstance(node, ast.Compare) and len(node.ops) == 1:
        op = _COMPARE.get(type(node.ops[0]))
        if op is None:
            raise ExpressionError("unsupported comparison")
        left, right = _eval(node.left), _eval(node.comparators[0])
        if isinstance(right, RandomFunctional):
            return _as_functional(left - right).indicator(op, 0.0)
        return _as_functional(left).indicator(op, right)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        return _call(node.func.id, [_eval(a) for a in node.args])
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def parse_expression(text: str) -> RandomFunctional:
    """Compile ``text`` into a functional of the coordinates it mentions."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    out = _as_functional(_eval(tree))
    return RandomFunctional(out.coords, out.fn, None, text)
