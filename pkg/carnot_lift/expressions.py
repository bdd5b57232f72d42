"""Coefficient expressions: parsing, printing and the supported node set.

Expressions are sympy trees restricted to rational constants, coordinate
symbols, sums, products, powers with rational exponents and the functions
sin, cos, exp, log and sqrt. On disk they are prefix s-expressions such as
``(+ x (* 1/2 (^ y 2)))``; infix strings (``x + y**2/2``) are accepted on
input as well.
"""

import re
from tokenize import TokenError
from typing import Any, Iterable, Mapping

import sympy as sp
from sympy.parsing.sympy_parser import (
    parse_expr,
    rationalize,
    standard_transformations,
)

from carnot_lift.algebra import as_rational, rational_string
from carnot_lift.errors import InvalidParameter, UnsupportedExpression

_FUNCTIONS: dict[str, type[sp.Function]] = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "log": sp.log,
}
_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def check_supported(expr: Any, symbols: Iterable[sp.Symbol] = ()) -> sp.Expr:
    """Raise `UnsupportedExpression` unless `expr` only uses supported nodes.

    When `symbols` is given, free symbols must be among them.
    """
    expr = sp.sympify(expr)
    allowed = set(symbols)
    for node in sp.preorder_traversal(expr):
        if isinstance(node, sp.Symbol):
            if allowed and node not in allowed:
                raise UnsupportedExpression(f"unknown variable {node.name!r}")
        elif isinstance(node, sp.Pow):
            if not isinstance(node.exp, sp.Rational):
                raise UnsupportedExpression(f"non-rational exponent in {node}")
        elif isinstance(node, sp.Rational) or node is sp.pi:
            continue
        elif isinstance(node, (sp.Add, sp.Mul)):
            continue
        elif isinstance(node, (sp.sin, sp.cos, sp.exp, sp.log)):
            continue
        elif node.is_Number:
            raise UnsupportedExpression(f"inexact constant {node}")
        else:
            raise UnsupportedExpression(f"unsupported node {type(node).__name__}")
    return expr


def _symbol_table(symbols: Iterable[sp.Symbol]) -> dict[str, sp.Symbol]:
    """Coordinate symbols by name, for resolving tokens."""
    return {s.name: s for s in symbols}


def _atom(token: str, table: Mapping[str, sp.Symbol]) -> sp.Expr:
    if token in table:
        return table[token]
    if token == "pi":
        return sp.pi
    try:
        return as_rational(token)
    except (InvalidParameter, ValueError, TypeError, SyntaxError, sp.SympifyError):
        raise UnsupportedExpression(f"unknown atom {token!r}") from None


def _build(tree: Any, table: Mapping[str, sp.Symbol]) -> sp.Expr:
    if isinstance(tree, str):
        return _atom(tree, table)
    if not tree:
        raise UnsupportedExpression("empty list")
    head, *args = tree
    if not isinstance(head, str):
        raise UnsupportedExpression("list head must be an operator")
    parts = [_build(arg, table) for arg in args]
    match head:
        case "+":
            return sp.Add(*parts)
        case "*":
            return sp.Mul(*parts)
        case "-" if len(parts) == 1:
            return -parts[0]
        case "-" if len(parts) == 2:
            return parts[0] - parts[1]
        case "/" if len(parts) == 2:
            return parts[0] / parts[1]
        case "^" if len(parts) == 2:
            if not isinstance(parts[1], sp.Rational):
                raise UnsupportedExpression("exponent must be rational")
            return sp.Pow(parts[0], parts[1])
        case "sqrt" if len(parts) == 1:
            return sp.sqrt(parts[0])
        case name if name in _FUNCTIONS and len(parts) == 1:
            return _FUNCTIONS[name](parts[0])
    raise UnsupportedExpression(f"unknown operator {head!r} with {len(parts)} arguments")


def parse_sexpr(text: str, symbols: Iterable[sp.Symbol]) -> sp.Expr:
    """Parse a prefix s-expression over the given coordinate symbols."""
    tokens = _TOKEN.findall(text)
    if not tokens:
        raise UnsupportedExpression("empty expression")
    stack: list[list[Any]] = [[]]
    for token in tokens:
        if token == "(":
            stack.append([])
        elif token == ")":
            if len(stack) == 1:
                raise UnsupportedExpression("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(token)
    if len(stack) != 1 or len(stack[0]) != 1:
        raise UnsupportedExpression("expected exactly one balanced expression")
    return _build(stack[0][0], _symbol_table(symbols))


def parse_infix(text: str, symbols: Iterable[sp.Symbol]) -> sp.Expr:
    """Parse a Python-style infix string; decimals become exact rationals."""
    table: dict[str, Any] = dict(_symbol_table(symbols))
    table |= {name: f for name, f in _FUNCTIONS.items()}
    table |= {"sqrt": sp.sqrt, "pi": sp.pi}
    try:
        expr = parse_expr(
            text.replace("^", "**"),
            local_dict=table,
            transformations=standard_transformations + (rationalize,),
        )
    except (SyntaxError, TypeError, sp.SympifyError, TokenError) as e:
        raise UnsupportedExpression(f"cannot parse {text!r}: {e}") from None
    return check_supported(expr, _table_symbols(table))


def _table_symbols(table: Mapping[str, Any]) -> list[sp.Symbol]:
    return [v for v in table.values() if isinstance(v, sp.Symbol)]


def parse_expression(value: Any, symbols: Iterable[sp.Symbol]) -> sp.Expr:
    """Parse numbers, s-expressions (starting with "(") or infix strings."""
    symbols = list(symbols)
    if isinstance(value, (int, float)):
        return as_rational(value)
    if not isinstance(value, str):
        raise UnsupportedExpression(f"expected a string or number, got {type(value).__name__}")
    text = value.strip()
    if text.startswith("("):
        return check_supported(parse_sexpr(text, symbols), symbols)
    return parse_infix(text, symbols)


def to_sexpr(expr: Any) -> str:
    """Print an expression as a canonical prefix s-expression."""
    expr = sp.sympify(expr)
    if isinstance(expr, sp.Symbol):
        return expr.name
    if isinstance(expr, sp.Rational):
        return rational_string(expr)
    if expr is sp.pi:
        return "pi"
    if isinstance(expr, sp.Add):
        return "(+ " + " ".join(to_sexpr(a) for a in expr.as_ordered_terms()) + ")"
    if isinstance(expr, sp.Mul):
        return "(* " + " ".join(to_sexpr(a) for a in expr.as_ordered_factors()) + ")"
    if isinstance(expr, sp.Pow):
        if expr.exp == sp.Rational(1, 2):
            return f"(sqrt {to_sexpr(expr.base)})"
        return f"(^ {to_sexpr(expr.base)} {to_sexpr(expr.exp)})"
    for name, function in _FUNCTIONS.items():
        if isinstance(expr, function):
            return f"({name} {to_sexpr(expr.args[0])})"
    raise UnsupportedExpression(f"cannot print node {type(expr).__name__}")
