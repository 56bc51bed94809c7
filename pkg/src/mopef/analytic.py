"""Small expression language and grid sampler for analytic instances.

Grammar (standard precedence, ``^`` right-associative and binding tighter
than unary minus):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Functions: exp, log, sqrt, abs (unary); min, max (two or more arguments).
Evaluation is strict: any non-finite intermediate raises, so sampled
instances never contain NaN or infinities.  There is no piecewise syntax;
piecewise-linear objectives are written with min/max.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .core import DiscreteInstance, validate_instance
from .errors import EvaluationError, ParseError, ValidationError

_UNARY_FUNCTIONS = ("exp", "log", "sqrt", "abs")
_VARIADIC_FUNCTIONS = ("min", "max")


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expression", ...]


Expression = Var | Const | Neg | BinOp | Call


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.pos)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self) -> Expression:
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error(f"unexpected {self.text[self.pos]!r}")
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.peek() in "+-":
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek() in "*/":
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expression:
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            # right-associative; exponent may carry its own unary minus
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha() or ch == "_":
            return self.name()
        raise self.error("expected a number, name or '('")

    def number(self) -> Const:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isdigit() or text[self.pos] == "."):
            self.pos += 1
        if self.pos < len(text) and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(text) and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(text) and text[self.pos].isdigit():
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # bare 'e' belongs to a following name, not the number
        try:
            return Const(float(text[start:self.pos]))
        except ValueError:
            self.pos = start
            raise self.error(f"invalid number {text[start:self.pos + 1]!r}") from None

    def name(self) -> Expression:
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        ident = text[start:self.pos]
        if self.peek() == "(":
            if ident not in _UNARY_FUNCTIONS + _VARIADIC_FUNCTIONS:
                self.pos = start
                raise self.error(f"unknown function {ident!r}")
            self.pos += 1
            args = [self.expr()]
            while self.peek() == ",":
                self.pos += 1
                args.append(self.expr())
            self.expect(")")
            if ident in _UNARY_FUNCTIONS and len(args) != 1:
                self.pos = start
                raise self.error(f"{ident} takes exactly one argument")
            if ident in _VARIADIC_FUNCTIONS and len(args) < 2:
                self.pos = start
                raise self.error(f"{ident} takes at least two arguments")
            return Call(ident, tuple(args))
        return Var(ident)


def parse_expression(text: str) -> Expression:
    """Parse ``text`` into an AST; raises :class:`ParseError` with offset."""
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# Printing (parse . print . parse is the identity)
# --------------------------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def print_expression(node: Expression) -> str:
    return _print(node, 0)


def _print(node: Expression, parent_prec: int) -> str:
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Neg):
        text = "-" + _print(node.operand, _PRECEDENCE["neg"])
        return f"({text})" if parent_prec > _PRECEDENCE["neg"] else text
    if isinstance(node, Call):
        return f"{node.func}({', '.join(_print(a, 0) for a in node.args)})"
    prec = _PRECEDENCE[node.op]
    # left operand of -,/ needs same precedence; right needs one higher
    # (except ^ which is right-associative)
    if node.op == "^":
        left = _print(node.left, prec + 1)
        right = _print(node.right, prec)
    else:
        left = _print(node.left, prec)
        right = _print(node.right, prec + 1)
    text = f"{left} {node.op} {right}"
    return f"({text})" if parent_prec > prec else text


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------

def eval_expression(node: Expression, env: Mapping[str, float]) -> float:
    """Evaluate an AST under ``env``; non-finite intermediates raise."""
    value = _eval(node, env)
    if not math.isfinite(value):
        raise EvaluationError("expression evaluated to a non-finite value")
    return value


def _eval(node: Expression, env: Mapping[str, float]) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        if node.name not in env:
            raise EvaluationError(f"unbound variable {node.name!r}")
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        args = [_eval(a, env) for a in node.args]
        return _apply(node.func, args)
    left = _eval(node.left, env)
    right = _eval(node.right, env)
    if node.op == "+":
        value = left + right
    elif node.op == "-":
        value = left - right
    elif node.op == "*":
        value = left * right
    elif node.op == "/":
        if right == 0:
            raise EvaluationError("division by zero")
        value = left / right
    else:  # ^
        value = _power(left, right)
    if not math.isfinite(value):
        raise EvaluationError("non-finite intermediate value")
    return value


def _power(base: float, exponent: float) -> float:
    if base < 0 and exponent != int(exponent):
        raise EvaluationError("negative base with non-integer exponent")
    if base == 0 and exponent < 0:
        raise EvaluationError("zero base with negative exponent")
    try:
        return math.pow(base, exponent)
    except (OverflowError, ValueError) as exc:
        raise EvaluationError(f"power evaluation failed: {exc}") from exc


def _apply(func: str, args: list[float]) -> float:
    x = args[0]
    try:
        if func == "exp":
            return math.exp(x)
        if func == "log":
            if x <= 0:
                raise EvaluationError("log of a non-positive value")
            return math.log(x)
        if func == "sqrt":
            if x < 0:
                raise EvaluationError("sqrt of a negative value")
            return math.sqrt(x)
        if func == "abs":
            return abs(x)
        if func == "min":
            return min(args)
        return max(args)
    except OverflowError as exc:
        raise EvaluationError(f"{func} overflow") from exc


def expression_variables(node: Expression) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Neg):
        return expression_variables(node.operand)
    if isinstance(node, Call):
        out: set[str] = set()
        for a in node.args:
            out |= expression_variables(a)
        return out
    return expression_variables(node.left) | expression_variables(node.right)


def substitute(node: Expression, bindings: Mapping[str, Expression]) -> Expression:
    """Replace variables by sub-expressions (used to compose transforms)."""
    if isinstance(node, Var):
        return bindings.get(node.name, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, bindings))
    if isinstance(node, Call):
        return Call(node.func, tuple(substitute(a, bindings) for a in node.args))
    return BinOp(node.op, substitute(node.left, bindings),
                 substitute(node.right, bindings))


# --------------------------------------------------------------------------
# Analytic instances
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VariableSpec:
    name: str
    lo: float | None  # None = unbounded below
    hi: float | None  # None = unbounded above

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None

    def contains(self, value: float) -> bool:
        if self.lo is not None and value < self.lo:
            return False
        if self.hi is not None and value > self.hi:
            return False
        return True


@dataclass(frozen=True)
class AnalyticInstance:
    """Objectives given as expressions over a boxed variable domain."""

    variables: tuple[VariableSpec, ...]
    objectives: tuple[Expression, ...]
    default_samples: int = 101

    def __post_init__(self):
        if len(self.objectives) < 2:
            raise ValidationError(["at least two objectives required"])
        if not self.variables:
            raise ValidationError(["at least one variable required"])
        if len(self.variables) > 3:
            raise ValidationError(["at most three variables supported"])
        names = {v.name for v in self.variables}
        if len(names) != len(self.variables):
            raise ValidationError(["variable names must be unique"])
        for k, obj in enumerate(self.objectives):
            extra = expression_variables(obj) - names
            if extra:
                raise ValidationError(
                    [f"objective {k} references undeclared variables {sorted(extra)}"])
        for v in self.variables:
            if v.lo is not None and v.hi is not None and not (v.lo < v.hi):
                raise ValidationError([f"variable {v.name!r}: empty interval"])
        if self.default_samples < 2:
            raise ValidationError(["default_samples must be at least 2"])

    @property
    def p(self) -> int:
        return len(self.objectives)

    @property
    def has_unbounded_side(self) -> bool:
        return any(not v.bounded for v in self.variables)

    @classmethod
    def from_dict(cls, raw: Any) -> "AnalyticInstance":
        if not isinstance(raw, dict):
            raise ValidationError(["analytic instance must be a JSON object"])
        variables = tuple(
            VariableSpec(str(v["name"]),
                         None if v.get("lo") is None else float(v["lo"]),
                         None if v.get("hi") is None else float(v["hi"]))
            for v in raw.get("variables", []))
        objectives = tuple(parse_expression(text) for text in raw.get("objectives", []))
        return cls(variables=variables, objectives=objectives,
                   default_samples=int(raw.get("samples", 101)))

    def to_dict(self) -> dict:
        return {
            "variables": [{"name": v.name, "lo": v.lo, "hi": v.hi} for v in self.variables],
            "objectives": [print_expression(o) for o in self.objectives],
            "samples": self.default_samples,
        }

    @classmethod
    def load(cls, path: str) -> "AnalyticInstance":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _axis_values(var: VariableSpec, n: int, truncation: float | None) -> list[float]:
    lo, hi = var.lo, var.hi
    if lo is None or hi is None:
        if truncation is None or not (truncation > 0):
            raise ValidationError(
                [f"variable {var.name!r} is unbounded: a positive truncation is required"])
        lo = -truncation if lo is None else lo
        hi = truncation if hi is None else hi
        if not (lo < hi):
            raise ValidationError([f"variable {var.name!r}: truncated interval is empty"])
    # t = k/(n-1) first so refinements with (n-1) | (N-1) reuse exact nodes
    return [lo + (hi - lo) * (k / (n - 1)) for k in range(n)]


def sample(analytic: AnalyticInstance, n: int | None = None,
           truncation: float | None = None) -> DiscreteInstance:
    """Evaluate the objectives on a closed uniform grid.

    ``n`` points per dimension, both interval endpoints included; unbounded
    sides are clipped to ``[-truncation, truncation]``.  Labels encode the
    grid coordinates.  Any evaluation failure aborts and names the node.
    """
    if n is None:
        n = analytic.default_samples
    if n < 2:
        raise ValidationError(["need at least 2 sample points per dimension"])
    axes = [_axis_values(v, n, truncation) for v in analytic.variables]
    names = [v.name for v in analytic.variables]

    points: list[tuple[str, tuple[float, ...]]] = []
    grid: list[tuple[float, ...]] = [()]
    for axis in axes:
        grid = [node + (x,) for node in grid for x in axis]
    for node in grid:
        env = dict(zip(names, node))
        label = ";".join(f"{name}={value!r}" for name, value in env.items())
        try:
            image = tuple(eval_expression(obj, env) for obj in analytic.objectives)
        except EvaluationError as exc:
            raise EvaluationError(f"objective evaluation failed at {label}: {exc}") from exc
        points.append((label, image))

    return validate_instance({
        "p": analytic.p,
        "points": [{"label": lbl, "f": list(f)} for lbl, f in points],
    })


def grid_coordinates(label: str) -> tuple[float, ...]:
    """Recover the variable values encoded in a sample label."""
    try:
        return tuple(float(part.split("=", 1)[1]) for part in label.split(";"))
    except (IndexError, ValueError) as exc:
        raise ValidationError([f"label {label!r} does not encode grid coordinates"]) from exc


def nearest_label(instance: DiscreteInstance, anchor: Sequence[float]) -> str:
    """Label of the sampled node closest to ``anchor`` in variable space."""
    best: tuple[float, str] | None = None
    for label, _ in instance.points:
        coords = grid_coordinates(label)
        if len(coords) != len(anchor):
            raise ValidationError(["anchor dimension does not match the sampled grid"])
        dist = max(abs(c - a) for c, a in zip(coords, anchor))
        if best is None or dist < best[0] or (dist == best[0] and label < best[1]):
            best = (dist, label)
    assert best is not None
    return best[1]
