"""Scalarization methods, validity conditions and unboundedness diagnostics.

Built-in scalarizing functions (all minimized over the instance points):

    weighted-sum        sum_i lambda_i * y_i
    compromise          (sum_i lambda_i * (y_i - utopia_i)^q)^(1/q),  q > 1
    conic               sum_i lambda_i*(y_i - ref_i) + alpha * sum_i |y_i - ref_i|
    tchebycheff-mod     max_i { lambda_i*(y_i - utopia_i) + alpha * sum(y - utopia) }
    pascoletti-serafini min { t : y <= anchor_a + t * direction_r }
    benson-sum          sum_i y_i   (optionally restricted to y <= f(anchor))
    custom-g            any expression in variables y1..yp

The first four admit a sufficient condition under which every minimizer is
properly efficient (validity check below); the last three feed the
unboundedness diagnostic instead: if the bounded-from-above restriction of
a scalarization is unbounded *below*, no properly efficient solution
exists at all.  The converse direction proves nothing, and reports are
phrased accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Sequence

import numpy as np

from .analytic import (AnalyticInstance, Expression, eval_expression,
                       expression_variables, parse_expression, print_expression)
from .certify import BOUNDED_FACTOR, DIVERGING_FACTOR, refinement_samples
from .core import DiscreteInstance, Vector, dominates, ideal_point
from .errors import DimensionMismatchError, DomainError, ValidationError

METHODS = ("weighted-sum", "compromise", "conic", "tchebycheff-mod",
           "pascoletti-serafini", "benson-sum", "custom-g")

_REQUIRED_FIELDS = {
    "weighted-sum": ("weights",),
    "compromise": ("weights", "utopia"),
    "conic": ("weights", "reference", "alpha"),
    "tchebycheff-mod": ("weights", "utopia", "alpha"),
    "pascoletti-serafini": ("anchor_a", "direction_r"),
    "benson-sum": (),
    "custom-g": ("expression",),
}

_JSON_KEYS = {"weights": "lambda", "exponent": "exponent", "reference": "reference",
              "utopia": "utopia", "alpha": "alpha", "anchor_a": "anchor_a",
              "direction_r": "direction_r", "bound": "bound",
              "anchor_point": "anchor_point", "expression": "expression"}


@dataclass(frozen=True)
class ScalarizationSpec:
    """One fully parameterized scalarization problem.

    ``bound`` adds the feasibility restriction f(x) <= bound to any
    method; ``anchor_point`` (benson-sum only) restricts to points weakly
    dominated by the named point's image.
    """

    method: str
    weights: Vector | None = None       # the weight vector (JSON key "lambda")
    exponent: float = 2.0               # compromise exponent, > 1
    reference: Vector | None = None
    utopia: Vector | None = None
    alpha: float | None = None
    anchor_a: Vector | None = None
    direction_r: Vector | None = None
    bound: Vector | None = None
    anchor_point: str | None = None
    expression: str | None = None
    _expr_ast: Expression | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        errors: list[str] = []
        if self.method not in METHODS:
            raise ValidationError([f"unknown method {self.method!r}"])
        for name in _REQUIRED_FIELDS[self.method]:
            if getattr(self, name) is None:
                errors.append(f"{self.method} requires {_JSON_KEYS[name]!r}")
        if self.method == "compromise" and not (self.exponent > 1):
            errors.append("compromise exponent must be > 1")
        if self.alpha is not None and self.alpha < 0:
            errors.append("alpha must be nonnegative")
        if self.method == "pascoletti-serafini" and self.direction_r is not None:
            if any(r < 0 for r in self.direction_r):
                errors.append("direction_r must be nonnegative")
            if all(r == 0 for r in self.direction_r):
                errors.append("direction_r must not be identically zero")
        if self.anchor_point is not None and self.method != "benson-sum":
            errors.append("anchor_point only applies to benson-sum")
        if self.method == "custom-g" and self.expression is not None:
            ast = parse_expression(self.expression)
            bad = [v for v in expression_variables(ast)
                   if not (v.startswith("y") and v[1:].isdigit() and int(v[1:]) >= 1)]
            if bad:
                errors.append(f"custom-g variables must be y1..yp, got {sorted(bad)}")
            else:
                object.__setattr__(self, "_expr_ast", ast)
        if errors:
            raise ValidationError(errors)

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ScalarizationSpec":
        if not isinstance(raw, dict) or "method" not in raw:
            raise ValidationError(["scalarization spec must be an object with 'method'"])
        kwargs: dict[str, Any] = {"method": raw["method"]}
        vectors = ("lambda", "reference", "utopia", "anchor_a", "direction_r", "bound")
        for key in vectors:
            if raw.get(key) is not None:
                attr = "weights" if key == "lambda" else key
                kwargs[attr] = tuple(float(v) for v in raw[key])
        if raw.get("exponent") is not None:
            kwargs["exponent"] = float(raw["exponent"])
        if raw.get("alpha") is not None:
            kwargs["alpha"] = float(raw["alpha"])
        if raw.get("anchor_point") is not None:
            kwargs["anchor_point"] = str(raw["anchor_point"])
        if raw.get("expression") is not None:
            kwargs["expression"] = str(raw["expression"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"method": self.method}
        for attr, key in _JSON_KEYS.items():
            value = getattr(self, attr)
            if value is None:
                continue
            if attr == "exponent" and self.method != "compromise":
                continue
            out[key] = list(value) if isinstance(value, tuple) else value
        return out


def _vec(y: Sequence[float], other: Sequence[float], what: str) -> None:
    if len(y) != len(other):
        raise DimensionMismatchError(
            f"{what} length {len(other)} does not match vector length {len(y)}")


def eval_scalarization(spec: ScalarizationSpec, y: Sequence[float]) -> float:
    """Value of the scalarizing function at objective vector ``y``.

    Returns +inf where the method itself is infeasible at ``y``
    (pascoletti-serafini with a violated rigid coordinate).
    """
    method = spec.method
    if method == "weighted-sum":
        _vec(y, spec.weights, "lambda")
        return float(np.dot(spec.weights, y))
    if method == "compromise":
        _vec(y, spec.weights, "lambda")
        _vec(y, spec.utopia, "utopia")
        shifted = [v - u for v, u in zip(y, spec.utopia)]
        if any(s < 0 for s in shifted):
            bad = min(i for i, s in enumerate(shifted) if s < 0)
            raise DomainError(
                f"compromise undefined: component {bad} lies below the utopia point")
        q = spec.exponent
        return float(sum(w * s ** q for w, s in zip(spec.weights, shifted)) ** (1.0 / q))
    if method == "conic":
        _vec(y, spec.weights, "lambda")
        _vec(y, spec.reference, "reference")
        diff = [v - r for v, r in zip(y, spec.reference)]
        return float(sum(w * d for w, d in zip(spec.weights, diff))
                     + spec.alpha * sum(abs(d) for d in diff))
    if method == "tchebycheff-mod":
        _vec(y, spec.weights, "lambda")
        _vec(y, spec.utopia, "utopia")
        diff = [v - u for v, u in zip(y, spec.utopia)]
        aug = spec.alpha * sum(diff)
        return float(max(w * d + aug for w, d in zip(spec.weights, diff)))
    if method == "pascoletti-serafini":
        _vec(y, spec.anchor_a, "anchor_a")
        _vec(y, spec.direction_r, "direction_r")
        t = -math.inf
        for v, a, r in zip(y, spec.anchor_a, spec.direction_r):
            if r == 0:
                if v > a:
                    return math.inf
            else:
                t = max(t, (v - a) / r)
        return t
    if method == "benson-sum":
        return float(math.fsum(y))
    # custom-g
    env = {f"y{i + 1}": float(v) for i, v in enumerate(y)}
    needed = expression_variables(spec._expr_ast)
    missing = needed - env.keys()
    if missing:
        raise DimensionMismatchError(
            f"expression references {sorted(missing)} but the vector has length {len(y)}")
    return eval_expression(spec._expr_ast, env)


def scalarization_function(spec: ScalarizationSpec) -> Callable[[Sequence[float]], float]:
    """The spec's scalarizing function as a plain callable."""
    return partial(eval_scalarization, spec)


@dataclass(frozen=True)
class SolveResult:
    minimizers: tuple[str, ...]     # sorted labels attaining the optimum
    value: float                    # +inf when nothing is feasible
    feasible_count: int

    def to_dict(self) -> dict:
        return {"minimizers": list(self.minimizers),
                "value": "inf" if math.isinf(self.value) and self.value > 0 else self.value,
                "feasible_count": self.feasible_count}


def solve_scalarization(spec: ScalarizationSpec,
                        instance: DiscreteInstance) -> SolveResult:
    """Exact argmin of the scalarizing function over the instance points.

    Feasibility filters (the spec's ``bound``, benson-sum's anchor) are
    applied first; ties are all reported.  An empty feasible set is a
    result (+inf), not an error.
    """
    bound = spec.bound
    anchor_image = None
    if spec.method == "benson-sum" and spec.anchor_point is not None:
        anchor_image = instance.vector(spec.anchor_point)

    values: dict[str, float] = {}
    for label, f in instance.points:
        if bound is not None:
            _vec(f, bound, "bound")
            if not dominates(f, bound, "weak"):
                continue
        if anchor_image is not None and not dominates(f, anchor_image, "weak"):
            continue
        values[label] = eval_scalarization(spec, f)

    if not values:
        return SolveResult((), math.inf, 0)
    best = min(values.values())
    minimizers = tuple(sorted(lbl for lbl, v in values.items() if v == best))
    return SolveResult(minimizers, best, len(values))


# --------------------------------------------------------------------------
# Validity: sufficient conditions for proper efficiency of minimizers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidityVerdict:
    guaranteed_proper: bool
    reason: str

    def to_dict(self) -> dict:
        return {"guaranteed_proper": self.guaranteed_proper, "reason": self.reason}


def check_param_validity(spec: ScalarizationSpec,
                         instance: DiscreteInstance | None = None) -> ValidityVerdict:
    """Does the parameterization guarantee properly efficient minimizers?

    The guarantee holds when every subgradient of the scalarizing function
    is componentwise bounded below by a strictly positive vector on a
    region containing the instance image.  Method-specific checks:
    strictly positive weights everywhere; conic additionally needs
    0 <= alpha < min(weights); compromise and the modified Tchebycheff
    need the utopia point strictly below the instance ideal (verified
    only when an instance is supplied).
    """
    method = spec.method

    def fail(reason: str) -> ValidityVerdict:
        return ValidityVerdict(False, reason)

    if method in ("pascoletti-serafini", "benson-sum"):
        return fail(f"{method} carries no positivity guarantee; "
                    "use it with the unboundedness diagnostic instead")
    if method == "custom-g":
        return fail("custom expression: no built-in guarantee; "
                    "run the gradient positivity check on a region of interest")

    w = spec.weights
    if any(v <= 0 for v in w):
        return fail("weights must be strictly positive")

    if method == "weighted-sum":
        return ValidityVerdict(True, "strictly positive weights: gradient == lambda > 0")

    if method == "conic":
        if not (spec.alpha < min(w)):
            return fail(f"requires 0 <= alpha < min(lambda) = {min(w)}, got alpha = {spec.alpha}")
        return ValidityVerdict(
            True, "0 <= alpha < min(lambda): subgradients lie in [lambda_i - alpha, "
                  "lambda_i + alpha], all strictly positive")

    # compromise / tchebycheff-mod: need the utopia point strictly below the ideal
    if method == "tchebycheff-mod" and not (spec.alpha is not None and spec.alpha > 0):
        return fail("requires alpha > 0")
    if instance is None:
        return fail("utopia point must lie strictly below the instance ideal; "
                    "no instance supplied to verify")
    ideal = ideal_point(instance)
    _vec(ideal, spec.utopia, "utopia")
    if not all(u < v for u, v in zip(spec.utopia, ideal)):
        return fail("utopia point is not strictly below the instance ideal")
    if method == "compromise":
        return ValidityVerdict(
            True, "positive weights, exponent > 1, utopia strictly below the ideal: "
                  "gradient strictly positive on the instance image")
    return ValidityVerdict(
        True, "positive weights, alpha > 0, utopia strictly below the ideal: "
              "subgradients componentwise >= alpha > 0")


# --------------------------------------------------------------------------
# Gradient positivity scan (finite-difference surrogate)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GradientScan:
    passed: bool
    witness: Vector | None           # first node violating the bound
    witness_gradient: Vector | None
    grid_min: Vector                 # componentwise minimum over all nodes

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "witness": None if self.witness is None else list(self.witness),
                "witness_gradient": (None if self.witness_gradient is None
                                     else list(self.witness_gradient)),
                "grid_min": list(self.grid_min)}


_JITTER_IRRATIONAL = (math.sqrt(5) - 1) / 2  # golden-ratio fraction


def _scan_axes(region: Sequence[Sequence[float]], density: int,
               jitter_seed: int | None) -> list[list[float]]:
    axes = []
    for k, (lo, hi) in enumerate(region):
        lo, hi = float(lo), float(hi)
        if not (lo < hi):
            raise ValidationError([f"region axis {k} is degenerate"])
        if jitter_seed is None:
            axes.append([lo + (hi - lo) * (i / (density - 1)) for i in range(density)])
        else:
            # irrational offset keeps nodes off kink hyperplanes of |.| and max
            frac = ((jitter_seed + 1) * _JITTER_IRRATIONAL + k * _JITTER_IRRATIONAL ** 2) % 1.0
            step = (hi - lo) / density
            axes.append([lo + step * (i + 0.25 + 0.5 * frac) for i in range(density)])
    return axes


def _fd_gradient(g: Callable[[Sequence[float]], float], y: list[float],
                 step_scale: float) -> list[float]:
    grad = []
    for i in range(len(y)):
        h = step_scale * (1.0 + abs(y[i]))
        up = list(y)
        dn = list(y)
        up[i] += h
        dn[i] -= h
        grad.append((g(up) - g(dn)) / (2 * h))
    return grad


def check_subdiff_positive(g: Callable[[Sequence[float]], float],
                           region: Sequence[Sequence[float]],
                           grid_density: int,
                           eps: Sequence[float] | float,
                           *, fd_step_scale: float = 1e-6,
                           tol: float = 1e-7,
                           jitter_seed: int | None = None) -> GradientScan:
    """Scan a box for gradient components dropping below ``eps``.

    Central finite differences at every grid node; passes iff every
    component of every gradient is >= eps - tol.  The first violating
    node (lexicographic grid order) is reported with its gradient.  With
    ``jitter_seed`` set, nodes are shifted off the regular lattice by an
    irrational fraction of the spacing, avoiding kinks of the built-in
    nonsmooth scalarizations; endpoints are then not sampled.
    """
    if grid_density < 2:
        raise ValidationError(["grid_density must be at least 2"])
    dims = len(region)
    eps_vec = [float(eps)] * dims if isinstance(eps, (int, float)) else [float(e) for e in eps]
    if len(eps_vec) != dims:
        raise DimensionMismatchError("eps length does not match region dimension")
    if any(e <= 0 for e in eps_vec):
        raise ValidationError(["eps must be strictly positive"])
    axes = _scan_axes(region, grid_density, jitter_seed)

    nodes: list[list[float]] = [[]]
    for axis in axes:
        nodes = [node + [x] for node in nodes for x in axis]

    grid_min = [math.inf] * dims
    failure: tuple[Vector, Vector] | None = None
    for node in nodes:
        value = g(node)
        if not math.isfinite(value):
            raise DomainError(f"function is non-finite at node {tuple(node)}")
        grad = _fd_gradient(g, node, fd_step_scale)
        if any(not math.isfinite(d) for d in grad):
            raise DomainError(f"gradient is non-finite at node {tuple(node)}")
        grid_min = [min(m, d) for m, d in zip(grid_min, grad)]
        if failure is None and any(d < e - tol for d, e in zip(grad, eps_vec)):
            failure = (tuple(node), tuple(grad))
    if failure is None:
        return GradientScan(True, None, None, tuple(grid_min))
    return GradientScan(False, failure[0], failure[1], tuple(grid_min))


# --------------------------------------------------------------------------
# Unboundedness diagnostic
# --------------------------------------------------------------------------

NO_PROPER_MESSAGE = ("no properly efficient solution "
                     "(scalarization unbounded below under the image bound)")


@dataclass(frozen=True)
class UnboundednessReport:
    classification: str              # diverging | bounded | inconclusive | vacuous
    truncations: tuple[float, ...]
    values: tuple[float, ...]        # optimal value per truncation (inf = infeasible)
    no_proper_solutions: bool
    note: str

    def to_dict(self) -> dict:
        return {"classification": self.classification,
                "truncations": list(self.truncations),
                "values": ["inf" if math.isinf(v) and v > 0 else v for v in self.values],
                "no_proper_solutions": self.no_proper_solutions,
                "note": self.note}


def _classify_values(values: Sequence[float]) -> str:
    if all(math.isinf(v) for v in values):
        return "vacuous"
    if any(math.isinf(v) for v in values):
        return "inconclusive"
    mags = [abs(v) for v in values]
    if max(mags) <= BOUNDED_FACTOR * min(mags) and max(values) * min(values) >= 0:
        return "bounded"
    nonincreasing = all(a >= b for a, b in zip(values, values[1:]))
    if (nonincreasing and values[-1] < min(0.0, values[0])
            and abs(values[-1]) >= DIVERGING_FACTOR * max(abs(values[0]), 1e-12)):
        return "diverging"
    return "inconclusive"


def check_unbounded(analytic: AnalyticInstance, spec: ScalarizationSpec,
                    truncations: Sequence[float]) -> UnboundednessReport:
    """Probe a scalarization for unboundedness under growing truncations.

    For each truncation radius the domain is sampled and the (bounded,
    where the spec says so) scalarization solved exactly; optimal values
    falling without bound are evidence that the problem has no properly
    efficient solution at all.  Bounded values prove nothing.  Compact
    domains are sampled once per entry (the radius is then irrelevant).
    """
    if not truncations:
        raise ValidationError(["truncation schedule must be non-empty"])
    if analytic.has_unbounded_side:
        schedule = list(truncations)
    else:
        # compact domain: reuse the spacing refinement machinery
        schedule = None
    values: list[float] = []
    if schedule is None:
        inst = sample(analytic)
        result = solve_scalarization(spec, inst)
        values = [result.value] * len(truncations)
    else:
        _, instances = refinement_samples(analytic, schedule)
        for inst in instances:
            values.append(solve_scalarization(spec, inst).value)
    classification = _classify_values(values)
    diverging = classification == "diverging"
    if classification == "vacuous":
        note = "the image bound excludes every sampled point"
    elif diverging:
        note = NO_PROPER_MESSAGE
    else:
        note = ("no conclusion: a bounded restriction of a scalarization "
                "carries no properness information")
    return UnboundednessReport(classification=classification,
                               truncations=tuple(truncations),
                               values=tuple(values),
                               no_proper_solutions=diverging,
                               note=note)
