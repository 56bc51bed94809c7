"""Objective transformations and the audits that justify them.

A transform maps objective space to objective space, either one component
at a time (output i depends only on input i) or generally (each output
may read all inputs).  Strictly increasing componentwise maps preserve
the dominance order exactly; the audits below check the quantitative
sufficient conditions under which proper efficiency is preserved too:

* Jacobian conditions: every (finite-difference) Jacobian on the domain
  box is componentwise nonnegative and kills no nonnegative direction
  (for a nonnegative matrix that is exactly "no zero column").
* Componentwise conditions on the closed instance range: continuity,
  strictly positive derivative, and monotonicity of both the map and its
  derivative.  Endpoints are decisive and audited with one-sided
  differences.

``compare_proper_sets`` puts the audits to work: it compares efficient
sets before and after a transform and, for sampled analytic instances,
compares the growth of the per-anchor trade-off constant under grid
refinement.  Divergence-based verdicts are diagnostics, never proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .analytic import (AnalyticInstance, Expression, eval_expression,
                       expression_variables, grid_coordinates, parse_expression,
                       print_expression, substitute)
from .certify import (anchored_m_value, certify_geoffrion, classify_growth,
                      refinement_samples)
from .core import DiscreteInstance, Vector, efficient_set, validate_instance
from .errors import DomainError, EvaluationError, ValidationError

_FD_SCALE = 1e-6
_ZERO_TOL = 1e-7
_DERIV_POS_TOL = 1e-9


@dataclass(frozen=True)
class TransformSpec:
    """A componentwise or general smooth map of objective space.

    ``components`` are expressions: componentwise maps use the single
    variable ``y`` (component i applied to coordinate i); general maps
    use ``y1..yp``.  ``domain_box`` bounds the inputs the map is meant
    for; instance images must lie inside it.  ``inverse`` optionally
    declares the inverse map with its own domain box.
    """

    kind: str                                # componentwise | general
    components: tuple[Expression, ...]
    domain_box: tuple[tuple[float, float], ...]
    inverse: "TransformSpec | None" = None

    def __post_init__(self):
        errors: list[str] = []
        if self.kind not in ("componentwise", "general"):
            errors.append(f"kind must be componentwise or general, got {self.kind!r}")
        if len(self.components) < 2:
            errors.append("a transform needs at least two output components")
        for lo, hi in self.domain_box:
            if not (lo < hi):
                errors.append(f"degenerate domain interval [{lo}, {hi}]")
        if self.kind == "componentwise":
            if len(self.domain_box) != len(self.components):
                errors.append("componentwise transform needs one domain interval per component")
            for k, comp in enumerate(self.components):
                extra = expression_variables(comp) - {"y"}
                if extra:
                    errors.append(
                        f"component {k}: componentwise expressions use only 'y', got {sorted(extra)}")
        else:
            allowed = {f"y{i + 1}" for i in range(len(self.domain_box))}
            for k, comp in enumerate(self.components):
                extra = expression_variables(comp) - allowed
                if extra:
                    errors.append(f"component {k}: unknown variables {sorted(extra)}")
        if errors:
            raise ValidationError(errors)

    @property
    def input_dim(self) -> int:
        return len(self.domain_box)

    @property
    def output_dim(self) -> int:
        return len(self.components)

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "TransformSpec":
        if not isinstance(raw, dict) or "components" not in raw or "domain" not in raw:
            raise ValidationError(["transform must be an object with 'kind', "
                                   "'components' and 'domain'"])
        inverse = None
        if raw.get("inverse") is not None:
            inv = dict(raw["inverse"])
            inv.setdefault("kind", raw.get("kind", "componentwise"))
            inverse = cls.from_dict(inv)
        return cls(kind=str(raw.get("kind", "componentwise")),
                   components=tuple(parse_expression(c) for c in raw["components"]),
                   domain_box=tuple((float(lo), float(hi)) for lo, hi in raw["domain"]),
                   inverse=inverse)

    def to_dict(self) -> dict:
        out = {"kind": self.kind,
               "components": [print_expression(c) for c in self.components],
               "domain": [list(iv) for iv in self.domain_box]}
        if self.inverse is not None:
            out["inverse"] = self.inverse.to_dict()
        return out

    def contains(self, y: Sequence[float]) -> bool:
        return all(lo <= v <= hi for v, (lo, hi) in zip(y, self.domain_box))


def transform_vector(tspec: TransformSpec, y: Sequence[float]) -> Vector:
    """Image of one objective vector (no domain check)."""
    if len(y) != tspec.input_dim:
        raise ValidationError([f"transform expects {tspec.input_dim} inputs, got {len(y)}"])
    if tspec.kind == "componentwise":
        return tuple(eval_expression(comp, {"y": float(v)})
                     for comp, v in zip(tspec.components, y))
    env = {f"y{i + 1}": float(v) for i, v in enumerate(y)}
    return tuple(eval_expression(comp, env) for comp in tspec.components)


def apply_transform(tspec: TransformSpec,
                    source: DiscreteInstance | AnalyticInstance
                    ) -> DiscreteInstance | AnalyticInstance:
    """Pointwise image of an instance; labels are preserved.

    Discrete instances are mapped point by point after a domain-box check
    (the offending label is named on failure).  Analytic instances get
    composed objective expressions; their images are checked against the
    box when they are eventually sampled.
    """
    if isinstance(source, AnalyticInstance):
        if tspec.input_dim != source.p:
            raise ValidationError([f"transform expects {tspec.input_dim} inputs, "
                                   f"instance has p={source.p}"])
        if tspec.kind == "componentwise":
            composed = tuple(substitute(comp, {"y": obj})
                             for comp, obj in zip(tspec.components, source.objectives))
        else:
            bindings = {f"y{i + 1}": obj for i, obj in enumerate(source.objectives)}
            composed = tuple(substitute(comp, bindings) for comp in tspec.components)
        return AnalyticInstance(variables=source.variables, objectives=composed,
                                default_samples=source.default_samples)

    if tspec.input_dim != source.p:
        raise ValidationError([f"transform expects {tspec.input_dim} inputs, "
                               f"instance has p={source.p}"])
    points = []
    for label, f in source.points:
        if not tspec.contains(f):
            raise DomainError(f"point {label!r} lies outside the transform domain box")
        try:
            points.append({"label": label, "f": list(transform_vector(tspec, f))})
        except EvaluationError as exc:
            raise DomainError(f"transform failed at point {label!r}: {exc}") from exc
    return validate_instance({"p": tspec.output_dim, "points": points})


# --------------------------------------------------------------------------
# Jacobian audit
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobianAudit:
    nonneg: bool
    kernel_trivial: bool | None          # None = not evaluated (nonneg failed)
    nonneg_witness: tuple[Vector, int, int, float] | None  # node, row, col, entry
    kernel_witness: tuple[Vector, int] | None              # node, zero column

    def to_dict(self) -> dict:
        return {
            "nonneg": self.nonneg,
            "kernel_trivial": ("not-evaluated" if self.kernel_trivial is None
                               else self.kernel_trivial),
            "nonneg_witness": (None if self.nonneg_witness is None else {
                "node": list(self.nonneg_witness[0]),
                "row": self.nonneg_witness[1],
                "column": self.nonneg_witness[2],
                "entry": self.nonneg_witness[3]}),
            "kernel_witness": (None if self.kernel_witness is None else {
                "node": list(self.kernel_witness[0]),
                "zero_column": self.kernel_witness[1]}),
        }


def _fd_derivative(g: Callable[[float], float], s: float,
                   lo: float, hi: float) -> float:
    """Derivative estimate staying inside [lo, hi] (one-sided at edges)."""
    h = _FD_SCALE * (1.0 + abs(s))
    if s - h >= lo and s + h <= hi:
        return (g(s + h) - g(s - h)) / (2 * h)
    if s + h <= hi:
        return (g(s + h) - g(s)) / h
    return (g(s) - g(s - h)) / h


def _grid(lo: float, hi: float, density: int) -> list[float]:
    return [lo + (hi - lo) * (k / (density - 1)) for k in range(density)]


def check_jacobian_conditions(tspec: TransformSpec,
                              grid_density: int = 11) -> JacobianAudit:
    """Finite-difference Jacobian audit over the transform's domain box.

    ``nonneg`` holds when every entry of every sampled Jacobian is >= 0
    (up to finite-difference noise).  ``kernel_trivial`` holds when no
    nonnegative direction is annihilated; under nonnegativity that is
    equivalent to "no column of the Jacobian vanishes", and for
    componentwise maps to "every diagonal entry is strictly positive".
    When ``nonneg`` fails the kernel criterion is unsound and reported as
    not evaluated.
    """
    if grid_density < 2:
        raise ValidationError(["grid_density must be at least 2"])

    nonneg_witness = None
    kernel_witness = None

    if tspec.kind == "componentwise":
        for i, comp in enumerate(tspec.components):
            lo, hi = tspec.domain_box[i]

            def g(s: float, comp=comp) -> float:
                return eval_expression(comp, {"y": s})

            for s in _grid(lo, hi, grid_density):
                try:
                    d = _fd_derivative(g, s, lo, hi)
                except EvaluationError as exc:
                    raise DomainError(
                        f"derivative of component {i} failed at {s!r}: {exc}") from exc
                if d < -_ZERO_TOL and nonneg_witness is None:
                    nonneg_witness = ((s,), i, i, float(d))
                if d <= _ZERO_TOL and kernel_witness is None:
                    kernel_witness = ((s,), i)
    else:
        axes = [_grid(lo, hi, grid_density) for lo, hi in tspec.domain_box]
        nodes: list[tuple[float, ...]] = [()]
        for axis in axes:
            nodes = [node + (s,) for node in nodes for s in axis]
        box = tspec.domain_box
        for node in nodes:
            M = np.zeros((tspec.output_dim, tspec.input_dim))
            for j in range(tspec.input_dim):
                def g_col(s: float, j=j, node=node) -> list[float]:
                    probe = list(node)
                    probe[j] = s
                    return list(transform_vector(tspec, probe))

                lo, hi = box[j]
                s = node[j]
                h = _FD_SCALE * (1.0 + abs(s))
                try:
                    if s - h >= lo and s + h <= hi:
                        up, dn = g_col(s + h), g_col(s - h)
                        M[:, j] = [(a - b) / (2 * h) for a, b in zip(up, dn)]
                    elif s + h <= hi:
                        up, at = g_col(s + h), g_col(s)
                        M[:, j] = [(a - b) / h for a, b in zip(up, at)]
                    else:
                        at, dn = g_col(s), g_col(s - h)
                        M[:, j] = [(a - b) / h for a, b in zip(at, dn)]
                except EvaluationError as exc:
                    raise DomainError(
                        f"Jacobian column {j} failed at node {node}: {exc}") from exc
            if nonneg_witness is None:
                bad = np.argwhere(M < -_ZERO_TOL)
                if bad.size:
                    r, c = (int(v) for v in bad[0])
                    nonneg_witness = (node, r, c, float(M[r, c]))
            if kernel_witness is None:
                zero_cols = np.flatnonzero(np.all(np.abs(M) <= _ZERO_TOL, axis=0))
                if zero_cols.size:
                    kernel_witness = (node, int(zero_cols[0]))

    nonneg = nonneg_witness is None
    if not nonneg:
        return JacobianAudit(False, None, nonneg_witness, kernel_witness)
    return JacobianAudit(True, kernel_witness is None, None, kernel_witness)


# --------------------------------------------------------------------------
# Componentwise sufficient conditions on the closed instance range
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentConditions:
    component: int
    interval: tuple[float, float]
    continuous: bool
    derivative_positive: bool
    increasing: bool                       # both the map and its derivative
    witnesses: dict[str, float]

    @property
    def all_pass(self) -> bool:
        return self.continuous and self.derivative_positive and self.increasing

    def to_dict(self) -> dict:
        return {"component": self.component,
                "interval": list(self.interval),
                "continuous": self.continuous,
                "derivative_positive": self.derivative_positive,
                "increasing": self.increasing,
                "witnesses": dict(self.witnesses)}


def componentwise_conditions(tspec: TransformSpec, instance: DiscreteInstance,
                             grid_density: int = 201) -> tuple[ComponentConditions, ...]:
    """Audit each component map on the closed range of its objective.

    Checks, per component, on [min_i, max_i] over the instance:
    a continuity proxy (finite values, no outlier jumps between adjacent
    nodes), strictly positive derivative including one-sided derivatives
    at the closed endpoints (endpoints are decisive), and monotonicity of
    both the values and the derivative.
    """
    if tspec.kind != "componentwise":
        raise ValidationError(["conditions audit applies to componentwise transforms"])
    if tspec.input_dim != instance.p:
        raise ValidationError([f"transform expects {tspec.input_dim} inputs, "
                               f"instance has p={instance.p}"])
    if grid_density < 3:
        raise ValidationError(["grid_density must be at least 3"])
    F = instance.matrix
    results = []
    for i, comp in enumerate(tspec.components):
        lo = float(F[:, i].min())
        hi = float(F[:, i].max())
        box_lo, box_hi = tspec.domain_box[i]

        def g(s: float, comp=comp) -> float:
            return eval_expression(comp, {"y": s})

        witnesses: dict[str, float] = {}
        if lo == hi:
            nodes = [lo]
        else:
            nodes = _grid(lo, hi, grid_density)
        try:
            values = [g(s) for s in nodes]
            derivs = [_fd_derivative(g, s, box_lo, box_hi) for s in nodes]
        except EvaluationError as exc:
            raise DomainError(f"component {i} evaluation failed on [{lo}, {hi}]: {exc}") from exc

        # continuity proxy: adjacent jumps bounded by an outlier test
        continuous = True
        if len(values) > 2:
            jumps = [abs(b - a) for a, b in zip(values, values[1:])]
            scale = float(np.percentile(jumps, 75))
            threshold = 50.0 * scale + 1e-9 * (1.0 + max(abs(v) for v in values))
            for k, jump in enumerate(jumps):
                if jump > threshold:
                    continuous = False
                    witnesses["discontinuity_at"] = nodes[k]
                    break

        # differentiability proxy at interior nodes: one-sided slopes agree
        derivative_positive = True
        for k, (s, d) in enumerate(zip(nodes, derivs)):
            h = _FD_SCALE * (1.0 + abs(s))
            if s - h >= box_lo and s + h <= box_hi:
                left = (g(s) - g(s - h)) / h
                right = (g(s + h) - g(s)) / h
                if abs(left - right) > 1e-3 * (1.0 + max(abs(left), abs(right))):
                    derivative_positive = False
                    witnesses["nondifferentiable_at"] = s
                    break
            if d <= _DERIV_POS_TOL:
                derivative_positive = False
                witnesses["nonpositive_derivative_at"] = s
                break

        increasing = True
        slack = 1e-9 * (1.0 + max(abs(v) for v in values))
        for k in range(len(nodes) - 1):
            if values[k + 1] < values[k] - slack:
                increasing = False
                witnesses["value_decrease_at"] = nodes[k + 1]
                break
            if derivs[k + 1] < derivs[k] - max(1e-9, 1e-6 * abs(derivs[k])):
                increasing = False
                witnesses["derivative_decrease_at"] = nodes[k + 1]
                break

        results.append(ComponentConditions(
            component=i, interval=(lo, hi), continuous=continuous,
            derivative_positive=derivative_positive, increasing=increasing,
            witnesses=witnesses))
    return tuple(results)


# --------------------------------------------------------------------------
# Before/after comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PreservationReport:
    efficient_before: tuple[str, ...]
    efficient_after: tuple[str, ...]
    m_before: dict[str, float | None]          # per efficient label / anchor key
    m_after: dict[str, float | None]
    divergence_before: dict[str, dict] | None  # anchor key -> divergence summary
    divergence_after: dict[str, dict] | None
    verdict: str        # preserved | changed | diagnostic-divergence-changed

    def to_dict(self) -> dict:
        return {"efficient_before": list(self.efficient_before),
                "efficient_after": list(self.efficient_after),
                "M_before": self.m_before,
                "M_after": self.m_after,
                "divergence_before": self.divergence_before,
                "divergence_after": self.divergence_after,
                "verdict": self.verdict}


def _finite_m_values(instance: DiscreteInstance, labels: Sequence[str]) -> dict[str, float | None]:
    out: dict[str, float | None] = {}
    for label in labels:
        cert = certify_geoffrion(instance, label)
        out[label] = cert.m_min
    return out


def _anchor_key(anchor: Sequence[float]) -> str:
    return ";".join(repr(float(a)) for a in anchor)


def _anchor_divergence(instances: Sequence[DiscreteInstance],
                       schedule: Sequence[float], kind: str,
                       anchors: Sequence[tuple[float, ...]]
                       ) -> tuple[dict[str, dict], dict[str, float | None]]:
    reports: dict[str, dict] = {}
    last_m: dict[str, float | None] = {}
    for anchor in anchors:
        ms = []
        efficient_everywhere = True
        for inst in instances:
            _, efficient, m = anchored_m_value(inst, anchor)
            efficient_everywhere &= efficient
            ms.append(m)
        if efficient_everywhere:
            classification = classify_growth(ms)
        else:
            classification = "inconclusive"
        key = _anchor_key(anchor)
        reports[key] = {"refinement": kind, "schedule": list(schedule),
                        "M_values": [None if math.isnan(m) else m for m in ms],
                        "classification": classification}
        last_m[key] = None if math.isnan(ms[-1]) else ms[-1]
    return reports, last_m


def compare_proper_sets(source: DiscreteInstance | AnalyticInstance,
                        tspec: TransformSpec,
                        schedule: Sequence[float] | None = None,
                        anchors: Sequence[Sequence[float]] | None = None
                        ) -> PreservationReport:
    """Compare efficiency diagnostics before and after a transform.

    Finite instances: efficient sets and per-efficient-label trade-off
    constants before/after; verdict "preserved" iff the efficient sets
    coincide.

    Analytic instances (``schedule`` required): both problems are sampled
    on the same refinement grids; per-anchor trade-off growth is
    classified before and after.  ``anchors`` defaults to the efficient
    samples of the first refinement.  Verdict "changed" when efficient
    sets differ or some anchor's classification flips between bounded and
    diverging; "diagnostic-divergence-changed" when the only movement
    involves an inconclusive classification.
    """
    if isinstance(source, DiscreteInstance):
        after = apply_transform(tspec, source)
        eff_before = sorted(efficient_set(source))
        eff_after = sorted(efficient_set(after))
        report_labels = sorted(set(eff_before) | set(eff_after))
        verdict = "preserved" if eff_before == eff_after else "changed"
        return PreservationReport(
            efficient_before=tuple(eff_before), efficient_after=tuple(eff_after),
            m_before=_finite_m_values(source, report_labels),
            m_after=_finite_m_values(after, report_labels),
            divergence_before=None, divergence_after=None, verdict=verdict)

    if schedule is None:
        raise ValidationError(["a refinement schedule is required for analytic instances"])
    transformed = apply_transform(tspec, source)
    kind, before_samples = refinement_samples(source, schedule)
    _, after_samples = refinement_samples(transformed, schedule)

    # images must live inside the declared domain box
    for inst in before_samples:
        for label, f in inst.points:
            if not tspec.contains(f):
                raise DomainError(f"sampled point {label!r} lies outside the transform domain box")

    eff_before = sorted(efficient_set(before_samples[0]))
    eff_after = sorted(efficient_set(after_samples[0]))
    if anchors is None:
        anchor_list = [grid_coordinates(label) for label in eff_before]
    else:
        anchor_list = [tuple(float(v) for v in a) for a in anchors]

    div_before, m_before = _anchor_divergence(before_samples, schedule, kind, anchor_list)
    div_after, m_after = _anchor_divergence(after_samples, schedule, kind, anchor_list)

    decisive = {"bounded", "diverging"}
    flips = [(div_before[k]["classification"], div_after[k]["classification"])
             for k in div_before if div_before[k]["classification"]
             != div_after[k]["classification"]]
    if eff_before != eff_after:
        verdict = "changed"
    elif any(b in decisive and a in decisive for b, a in flips):
        verdict = "changed"
    elif flips:
        verdict = "diagnostic-divergence-changed"
    else:
        verdict = "preserved"
    return PreservationReport(
        efficient_before=tuple(eff_before), efficient_after=tuple(eff_after),
        m_before=m_before, m_after=m_after,
        divergence_before=div_before, divergence_after=div_after, verdict=verdict)
