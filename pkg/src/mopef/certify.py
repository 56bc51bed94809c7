"""Proper-efficiency certificates for finite instances.

Three classical definitions are certified exactly on finite instances:

* Geoffrion: the point is efficient and all trade-off ratios against
  improving competitors are bounded by a constant M.  The certificate
  reports the least such constant over the finite set.
* Benson: the closed conic hull of ``image(X) + R^p_+ - f(point)`` meets
  the nonpositive orthant only at the origin.  With finitely many points
  the hull is finitely generated and therefore closed, so the condition
  reduces to a small linear feasibility problem.
* Henig: the point is efficient with respect to some member of the
  polyhedral cone family ``C_delta = {y : y_i + delta * sum(y) >= 0}``,
  which canonically realizes "convex pointed cone strictly containing the
  nonnegative orthant".  The certificate reports the supremum of workable
  delta values in closed form.

On a finite instance the three verdicts always agree; the test suite
checks this on randomized instances.  An improperness *diagnostic* for
sampled continuous problems is provided by :func:`divergence_study`,
which tracks the growth of the Geoffrion constant under grid refinement.
Growth classifications are heuristic evidence, never proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import AnalyticInstance, nearest_label, sample
from .core import DiscreteInstance, Vector
from .errors import ValidationError
from .simplex import feasible_point

DEFAULT_TOL = 1e-9

# divergence heuristics: total growth >= DIVERGING_FACTOR across the
# schedule flags "diverging"; overall spread <= BOUNDED_FACTOR flags
# "bounded"; anything else is "inconclusive"
DIVERGING_FACTOR = 1e2
BOUNDED_FACTOR = 2.0


# --------------------------------------------------------------------------
# Certificates
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BindingPair:
    competitor: str
    improving: int
    worsening: int
    ratio: float

    def to_dict(self) -> dict:
        return {"competitor": self.competitor, "improving": self.improving,
                "worsening": self.worsening, "ratio": self.ratio}


@dataclass(frozen=True)
class GeoffrionCertificate:
    efficient: bool
    m_min: float | None            # None when the point is inefficient
    binding_pairs: tuple[BindingPair, ...]

    def to_dict(self) -> dict:
        return {"efficient": self.efficient,
                "M_min": self.m_min,
                "binding_pairs": [bp.to_dict() for bp in self.binding_pairs]}


@dataclass(frozen=True)
class BensonViolation:
    direction: Vector                       # d <= 0, sum|d_i| = 1
    multipliers: tuple[tuple[str, float], ...]  # generator name -> weight

    def to_dict(self) -> dict:
        return {"direction": list(self.direction),
                "multipliers": [{"generator": g, "coefficient": c}
                                for g, c in self.multipliers]}


@dataclass(frozen=True)
class BensonCertificate:
    proper: bool
    violation: BensonViolation | None

    def to_dict(self) -> dict:
        return {"proper": self.proper,
                "violation": None if self.violation is None else self.violation.to_dict()}


@dataclass(frozen=True)
class HenigCertificate:
    proper: bool
    delta_sup: float               # math.inf when no competitor ever blocks
    blocking: str | None           # competitor attaining the supremum

    def to_dict(self) -> dict:
        return {"proper": self.proper,
                "delta_sup": "inf" if math.isinf(self.delta_sup) else self.delta_sup,
                "blocking": self.blocking}


def _differences(instance: DiscreteInstance, label: str) -> tuple[np.ndarray, list[str]]:
    """Rows of f(point) - f(competitor) for all other labels."""
    idx = instance.index(label)
    F = instance.matrix
    keep = [k for k in range(len(instance)) if k != idx]
    D = F[idx] - F[keep]
    return D, [instance.labels[k] for k in keep]


def _trade_off_stats(D: np.ndarray) -> tuple[bool, float, np.ndarray]:
    """(efficient, least trade-off constant, per-competitor bound).

    Row d of ``D`` is point-minus-competitor.  A competitor improves
    objective i when d[i] > 0 and worsens j when d[j] < 0.  Its bound is
    max(d+) / max(-d); a row with an improvement but no worsening means
    the competitor dominates the point.
    """
    if D.size == 0:
        return True, 0.0, np.zeros(0)
    pos = D.max(axis=1, initial=0.0)
    improves = pos > 0
    neg = -D.min(axis=1, initial=0.0)
    dominated = improves & (neg <= 0) & (D >= 0).all(axis=1)
    per = np.zeros(len(D))
    active = improves & ~dominated
    per[active] = pos[active] / neg[active]
    if dominated.any():
        return False, math.nan, per
    m = float(per.max(initial=0.0))
    return True, m, per


def certify_geoffrion(instance: DiscreteInstance, label: str) -> GeoffrionCertificate:
    """Bounded-trade-off certificate by brute force over competitors.

    For every competitor improving some objective i, the binding trade-off
    is min over worsened objectives j of (improvement_i / worsening_j); the
    certificate constant is the maximum of those minima (0 by convention
    when nothing improves on the point).  All pairs attaining the constant
    are reported, sorted by competitor label.
    """
    D, names = _differences(instance, label)
    efficient, m_min, per = _trade_off_stats(D)
    if not efficient:
        return GeoffrionCertificate(False, None, ())
    pairs: list[BindingPair] = []
    if m_min > 0:
        for k, d in enumerate(D):
            if per[k] != m_min:
                continue
            worst = -d.min()
            for i in np.flatnonzero(d == d.max()):
                for j in np.flatnonzero(d == -worst):
                    pairs.append(BindingPair(names[k], int(i), int(j), m_min))
    pairs.sort(key=lambda bp: (bp.competitor, bp.improving, bp.worsening))
    return GeoffrionCertificate(True, m_min, tuple(pairs))


def cone_membership(y: Sequence[float], delta: float) -> bool:
    """Membership of y in {v : v_i + delta * sum(v) >= 0 for all i}."""
    if delta < 0:
        raise ValidationError(["delta must be nonnegative"])
    total = math.fsum(y)
    return all(v + delta * total >= 0 for v in y)


def henig_threshold(d: Sequence[float]) -> float:
    """Least delta >= 0 at which ``d`` enters the cone, +inf if it never does.

    For s = sum(d) > 0 the inequalities d_i + delta*s >= 0 give
    delta >= max(-d_i)/s; for s <= 0 (and d != 0) membership fails for
    every positive delta.
    """
    s = math.fsum(d)
    if s <= 0:
        return math.inf
    return max(-v for v in d) / s


def certify_henig(instance: DiscreteInstance, label: str) -> HenigCertificate:
    """Closed-form supremum of cone parameters separating the point.

    For each competitor difference d = f(point) - f(competitor), the entry
    threshold of the cone family is computed in closed form; the supremum
    of workable parameters is the minimum threshold over competitors.
    The point is proper iff that supremum is positive (equivalently, iff
    it is efficient — finite instances leave no gap).
    """
    D, names = _differences(instance, label)
    delta_sup = math.inf
    blocking: str | None = None
    for k, d in enumerate(D):
        if not d.any():
            continue  # identical image: never blocks
        threshold = henig_threshold(d)
        if threshold < delta_sup or (threshold == delta_sup and blocking is not None
                                     and names[k] < blocking):
            delta_sup = threshold
            blocking = names[k]
    delta_sup = max(delta_sup, 0.0)
    return HenigCertificate(proper=delta_sup > 0,
                            delta_sup=delta_sup,
                            blocking=None if math.isinf(delta_sup) else blocking)


def certify_benson(instance: DiscreteInstance, label: str,
                   tol: float = DEFAULT_TOL) -> BensonCertificate:
    """Conic-hull certificate via a small linear feasibility problem.

    Generators are the competitor differences f(x) - f(point) together
    with the unit coordinate vectors.  The point fails the criterion iff
    some nonnegative combination equals a nonzero nonpositive direction,
    normalized here by sum(-d_i) = 1:

        sum_g mu_g * g + s = 0,  sum_i s_i = 1,  mu >= 0, s >= 0

    with d = -s.  Feasibility is decided by the in-package phase-1 simplex;
    when feasible, the multipliers are returned so the direction can be
    reconstructed and checked independently.
    """
    idx = instance.index(label)
    F = instance.matrix
    p = instance.p
    keep = [k for k in range(len(instance)) if k != idx]
    gens = [F[k] - F[idx] for k in keep]
    names = [instance.labels[k] for k in keep] + [f"axis:{i}" for i in range(p)]
    gens.extend(np.eye(p))

    G = np.array(gens).T                       # p x m generator matrix
    m = G.shape[1]
    A = np.zeros((p + 1, m + p))
    A[:p, :m] = G
    A[:p, m:] = np.eye(p)
    A[p, m:] = 1.0
    b = np.zeros(p + 1)
    b[p] = 1.0

    x = feasible_point(A, b, tol=tol)
    if x is None:
        return BensonCertificate(True, None)
    mu = x[:m]
    s = x[m:]
    direction = tuple(-float(v) for v in s)
    multipliers = tuple((names[j], float(mu[j])) for j in range(m) if mu[j] > tol)
    return BensonCertificate(False, BensonViolation(direction, multipliers))


def certify_all(instance: DiscreteInstance, label: str,
                tol: float = DEFAULT_TOL) -> dict:
    return {
        "geoffrion": certify_geoffrion(instance, label).to_dict(),
        "benson": certify_benson(instance, label, tol=tol).to_dict(),
        "henig": certify_henig(instance, label).to_dict(),
    }


# --------------------------------------------------------------------------
# Divergence diagnostics on sampled analytic instances
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DivergenceReport:
    refinement: str                  # "spacing" or "truncation"
    schedule: tuple[float, ...]
    m_values: tuple[float, ...]
    classification: str              # bounded | diverging | inconclusive
    log_slope: float | None          # slope of log M against log refinement

    def to_dict(self) -> dict:
        return {"refinement": self.refinement,
                "schedule": list(self.schedule),
                "M_values": list(self.m_values),
                "classification": self.classification,
                "log_slope": self.log_slope}


def classify_growth(values: Sequence[float]) -> str:
    """Deterministic growth classification of nonnegative diagnostics."""
    vals = list(values)
    lo, hi = min(vals), max(vals)
    if hi <= BOUNDED_FACTOR * lo:
        return "bounded"
    nondecreasing = all(a <= b for a, b in zip(vals, vals[1:]))
    if nondecreasing and hi > lo and (vals[0] == 0 or vals[-1] >= DIVERGING_FACTOR * vals[0]):
        return "diverging"
    return "inconclusive"


def _log_slope(refinements: Sequence[float], values: Sequence[float]) -> float | None:
    pairs = [(r, v) for r, v in zip(refinements, values) if r > 0 and v > 0]
    if len(pairs) < 2:
        return None
    xs = np.log([r for r, _ in pairs])
    ys = np.log([v for _, v in pairs])
    if np.allclose(xs, xs[0]):
        return None
    return float(np.polyfit(xs, ys, 1)[0])


def _validate_schedule(analytic: AnalyticInstance,
                       schedule: Sequence[float]) -> str:
    if not schedule:
        raise ValidationError(["refinement schedule must be non-empty"])
    if any(not (s > 0) for s in schedule):
        raise ValidationError(["refinement parameters must be positive"])
    if analytic.has_unbounded_side:
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ValidationError(["truncation schedule must be strictly increasing"])
        return "truncation"
    if any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ValidationError(["spacing schedule must be strictly decreasing"])
    return "spacing"


def refinement_samples(analytic: AnalyticInstance,
                       schedule: Sequence[float]) -> tuple[str, list[DiscreteInstance]]:
    """Sample the instance once per schedule entry.

    Bounded domains refine in place: each entry is a grid spacing.  Domains
    with an unbounded side extend instead: each entry is a truncation
    radius, and the spacing set by ``default_samples`` at the first entry
    is held fixed so that anchor tracking stays stable across entries.
    """
    kind = _validate_schedule(analytic, schedule)
    instances = []
    if kind == "spacing":
        spans = [v.hi - v.lo for v in analytic.variables]
        span = min(spans)
        for h in schedule:
            n = round(span / h) + 1
            if n < 2:
                raise ValidationError([f"spacing {h} is coarser than the domain"])
            instances.append(sample(analytic, n=n))
        return kind, instances
    base_span = _truncated_span(analytic, schedule[0])
    spacing = base_span / (analytic.default_samples - 1)
    for t in schedule:
        n = round(_truncated_span(analytic, t) / spacing) + 1
        instances.append(sample(analytic, n=n, truncation=t))
    return kind, instances


def _truncated_span(analytic: AnalyticInstance, truncation: float) -> float:
    spans = []
    for v in analytic.variables:
        lo = -truncation if v.lo is None else v.lo
        hi = truncation if v.hi is None else v.hi
        if not (lo < hi):
            raise ValidationError([f"variable {v.name!r}: truncated interval is empty"])
        spans.append(hi - lo)
    return min(spans)


def anchored_m_value(instance: DiscreteInstance, anchor: Sequence[float]) -> tuple[str, bool, float]:
    """(nearest label, efficient?, trade-off constant) at a sampled grid."""
    label = nearest_label(instance, anchor)
    D, _ = _differences(instance, label)
    efficient, m, _ = _trade_off_stats(D)
    return label, efficient, (math.nan if not efficient else m)


def divergence_study(analytic: AnalyticInstance, anchor: Sequence[float] | float,
                     schedule: Sequence[float]) -> DivergenceReport:
    """Track the trade-off constant at ``anchor`` across grid refinements.

    The anchor is a point in variable space; at each refinement the
    nearest sampled node is certified and its constant recorded.  A
    diverging sequence is finite-sample evidence (not proof) that the
    anchor is improper in the continuous problem.
    """
    anchor_vec = (float(anchor),) if isinstance(anchor, (int, float)) else tuple(anchor)
    if len(anchor_vec) != len(analytic.variables):
        raise ValidationError(["anchor dimension does not match the variable count"])
    for v, a in zip(analytic.variables, anchor_vec):
        if not v.contains(a):
            raise ValidationError([f"anchor is outside the domain of variable {v.name!r}"])
    kind, instances = refinement_samples(analytic, schedule)
    ms = []
    for inst in instances:
        _, efficient, m = anchored_m_value(inst, anchor_vec)
        ms.append(m)
    if any(math.isnan(m) for m in ms):
        classification = "inconclusive"  # anchor tracked an inefficient node
    else:
        classification = classify_growth(ms)
    return DivergenceReport(refinement=kind, schedule=tuple(schedule),
                            m_values=tuple(ms), classification=classification,
                            log_slope=_log_slope(schedule, ms))
