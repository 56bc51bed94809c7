"""Parametric sweeps and frontier coverage via conic scalarization.

A parameter grid is the cartesian product of named axes (weight vectors,
alpha values, reference points, ...).  Sweeping solves one scalarization
per grid point; the union of minimizer sets is the generated frontier
approximation.  For conic scalarization there is a per-point construction
that is guaranteed to recover every efficient point of a finite instance:
anchor the reference at the point's own image, use unit weights and pick
alpha inside (1/(2*delta+1), 1) for any workable cone parameter delta of
that point.  ``cover_conic`` runs exactly this construction and reports
the achieved coverage.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .certify import certify_henig
from .core import DiscreteInstance, efficient_set
from .errors import ValidationError
from .scalarize import (METHODS, ScalarizationSpec, SolveResult,
                        check_param_validity, solve_scalarization)
from ._util import parallel_map

# caps the alpha interval away from its degenerate limit when the cone
# parameter supremum is infinite (alpha midpoint is then ~0.5)
DELTA_CAP = 1e3

_VECTOR_AXES = {"lambda", "reference", "utopia", "anchor_a", "direction_r", "bound"}
_SCALAR_AXES = {"alpha", "exponent"}


@dataclass(frozen=True)
class ParamGrid:
    """Named axes of parameter values for one scalarization method."""

    method: str
    axes: tuple[tuple[str, tuple[Any, ...]], ...]  # (name, values), name-sorted

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError([f"unknown method {self.method!r}"])
        if not self.axes:
            raise ValidationError(["grid needs at least one axis"])
        for name, values in self.axes:
            if name not in _VECTOR_AXES | _SCALAR_AXES:
                raise ValidationError([f"unknown grid axis {name!r}"])
            if not values:
                raise ValidationError([f"grid axis {name!r} is empty"])

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ParamGrid":
        if not isinstance(raw, dict) or "method" not in raw or "axes" not in raw:
            raise ValidationError(["grid must be an object with 'method' and 'axes'"])
        axes = []
        for name in sorted(raw["axes"]):
            values = raw["axes"][name]
            if not isinstance(values, list):
                raise ValidationError([f"grid axis {name!r} must be a list"])
            if name in _VECTOR_AXES:
                axes.append((name, tuple(tuple(float(v) for v in vec) for vec in values)))
            else:
                axes.append((name, tuple(float(v) for v in values)))
        return cls(method=str(raw["method"]), axes=tuple(axes))

    def specs(self) -> list[tuple[dict[str, Any], ScalarizationSpec]]:
        """All grid points in deterministic (axis-name, value) order."""
        names = [name for name, _ in self.axes]
        combos = itertools.product(*(values for _, values in self.axes))
        out = []
        for combo in combos:
            params = dict(zip(names, combo))
            out.append((params, ScalarizationSpec.from_dict({"method": self.method, **params})))
        return out


@dataclass(frozen=True)
class SweepEntry:
    params: dict[str, Any]
    spec: ScalarizationSpec
    guaranteed_proper: bool
    result: SolveResult

    def to_dict(self) -> dict:
        return {"params": {k: list(v) if isinstance(v, tuple) else v
                           for k, v in self.params.items()},
                "guaranteed_proper": self.guaranteed_proper,
                "minimizers": list(self.result.minimizers),
                "value": self.result.value}


def sweep(instance: DiscreteInstance, grid: ParamGrid) -> list[SweepEntry]:
    """Solve one scalarization per grid point (deterministic order)."""
    pairs = grid.specs()

    def run(pair: tuple[dict[str, Any], ScalarizationSpec]) -> SweepEntry:
        params, spec = pair
        verdict = check_param_validity(spec, instance)
        return SweepEntry(params, spec, verdict.guaranteed_proper,
                          solve_scalarization(spec, instance))

    return parallel_map(run, pairs)


def generated_labels(entries: Iterable[SweepEntry]) -> set[str]:
    """Union of minimizer sets across a sweep."""
    out: set[str] = set()
    for entry in entries:
        out.update(entry.result.minimizers)
    return out


@dataclass(frozen=True)
class CoverageReport:
    efficient_labels: tuple[str, ...]
    covered: dict[str, ScalarizationSpec]   # label -> witnessing spec
    uncovered: tuple[str, ...]
    coverage_ratio: float

    def to_dict(self) -> dict:
        return {"efficient_labels": list(self.efficient_labels),
                "covered": {lbl: spec.to_dict() for lbl, spec in sorted(self.covered.items())},
                "uncovered": list(self.uncovered),
                "coverage_ratio": self.coverage_ratio}


def conic_witness_spec(instance: DiscreteInstance, label: str) -> ScalarizationSpec:
    """Per-point conic parameters that should recover ``label``.

    delta is the point's cone-parameter supremum (capped); alpha is the
    midpoint of the open interval (1/(2*delta+1), 1), which keeps it
    strictly inside for every positive delta.
    """
    cert = certify_henig(instance, label)
    delta = min(cert.delta_sup, DELTA_CAP)
    low = 1.0 / (2.0 * delta + 1.0)
    alpha = 0.5 * (low + 1.0)
    p = instance.p
    return ScalarizationSpec(method="conic", weights=(1.0,) * p,
                             reference=instance.vector(label), alpha=alpha)


def cover_conic(instance: DiscreteInstance) -> CoverageReport:
    """Run the per-point conic construction over the efficient set."""
    efficient = sorted(efficient_set(instance))

    def run(label: str) -> tuple[str, ScalarizationSpec, bool]:
        spec = conic_witness_spec(instance, label)
        result = solve_scalarization(spec, instance)
        return label, spec, label in result.minimizers

    covered: dict[str, ScalarizationSpec] = {}
    uncovered: list[str] = []
    for label, spec, hit in parallel_map(run, efficient):
        if hit:
            covered[label] = spec
        else:
            uncovered.append(label)
    ratio = len(covered) / len(efficient) if efficient else 1.0
    return CoverageReport(tuple(efficient), covered, tuple(uncovered), ratio)


def coverage_ratio(instance: DiscreteInstance, grid: ParamGrid) -> float:
    """Fraction of efficient labels hit by some grid point's minimizers."""
    efficient = efficient_set(instance)
    if not efficient:
        return 1.0
    hit = generated_labels(sweep(instance, grid)) & efficient
    return len(hit) / len(efficient)
