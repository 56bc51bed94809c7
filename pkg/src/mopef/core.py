"""Objective vectors, componentwise orders and efficient sets.

A problem instance is a finite list of labeled points in objective space
(p >= 2 objectives, minimization everywhere).  Three componentwise orders
are supported:

    weak            a <= b in every coordinate
    strict-partial  weak and a != b      (the order defining dominance)
    strong          a <  b in every coordinate

A point is *efficient* when no other point strict-partially dominates its
objective vector.  Comparisons are exact: instances are user data, not
computed quantities, so no tolerance is applied here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, ValidationError

Vector = tuple[float, ...]


def objective_vector(values: Iterable[float]) -> Vector:
    """Build a validated objective vector (length >= 2, all finite)."""
    vec = tuple(float(v) for v in values)
    if len(vec) < 2:
        raise ValidationError(["objective vector needs at least two objectives"])
    bad = [i for i, v in enumerate(vec) if not math.isfinite(v)]
    if bad:
        raise ValidationError([f"non-finite entry at index {i}" for i in bad])
    return vec


class DominanceOrder(str, Enum):
    WEAK = "weak"
    STRICT_PARTIAL = "strict-partial"
    STRONG = "strong"


@dataclass(frozen=True)
class DiscreteInstance:
    """A finite set of labeled points in p-dimensional objective space.

    Invariants (enforced by :func:`validate_instance` / ``from_dict``):
    all vectors have length ``p`` >= 2, labels are unique, at least one
    point is present, every entry is finite.
    """

    p: int
    points: tuple[tuple[str, Vector], ...]

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.points)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {label: i for i, (label, _) in enumerate(self.points)}

    @cached_property
    def matrix(self) -> np.ndarray:
        """Point images as an (n, p) float array, row order = input order."""
        return np.array([f for _, f in self.points], dtype=float)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        if label not in self._index:
            raise ValidationError([f"unknown label {label!r}"])
        return self._index[label]

    def vector(self, label: str) -> Vector:
        return self.points[self.index(label)][1]

    @classmethod
    def from_points(cls, points: Iterable[tuple[str, Sequence[float]]]) -> "DiscreteInstance":
        pts = [(str(label), tuple(float(v) for v in f)) for label, f in points]
        raw = {"p": len(pts[0][1]) if pts else 0,
               "points": [{"label": lbl, "f": list(f)} for lbl, f in pts]}
        return validate_instance(raw)

    @classmethod
    def from_dict(cls, raw: Any) -> "DiscreteInstance":
        return validate_instance(raw)

    def to_dict(self) -> dict:
        return {"p": self.p,
                "points": [{"label": lbl, "f": list(f)} for lbl, f in self.points]}

    @classmethod
    def load(cls, path: str) -> "DiscreteInstance":
        with open(path, "r", encoding="utf-8") as fh:
            return validate_instance(json.load(fh))


def collect_instance_errors(raw: Any) -> list[str]:
    """Return the complete list of invariant violations in ``raw``.

    ``raw`` is parsed JSON shaped like
    ``{"p": 2, "points": [{"label": "a", "f": [0.0, 3.0]}, ...]}``.
    An empty list means the data is a valid instance.
    """
    errors: list[str] = []
    if not isinstance(raw, dict):
        return ["instance must be a JSON object with 'p' and 'points'"]
    p = raw.get("p")
    if not isinstance(p, int) or isinstance(p, bool):
        errors.append("'p' must be an integer")
        p = None
    elif p < 2:
        errors.append("p must be at least 2 (at least two objectives)")
    points = raw.get("points")
    if not isinstance(points, list) or not points:
        errors.append("'points' must be a non-empty list")
        return errors
    seen: set[str] = set()
    for k, entry in enumerate(points):
        if not isinstance(entry, dict) or "label" not in entry or "f" not in entry:
            errors.append(f"point #{k} must be an object with 'label' and 'f'")
            continue
        label = entry["label"]
        if not isinstance(label, str) or not label:
            errors.append(f"point #{k}: label must be a non-empty string")
            label = f"#{k}"
        if label in seen:
            errors.append(f"duplicate label {label!r}")
        seen.add(label)
        f = entry["f"]
        if not isinstance(f, list):
            errors.append(f"label {label!r}: 'f' must be a list of numbers")
            continue
        if p is not None and p >= 2 and len(f) != p:
            errors.append(f"label {label!r}: vector length {len(f)} != p={p}")
        for i, v in enumerate(f):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                errors.append(f"label {label!r}: non-finite value at index {i}")
    return errors


def validate_instance(raw: Any) -> DiscreteInstance:
    """Validate parsed instance data; raise with *all* violations at once."""
    errors = collect_instance_errors(raw)
    if errors:
        raise ValidationError(errors)
    points = tuple((entry["label"], tuple(float(v) for v in entry["f"]))
                   for entry in raw["points"])
    return DiscreteInstance(p=raw["p"], points=points)


def _check_lengths(a: Sequence[float], b: Sequence[float]) -> None:
    if len(a) != len(b):
        raise DimensionMismatchError(
            f"vector length mismatch: {len(a)} vs {len(b)}")


def dominates(a: Sequence[float], b: Sequence[float],
              order: DominanceOrder = DominanceOrder.STRICT_PARTIAL) -> bool:
    """Exact componentwise comparison of ``a`` against ``b``."""
    _check_lengths(a, b)
    order = DominanceOrder(order)
    if order is DominanceOrder.STRONG:
        return all(x < y for x, y in zip(a, b))
    weak = all(x <= y for x, y in zip(a, b))
    if order is DominanceOrder.WEAK:
        return weak
    return weak and tuple(a) != tuple(b)


def efficient_set(instance: DiscreteInstance) -> set[str]:
    """Labels whose vectors no other point strict-partially dominates.

    Efficiency is decided on vectors, so points sharing a vector share a
    verdict.  Never empty for a valid instance.
    """
    F = instance.matrix
    unique, inverse = np.unique(F, axis=0, return_inverse=True)
    m = unique.shape[0]
    dominated = np.zeros(m, dtype=bool)
    for i in range(m):
        if dominated[i]:
            continue
        le = np.all(unique <= unique[i], axis=1)
        lt = np.any(unique < unique[i], axis=1)
        if np.any(le & lt):
            dominated[i] = True
    return {label for k, (label, _) in enumerate(instance.points)
            if not dominated[inverse[k]]}


def ideal_point(instance: DiscreteInstance) -> Vector:
    """Componentwise minima of the instance images."""
    return tuple(float(v) for v in instance.matrix.min(axis=0))


def utopia_point(instance: DiscreteInstance, shift: float = 1.0) -> Vector:
    """Ideal point shifted down by ``shift`` in every coordinate (shift > 0)."""
    if not (shift > 0):
        raise ValidationError(["utopia shift must be positive"])
    return tuple(v - shift for v in ideal_point(instance))
