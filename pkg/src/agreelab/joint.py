"""Finite joint outcome distributions and Bayesian conditioning.

Every backend in this package ultimately produces a table p(i, j, k): the
joint probability that Alice observes i, Bob observes j, and a third
"event" measurement yields k. This module owns that table type together
with marginalization, conditioning, and posterior computations.

Tables are dense numpy arrays. Two entry modes are supported:

* float64 entries with tolerance-based validation (the normal case);
* exact entries (``fractions.Fraction``) stored in an object array, used
  by the classical backend to remove tolerance questions entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyAxes,
    NegativeMass,
    NotNormalized,
    ZeroProbabilityConditioning,
)

DEFAULT_TOL = 1e-9

AXES = ("I", "J", "K")


def axis_position(axis: str) -> int:
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}, expected one of {AXES}")
    return AXES.index(axis)


def _check_labels(labels, size: int, axis: str) -> None:
    if labels is None:
        return
    if len(labels) != size:
        raise DimensionMismatch(
            f"axis {axis} has {size} outcomes but {len(labels)} labels"
        )
    if len(set(labels)) != len(labels):
        raise DimensionMismatch(f"axis {axis} labels are not unique: {labels}")


@dataclass(frozen=True)
class OutcomeSpace:
    """Sizes (and optional labels) of the three outcome axes I, J, K."""

    size_i: int
    size_j: int
    size_k: int
    labels_i: tuple[str, ...] | None = None
    labels_j: tuple[str, ...] | None = None
    labels_k: tuple[str, ...] | None = None

    def __post_init__(self):
        for axis, size in zip(AXES, self.sizes):
            if int(size) < 1:
                raise DimensionMismatch(f"axis {axis} must have size >= 1, got {size}")
        _check_labels(self.labels_i, self.size_i, "I")
        _check_labels(self.labels_j, self.size_j, "J")
        _check_labels(self.labels_k, self.size_k, "K")

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.size_i, self.size_j, self.size_k)

    def axis_size(self, axis: str) -> int:
        return self.sizes[axis_position(axis)]

    def triples(self) -> Iterator[tuple[int, int, int]]:
        """All (i, j, k) triples in row-major order."""
        for i in range(self.size_i):
            for j in range(self.size_j):
                for k in range(self.size_k):
                    yield (i, j, k)


@dataclass(frozen=True)
class Event:
    """A subset of the event-measurement outcomes k. May be empty or full."""

    space: OutcomeSpace
    members: frozenset[int]

    def __post_init__(self):
        members = frozenset(int(k) for k in self.members)
        object.__setattr__(self, "members", members)
        bad = [k for k in members if not 0 <= k < self.space.size_k]
        if bad:
            raise DimensionMismatch(
                f"event members {sorted(bad)} outside K axis of size {self.space.size_k}"
            )

    @property
    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def complement(self) -> "Event":
        return Event(self.space, frozenset(range(self.space.size_k)) - self.members)


def _is_exact_table(table: np.ndarray) -> bool:
    return table.dtype == object


def _zero_like(table: np.ndarray):
    return Fraction(0) if _is_exact_table(table) else 0.0


@dataclass(frozen=True)
class JointDistribution:
    """A validated, immutable joint probability table over I x J x K.

    Construct through :func:`validate_joint`; direct construction assumes
    the table is already clamped and normalized.
    """

    space: OutcomeSpace
    table: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        try:
            self.table.setflags(write=False)
        except ValueError:
            pass

    @property
    def exact(self) -> bool:
        """True when entries are exact rationals rather than floats."""
        return _is_exact_table(self.table)

    def p(self, i: int, j: int, k: int):
        return self.table[i, j, k]

    def axis_masses(self, axis: str) -> np.ndarray:
        """Marginal probability vector of a single axis."""
        keep = axis_position(axis)
        drop = tuple(a for a in range(3) if a != keep)
        return self.table.sum(axis=drop)

    def axis_mass(self, axis: str, members: Iterable[int]):
        """Total mass of a subset of one axis's outcomes."""
        idx = sorted(set(int(m) for m in members))
        if not idx:
            return _zero_like(self.table)
        return self.axis_masses(axis)[idx].sum()

    def event_mass(self, event: Event):
        return self.axis_mass("K", event.members)

    def flat(self) -> tuple:
        """Entries in row-major (i, j, k) order."""
        return tuple(self.table.reshape(-1))

    def to_float(self) -> "JointDistribution":
        if not self.exact:
            return self
        return JointDistribution(self.space, self.table.astype(float), self.tol)


def validate_joint(table, space: OutcomeSpace, tol: float = DEFAULT_TOL) -> JointDistribution:
    """Clamp and validate a raw table into a :class:`JointDistribution`.

    Entries in (-tol, 0) are clamped to zero; entries at or below -tol
    raise :class:`NegativeMass`; total mass outside [1 - tol, 1 + tol]
    raises :class:`NotNormalized`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    arr = np.asarray(table)
    if arr.dtype != object:
        arr = np.asarray(table, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise NotNormalized("table contains non-finite entries")
    if arr.shape != space.sizes:
        raise DimensionMismatch(
            f"table shape {arr.shape} does not match outcome space {space.sizes}"
        )
    arr = arr.copy()
    flat = arr.reshape(-1)
    for pos, value in enumerate(flat):
        if value < 0:
            if value <= -tol:
                raise NegativeMass(
                    f"entry at flat index {pos} is {value}, below -tol={-tol}"
                )
            flat[pos] = _zero_like(arr)
    total = flat.sum()
    if abs(total - 1) > tol:
        raise NotNormalized(f"table mass is {total}, not within {tol} of 1")
    return JointDistribution(space, arr, tol)


def marginal(p: JointDistribution, axes: Iterable[str]) -> np.ndarray:
    """Marginal table over a nonempty subset of axes, in I, J, K order."""
    keep = sorted({axis_position(a) for a in axes})
    if not keep:
        raise EmptyAxes("at least one axis must be retained")
    drop = tuple(a for a in range(3) if a not in keep)
    return p.table.sum(axis=drop) if drop else p.table.copy()


def _axis_posterior(p: JointDistribution, axis: str, index: int, event: Event):
    size = p.space.axis_size(axis)
    if not 0 <= index < size:
        raise DimensionMismatch(f"axis {axis} index {index} outside range 0..{size - 1}")
    mass = p.axis_masses(axis)[index]
    if mass <= p.tol:
        raise ZeroProbabilityConditioning(
            f"axis {axis} outcome {index} has mass {mass} <= tol"
        )
    ks = event.sorted_members
    if not ks:
        return _zero_like(p.table)
    pos = axis_position(axis)
    sub = np.take(p.table, [index], axis=pos)
    return np.take(sub, ks, axis=2).sum() / mass


def posterior_alice(p: JointDistribution, i: int, event: Event):
    """Alice's posterior probability of the event after observing outcome i."""
    return _axis_posterior(p, "I", i, event)


def posterior_bob(p: JointDistribution, j: int, event: Event):
    """Bob's posterior probability of the event after observing outcome j."""
    return _axis_posterior(p, "J", j, event)


def conditional_prob(
    p: JointDistribution,
    target_axis: str,
    target: Iterable[int],
    given_axis: str,
    given: Iterable[int],
):
    """P(target subset | given subset), both lifted to the full triple space.

    The two subsets live on distinct axes; unmentioned axes are summed out.
    """
    t_pos = axis_position(target_axis)
    g_pos = axis_position(given_axis)
    if t_pos == g_pos:
        raise ValueError("target and conditioning axes must differ")
    t_idx = sorted({int(x) for x in target})
    g_idx = sorted({int(x) for x in given})
    for name, pos, idx in ((target_axis, t_pos, t_idx), (given_axis, g_pos, g_idx)):
        size = p.space.sizes[pos]
        if any(not 0 <= x < size for x in idx):
            raise DimensionMismatch(f"axis {name} subset {idx} outside range 0..{size - 1}")
    if not g_idx:
        raise ZeroProbabilityConditioning("conditioning subset is empty")
    denom = np.take(p.table, g_idx, axis=g_pos).sum()
    if denom <= p.tol:
        raise ZeroProbabilityConditioning(
            f"conditioning subset on axis {given_axis} has mass {denom} <= tol"
        )
    if not t_idx:
        return _zero_like(p.table)
    numer = np.take(np.take(p.table, g_idx, axis=g_pos), t_idx, axis=t_pos).sum()
    return numer / denom
