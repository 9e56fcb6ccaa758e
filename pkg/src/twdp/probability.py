"""Exact arithmetic over finite joint distributions.

Dense tables over named finite axes, with marginalization, conditioning,
entropy, and (conditional) mutual information in bits. Axis order inside a
table is canonical (sorted by name) so tables over the same axes compare
entry-wise without permutation bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateConditioningError,
    InternalConsistencyError,
    ValidationError,
)

# Mass / row-sum tolerance for stored distributions.
MASS_TOL = 1e-12
# Negative CMI magnitudes beyond this are bugs, not round-off.
NEG_INFO_TOL = 1e-9


@dataclass(frozen=True)
class Alphabet:
    """A named finite axis: label plus cardinality."""

    name: str
    size: int

    def __post_init__(self):
        if not self.name:
            raise ValidationError("alphabet name must be nonempty")
        if not isinstance(self.size, int) or self.size < 1:
            raise ValidationError(f"alphabet {self.name!r}: size must be a positive integer, got {self.size!r}")


def _as_prob_array(probs, shape, what: str) -> np.ndarray:
    arr = np.asarray(probs, dtype=float)
    if arr.shape != shape:
        raise ValidationError(f"{what}: expected shape {shape}, got {arr.shape}")
    if np.any(arr < 0):
        raise ValidationError(f"{what}: negative probability entry {float(arr.min()):.6g}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function over one alphabet."""

    alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self):
        arr = _as_prob_array(self.probs, (self.alphabet.size,), f"pmf over {self.alphabet.name!r}")
        if abs(float(arr.sum()) - 1.0) > MASS_TOL:
            raise ValidationError(
                f"pmf over {self.alphabet.name!r}: mass {float(arr.sum()):.15g} is not 1 within {MASS_TOL}"
            )
        object.__setattr__(self, "probs", arr)

    def __eq__(self, other):
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.probs, other.probs)


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense joint distribution over named finite axes.

    Axes are stored sorted by name; the probability array is permuted to match
    at construction, so any input axis order yields the same canonical object.
    """

    axes: tuple
    probs: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, JointTable):
            return NotImplemented
        return self.axes == other.axes and np.array_equal(self.probs, other.probs)

    def __post_init__(self):
        axes = tuple(self.axes)
        names = [ax.name for ax in axes]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate axis names in joint table: {names}")
        arr = np.asarray(self.probs, dtype=float)
        if arr.shape != tuple(ax.size for ax in axes):
            raise ValidationError(
                f"joint table: axes imply shape {tuple(ax.size for ax in axes)}, got array {arr.shape}"
            )
        order = sorted(range(len(axes)), key=lambda i: axes[i].name)
        axes = tuple(axes[i] for i in order)
        arr = np.ascontiguousarray(np.transpose(arr, order), dtype=float)
        if np.any(arr < 0):
            raise ValidationError(f"joint table: negative entry {float(arr.min()):.6g}")
        if abs(float(arr.sum()) - 1.0) > MASS_TOL:
            raise ValidationError(f"joint table: total mass {float(arr.sum()):.15g} is not 1 within {MASS_TOL}")
        arr.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", arr)

    @property
    def axis_names(self) -> tuple:
        return tuple(ax.name for ax in self.axes)

    def axis_index(self, name: str) -> int:
        for i, ax in enumerate(self.axes):
            if ax.name == name:
                return i
        raise ConfigurationError(f"unknown axis {name!r}; table has {list(self.axis_names)}")


@dataclass(frozen=True, eq=False)
class ConditionalKernel:
    """Transition law: each input cell carries a pmf over the output cells."""

    input_axes: tuple
    output_axes: tuple
    probs: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, ConditionalKernel):
            return NotImplemented
        return (self.input_axes == other.input_axes
                and self.output_axes == other.output_axes
                and np.array_equal(self.probs, other.probs))

    def __post_init__(self):
        ins = tuple(self.input_axes)
        outs = tuple(self.output_axes)
        names = [ax.name for ax in ins + outs]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate axis names in kernel: {names}")
        shape = tuple(ax.size for ax in ins) + tuple(ax.size for ax in outs)
        arr = _as_prob_array(self.probs, shape, "kernel")
        out_dims = tuple(range(len(ins), len(ins) + len(outs)))
        row_sums = arr.sum(axis=out_dims) if out_dims else arr
        bad = np.abs(row_sums - 1.0) > MASS_TOL
        if np.any(bad):
            idx = tuple(int(k) for k in np.argwhere(bad)[0])
            raise ValidationError(
                f"kernel row {idx}: output mass {float(row_sums[bad][0]):.15g} is not 1 within {MASS_TOL}"
            )
        object.__setattr__(self, "input_axes", ins)
        object.__setattr__(self, "output_axes", outs)
        object.__setattr__(self, "probs", arr)


def _resolve(table: JointTable, names: Iterable[str], what: str) -> list:
    names = list(names)
    for n in names:
        if n not in table.axis_names:
            raise ConfigurationError(f"{what}: unknown axis {n!r}; table has {list(table.axis_names)}")
    return names


def marginalize(table: JointTable, keep) -> JointTable:
    """Sum out every axis not in `keep`, preserving mass."""
    keep = set(_resolve(table, keep, "marginalize"))
    if not keep:
        raise ConfigurationError("marginalize: keep set must be nonempty")
    drop = tuple(i for i, ax in enumerate(table.axes) if ax.name not in keep)
    probs = table.probs.sum(axis=drop) if drop else table.probs
    axes = tuple(ax for ax in table.axes if ax.name in keep)
    return JointTable(axes=axes, probs=probs)


def entropy(table: JointTable, axes) -> float:
    """Shannon entropy in bits of the marginal on `axes` (0 log 0 := 0)."""
    names = _resolve(table, axes, "entropy")
    if not names:
        raise ConfigurationError("entropy: axis set must be nonempty")
    p = marginalize(table, names).probs.ravel()
    p = p[p > 0]
    h = float(-(p * np.log2(p)).sum())
    return max(h, 0.0)


def _entropy_or_zero(table: JointTable, names) -> float:
    # H over an empty axis set is 0 (entropy of a constant).
    return entropy(table, names) if names else 0.0


def conditional_mutual_information(table: JointTable, a, b, c=()) -> float:
    """I(A;B|C) in bits via H(A,C) + H(B,C) - H(C) - H(A,B,C).

    Round-off can push the value slightly negative; magnitudes within
    NEG_INFO_TOL clamp to 0, anything worse is an internal error.
    """
    a = _resolve(table, a, "conditional_mutual_information")
    b = _resolve(table, b, "conditional_mutual_information")
    c = _resolve(table, c, "conditional_mutual_information")
    if not a or not b:
        raise ConfigurationError("conditional_mutual_information: a and b must be nonempty")
    sa, sb, sc = set(a), set(b), set(c)
    if sa & sb or sa & sc or sb & sc:
        raise ConfigurationError(
            f"conditional_mutual_information: axis sets must be disjoint, got a={sorted(sa)} b={sorted(sb)} c={sorted(sc)}"
        )
    value = (
        _entropy_or_zero(table, sa | sc)
        + _entropy_or_zero(table, sb | sc)
        - _entropy_or_zero(table, sc)
        - _entropy_or_zero(table, sa | sb | sc)
    )
    if value < -NEG_INFO_TOL:
        raise InternalConsistencyError(
            f"conditional mutual information {value:.3e} below -{NEG_INFO_TOL}; "
            "the joint table is inconsistent"
        )
    return max(value, 0.0)


def condition(table: JointTable, evidence: Mapping[str, int]) -> JointTable:
    """Condition on observed symbol indices and renormalize the rest."""
    if not evidence:
        raise ConfigurationError("condition: evidence must be nonempty")
    _resolve(table, evidence.keys(), "condition")
    if len(evidence) >= len(table.axes):
        raise ConfigurationError("condition: evidence must leave at least one free axis")
    sl = []
    for ax in table.axes:
        if ax.name in evidence:
            idx = evidence[ax.name]
            if not (0 <= idx < ax.size):
                raise ConfigurationError(f"condition: index {idx} out of range for axis {ax.name!r} of size {ax.size}")
            sl.append(idx)
        else:
            sl.append(slice(None))
    sliced = table.probs[tuple(sl)]
    mass = float(sliced.sum())
    if mass <= 0.0:
        raise DegenerateConditioningError(f"condition: evidence {dict(evidence)} has probability zero")
    axes = tuple(ax for ax in table.axes if ax.name not in evidence)
    return JointTable(axes=axes, probs=sliced / mass)
