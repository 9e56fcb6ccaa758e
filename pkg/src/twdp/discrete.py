"""Discrete memoryless two-way channel with per-user state known at the encoder.

Rate bounds follow the binning argument: user i picks an auxiliary codeword
correlated with its own state and the channel input is a deterministic
function of (auxiliary, state). The achieved rate toward the other user is

    r_i = max(0, I(U_i; Y_j | U_j, S_j) - I(U_i; S_i | U_j, S_j)),  j != i,

and the region is the union of the rectangles [0,r1] x [0,r2] over all policy
pairs; enumeration walks a simplex grid of auxiliary conditionals and all
deterministic input maps.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ConfigurationError, ValidationError
from .probability import (
    Alphabet,
    ConditionalKernel,
    JointTable,
    conditional_mutual_information,
    marginalize,
)

CANONICAL_AXES = ("S1", "S2", "U1", "U2", "X1", "X2", "Y1", "Y2")

# Enumeration guard: policy pairs evaluated in one region call.
DEFAULT_MAX_PAIRS = 2_000_000


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float

    def __post_init__(self):
        if self.r1 < 0 or self.r2 < 0:
            raise ValidationError(f"rate pair must be nonnegative, got ({self.r1}, {self.r2})")


@dataclass(frozen=True)
class DiscreteTwcSpec:
    """Alphabet sizes, state law P(S1,S2), and kernel P(Y1,Y2 | X1,X2,S1,S2)."""

    alph_x1: Alphabet
    alph_x2: Alphabet
    alph_y1: Alphabet
    alph_y2: Alphabet
    alph_s1: Alphabet
    alph_s2: Alphabet
    state_dist: JointTable
    channel: ConditionalKernel

    def __post_init__(self):
        expected = {
            "X1": self.alph_x1, "X2": self.alph_x2, "Y1": self.alph_y1,
            "Y2": self.alph_y2, "S1": self.alph_s1, "S2": self.alph_s2,
        }
        for name, alph in expected.items():
            if alph.name != name:
                raise ValidationError(f"alphabet for {name} must be named {name!r}, got {alph.name!r}")
        if self.state_dist.axis_names != ("S1", "S2"):
            raise ValidationError(f"state_dist must cover (S1, S2), got {self.state_dist.axis_names}")
        if tuple(ax.size for ax in self.state_dist.axes) != (self.alph_s1.size, self.alph_s2.size):
            raise ValidationError("state_dist axis sizes disagree with the spec alphabets")
        in_names = tuple(ax.name for ax in self.channel.input_axes)
        out_names = tuple(ax.name for ax in self.channel.output_axes)
        if in_names != ("X1", "X2", "S1", "S2") or out_names != ("Y1", "Y2"):
            raise ValidationError(
                f"channel must map (X1,X2,S1,S2) to (Y1,Y2), got {in_names} -> {out_names}"
            )
        sizes = tuple(ax.size for ax in self.channel.input_axes + self.channel.output_axes)
        want = (self.alph_x1.size, self.alph_x2.size, self.alph_s1.size,
                self.alph_s2.size, self.alph_y1.size, self.alph_y2.size)
        if sizes != want:
            raise ValidationError(f"channel kernel sizes {sizes} disagree with spec alphabets {want}")

    @classmethod
    def create(cls, nx1, nx2, ny1, ny2, ns1, ns2, state_probs, channel_probs):
        """Build a spec from sizes and raw arrays with the canonical axis names."""
        ax = {n: Alphabet(n, s) for n, s in
              [("X1", nx1), ("X2", nx2), ("Y1", ny1), ("Y2", ny2), ("S1", ns1), ("S2", ns2)]}
        state = JointTable(axes=(ax["S1"], ax["S2"]), probs=state_probs)
        chan = ConditionalKernel(
            input_axes=(ax["X1"], ax["X2"], ax["S1"], ax["S2"]),
            output_axes=(ax["Y1"], ax["Y2"]),
            probs=channel_probs,
        )
        return cls(ax["X1"], ax["X2"], ax["Y1"], ax["Y2"], ax["S1"], ax["S2"], state, chan)


@dataclass(frozen=True, eq=False)
class EncoderPolicy:
    """One user's coding choice: P(U|S) plus the deterministic input map.

    input_map has shape (|U|, |S|) with entries indexing the user's input
    alphabet: x = input_map[u, s].
    """

    user: int
    aux_alph: Alphabet
    aux_given_state: ConditionalKernel
    input_map: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, EncoderPolicy):
            return NotImplemented
        return (self.user == other.user
                and self.aux_alph == other.aux_alph
                and self.aux_given_state == other.aux_given_state
                and np.array_equal(self.input_map, other.input_map))

    def __post_init__(self):
        if self.user not in (1, 2):
            raise ValidationError(f"policy user must be 1 or 2, got {self.user}")
        want_name = f"U{self.user}"
        if self.aux_alph.name != want_name:
            raise ValidationError(f"auxiliary alphabet for user {self.user} must be named {want_name!r}")
        k = self.aux_given_state
        if len(k.input_axes) != 1 or len(k.output_axes) != 1:
            raise ValidationError("aux_given_state must map one state axis to one auxiliary axis")
        if k.input_axes[0].name != f"S{self.user}" or k.output_axes[0].name != want_name:
            raise ValidationError(
                f"aux_given_state for user {self.user} must map S{self.user} -> {want_name}, "
                f"got {k.input_axes[0].name} -> {k.output_axes[0].name}"
            )
        if k.output_axes[0].size != self.aux_alph.size:
            raise ValidationError("aux_given_state output size disagrees with aux_alph")
        fmap = np.asarray(self.input_map, dtype=int)
        want_shape = (self.aux_alph.size, k.input_axes[0].size)
        if fmap.shape != want_shape:
            raise ValidationError(f"input_map must have shape {want_shape}, got {fmap.shape}")
        fmap = fmap.copy()
        fmap.flags.writeable = False
        object.__setattr__(self, "input_map", fmap)

    def validate_against(self, spec: DiscreteTwcSpec):
        s_alph = spec.alph_s1 if self.user == 1 else spec.alph_s2
        x_alph = spec.alph_x1 if self.user == 1 else spec.alph_x2
        if self.aux_given_state.input_axes[0].size != s_alph.size:
            raise ConfigurationError(
                f"policy for user {self.user}: state size "
                f"{self.aux_given_state.input_axes[0].size} != spec {s_alph.size}"
            )
        if np.any(self.input_map < 0) or np.any(self.input_map >= x_alph.size):
            raise ConfigurationError(
                f"policy for user {self.user}: input_map entries must index {x_alph.name} (size {x_alph.size})"
            )


def _onehot_map(fmap: np.ndarray, nx: int) -> np.ndarray:
    # (u, s) -> one-hot over x
    out = np.zeros(fmap.shape + (nx,))
    u_idx, s_idx = np.indices(fmap.shape)
    out[u_idx, s_idx, fmap] = 1.0
    return out


def assemble_joint(spec: DiscreteTwcSpec, pol1: EncoderPolicy, pol2: EncoderPolicy) -> JointTable:
    """Full joint over (S1,S2,U1,U2,X1,X2,Y1,Y2) under the factorization

    P(s1,s2) P(u1|s1) P(u2|s2) 1{x1=f1(u1,s1)} 1{x2=f2(u2,s2)} P(y1,y2|x1,x2,s1,s2).
    """
    if pol1.user != 1 or pol2.user != 2:
        raise ConfigurationError("assemble_joint expects pol1 for user 1 and pol2 for user 2")
    pol1.validate_against(spec)
    pol2.validate_against(spec)
    ps = spec.state_dist.probs                     # (s1, s2)
    k1 = pol1.aux_given_state.probs                # (s1, u1)
    k2 = pol2.aux_given_state.probs                # (s2, u2)
    f1 = _onehot_map(pol1.input_map, spec.alph_x1.size)   # (u1, s1, x1)
    f2 = _onehot_map(pol2.input_map, spec.alph_x2.size)   # (u2, s2, x2)
    chan = spec.channel.probs                      # (x1, x2, s1, s2, y1, y2)
    # letters: s1=a s2=b u1=c u2=d x1=e x2=f y1=g y2=h
    joint = np.einsum("ab,ac,bd,cae,dbf,efabgh->abcdefgh", ps, k1, k2, f1, f2, chan, optimize=True)
    axes = (
        spec.alph_s1, spec.alph_s2, pol1.aux_alph, pol2.aux_alph,
        spec.alph_x1, spec.alph_x2, spec.alph_y1, spec.alph_y2,
    )
    return JointTable(axes=axes, probs=joint)


def gp_rate_bounds(joint: JointTable) -> RatePair:
    """Binning rate bounds for both users, clamped at zero."""
    missing = [n for n in CANONICAL_AXES if n not in joint.axis_names]
    if missing:
        raise ConfigurationError(f"gp_rate_bounds: joint table is missing axes {missing}")
    r1 = conditional_mutual_information(joint, ["U1"], ["Y2"], ["U2", "S2"]) \
        - conditional_mutual_information(joint, ["U1"], ["S1"], ["U2", "S2"])
    r2 = conditional_mutual_information(joint, ["U2"], ["Y1"], ["U1", "S1"]) \
        - conditional_mutual_information(joint, ["U2"], ["S2"], ["U1", "S1"])
    return RatePair(r1=max(0.0, r1), r2=max(0.0, r2))


def simplex_grid(size: int, step: float):
    """All pmfs over `size` symbols with entries on the lattice {0, step, ..., 1}.

    step must divide 1 into an integer number of levels; rows are generated in
    deterministic lexicographic order.
    """
    if not (0 < step <= 0.5):
        raise ValidationError(f"grid step must lie in (0, 0.5], got {step}")
    levels = round(1.0 / step)
    if abs(levels * step - 1.0) > 1e-9:
        raise ValidationError(f"grid step {step} does not divide 1 evenly")
    out = []
    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + [remaining])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, slots - 1)
    rec([], levels, size)
    return [np.array(row, dtype=float) / levels for row in out]


def _policies_for_user(spec: DiscreteTwcSpec, user: int, aux_size: int, grid_step: float):
    """Deterministic enumeration of (aux kernel rows, input map) combinations."""
    s_alph = spec.alph_s1 if user == 1 else spec.alph_s2
    x_alph = spec.alph_x1 if user == 1 else spec.alph_x2
    aux = Alphabet(f"U{user}", aux_size)
    rows = simplex_grid(aux_size, grid_step)
    row_combos = list(itertools.product(range(len(rows)), repeat=s_alph.size))
    maps = list(itertools.product(range(x_alph.size), repeat=aux_size * s_alph.size))
    policies = []
    for combo in row_combos:
        kernel = ConditionalKernel(
            input_axes=(s_alph,),
            output_axes=(aux,),
            probs=np.stack([rows[i] for i in combo]),
        )
        for fm in maps:
            fmap = np.array(fm, dtype=int).reshape(aux_size, s_alph.size)
            policies.append(EncoderPolicy(user=user, aux_alph=aux,
                                          aux_given_state=kernel, input_map=fmap))
    return policies


def enumerate_region(spec: DiscreteTwcSpec, aux_sizes, grid_step: float,
                     max_pairs: int = DEFAULT_MAX_PAIRS, keep_policies: bool = False):
    """Evaluate gp_rate_bounds over the quantized policy-pair space.

    Returns a list of RatePair in deterministic enumeration order, or
    (rates, policy_pairs) when keep_policies is set.
    """
    n1, n2 = aux_sizes
    if n1 < 1 or n2 < 1:
        raise ValidationError(f"aux sizes must be >= 1, got {aux_sizes}")
    pols1 = _policies_for_user(spec, 1, n1, grid_step)
    pols2 = _policies_for_user(spec, 2, n2, grid_step)
    total = len(pols1) * len(pols2)
    if total > max_pairs:
        raise BudgetError(
            f"region enumeration needs {total} policy pairs "
            f"({len(pols1)} x {len(pols2)}), above the cap of {max_pairs}"
        )
    rates = []
    pairs = []
    for p1 in pols1:
        for p2 in pols2:
            joint = assemble_joint(spec, p1, p2)
            rates.append(gp_rate_bounds(joint))
            if keep_policies:
                pairs.append((p1, p2))
    if keep_policies:
        return rates, pairs
    return rates


def pareto_frontier(points) -> list:
    """Maximal rate pairs under componentwise dominance, r1 ascending.

    Ties on r1 keep only the largest r2; duplicates collapse.
    """
    pts = sorted(set((p.r1, p.r2) for p in points), key=lambda t: (-t[0], -t[1]))
    front = []
    best_r2 = -1.0
    for r1, r2 in pts:
        if r2 > best_r2:
            front.append((r1, r2))
            best_r2 = r2
    front.reverse()
    return [RatePair(r1=r1, r2=r2) for r1, r2 in front]


def convexify(points) -> list:
    """Upper-right convex hull of the points plus the axis anchors.

    Time-sharing post-process: returns the vertices of the concave envelope
    over r1, sorted r1 ascending. Kept separate from enumeration on purpose.
    """
    front = pareto_frontier(points)
    if not front:
        return []
    # anchor the hull at the pure single-user corners
    pts = [(0.0, max(p.r2 for p in front))] + [(p.r1, p.r2) for p in front] \
        + [(max(p.r1 for p in front), 0.0)]
    pts = sorted(set(pts))
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop middle point when it lies under the chord
            if (x2 - x1) * (p[1] - y1) - (p[0] - x1) * (y2 - y1) >= -1e-15:
                hull.pop()
            else:
                break
        hull.append(p)
    return [RatePair(r1=x, r2=y) for x, y in hull]
