"""Rate-region tests for the discrete channel machinery."""
import math

import numpy as np
import pytest

from conftest import crossed_noiseless_spec, dirty_paper_spec, make_policy, silent_policy
from twdp.discrete import (
    DiscreteTwcSpec,
    RatePair,
    assemble_joint,
    convexify,
    enumerate_region,
    gp_rate_bounds,
    pareto_frontier,
    simplex_grid,
)
from twdp.errors import BudgetError, ConfigurationError, ValidationError
from twdp.probability import marginalize


def hb(p: float) -> float:
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def uniform_identity_policy(user: int) -> "EncoderPolicy":
    """U uniform over the binary input, x = u, constant state."""
    return make_policy(user, 1, [[0.5, 0.5]], [[0], [1]])


class TestSpec:
    def test_rate_pair_rejects_negative(self):
        with pytest.raises(ValidationError):
            RatePair(-0.1, 0.0)

    def test_create_checks_channel_shape(self):
        with pytest.raises(ValidationError):
            DiscreteTwcSpec.create(2, 2, 2, 2, 1, 1, [[1.0]], np.zeros((2, 2, 1, 1, 2, 3)))

    def test_state_dist_shape_checked(self):
        chan = np.zeros((2, 2, 1, 1, 2, 2))
        chan[..., 0, 0] = 1.0
        with pytest.raises(ValidationError):
            DiscreteTwcSpec.create(2, 2, 2, 2, 1, 1, [[0.5], [0.5]], chan)


class TestAssembleJoint:
    def test_mass_and_state_marginal(self, dp_spec):
        pol1 = make_policy(1, 2, [[0.5, 0.5], [0.5, 0.5]], [[0, 1], [1, 0]])
        joint = assemble_joint(dp_spec, pol1, silent_policy(2))
        assert joint.probs.sum() == pytest.approx(1.0, abs=1e-12)
        state = marginalize(joint, ["S1", "S2"])
        assert np.allclose(state.probs, dp_spec.state_dist.probs, atol=1e-12)

    def test_deterministic_map_forces_input(self, crossed_spec):
        pol1 = uniform_identity_policy(1)
        pol2 = uniform_identity_policy(2)
        joint = assemble_joint(crossed_spec, pol1, pol2)
        # x1 = u1 under the identity map, so U1 != X1 carries no mass
        ux = marginalize(joint, ["U1", "X1"]).probs
        assert ux[0, 1] == 0.0 and ux[1, 0] == 0.0


class TestGpRateBounds:
    def test_crossed_noiseless_corner(self, crossed_spec):
        joint = assemble_joint(crossed_spec, uniform_identity_policy(1), uniform_identity_policy(2))
        rates = gp_rate_bounds(joint)
        assert rates.r1 == pytest.approx(1.0, abs=1e-12)
        assert rates.r2 == pytest.approx(1.0, abs=1e-12)

    def test_independent_auxiliary_clamps_to_zero(self, crossed_spec):
        # u is noise: x constant, so no information flows
        pol1 = make_policy(1, 1, [[0.5, 0.5]], [[0], [0]])
        pol2 = uniform_identity_policy(2)
        rates = gp_rate_bounds(assemble_joint(crossed_spec, pol1, pol2))
        assert rates.r1 == 0.0

    def test_binary_dirty_paper_rate(self, dp_spec):
        # u uniform and independent of the state, x = u xor s
        pol1 = make_policy(1, 2, [[0.5, 0.5], [0.5, 0.5]], [[0, 1], [1, 0]])
        rates = gp_rate_bounds(assemble_joint(dp_spec, pol1, silent_policy(2)))
        assert rates.r1 == pytest.approx(1.0 - hb(0.1), abs=1e-12)
        assert rates.r2 == 0.0

    def test_missing_axis_rejected(self, dp_spec):
        pol1 = make_policy(1, 2, [[0.5, 0.5], [0.5, 0.5]], [[0, 1], [1, 0]])
        joint = assemble_joint(dp_spec, pol1, silent_policy(2))
        with pytest.raises(ConfigurationError):
            gp_rate_bounds(marginalize(joint, ["S1", "U1", "Y2"]))


class TestSimplexGrid:
    def test_step_must_divide_one(self):
        with pytest.raises(ValidationError):
            simplex_grid(2, 0.3)

    def test_step_range_checked(self):
        with pytest.raises(ValidationError):
            simplex_grid(2, 0.6)

    def test_binary_half_step(self):
        pts = simplex_grid(2, 0.5)
        assert [tuple(p) for p in pts] == [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]

    def test_rows_sum_to_one(self):
        pts = simplex_grid(3, 0.25)
        arr = np.asarray(pts)
        assert np.allclose(arr.sum(axis=1), 1.0, atol=1e-12)
        # C(4+2,2) compositions of 4 quarters into 3 parts
        assert len(pts) == 15


class TestEnumerateRegion:
    def test_degenerate_auxiliary_gives_origin(self, crossed_spec):
        points = enumerate_region(crossed_spec, (1, 1), 0.5)
        assert RatePair(0.0, 0.0) in points

    def test_budget_error_names_count(self, crossed_spec):
        with pytest.raises(BudgetError, match=r"\d+ x \d+"):
            enumerate_region(crossed_spec, (2, 2), 0.05, max_pairs=10)

    def test_relabeling_invariance(self, dp_spec):
        base, pairs = enumerate_region(dp_spec, (2, 1), 0.5, keep_policies=True)
        swapped_rates = []
        for pol1, pol2 in pairs:
            rows = pol1.aux_given_state.probs[:, ::-1]
            fmap = pol1.input_map[::-1, :]
            pol_sw = make_policy(1, 2, rows, fmap)
            swapped_rates.append(gp_rate_bounds(assemble_joint(dp_spec, pol_sw, pol2)))
        key = lambda r: (round(r.r1, 12), round(r.r2, 12))
        assert {key(r) for r in base} == {key(r) for r in swapped_rates}

    def test_grid_refinement_only_improves(self, crossed_spec):
        coarse = enumerate_region(crossed_spec, (2, 2), 0.1)
        fine = enumerate_region(crossed_spec, (2, 2), 0.05)
        fine_front = pareto_frontier(fine)
        for point in pareto_frontier(coarse):
            assert any(f.r1 >= point.r1 - 1e-9 and f.r2 >= point.r2 - 1e-9
                       for f in fine_front)


class TestFrontier:
    def test_incomparable_points_all_kept(self):
        pts = [RatePair(1.0, 0.0), RatePair(0.0, 1.0), RatePair(0.5, 0.5)]
        front = pareto_frontier(pts)
        assert set((p.r1, p.r2) for p in front) == {(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)}

    def test_dominated_point_dropped(self):
        front = pareto_frontier([RatePair(0.3, 0.3), RatePair(0.3, 0.4)])
        assert [(p.r1, p.r2) for p in front] == [(0.3, 0.4)]

    def test_frontier_sorted_and_antichain(self):
        rng = np.random.default_rng(5)
        pts = [RatePair(float(a), float(b)) for a, b in rng.random((50, 2))]
        front = pareto_frontier(pts)
        for left, right in zip(front, front[1:]):
            assert left.r1 < right.r1 and left.r2 > right.r2

    def test_convexify_drops_interior_dent(self):
        pts = [RatePair(0.0, 1.0), RatePair(0.4, 0.4), RatePair(1.0, 0.0)]
        hull = convexify(pts)
        assert RatePair(0.4, 0.4) not in hull
        assert RatePair(0.0, 1.0) in hull and RatePair(1.0, 0.0) in hull

    def test_convexify_keeps_extreme_points(self):
        pts = [RatePair(0.0, 1.0), RatePair(0.7, 0.7), RatePair(1.0, 0.0)]
        hull = convexify(pts)
        assert RatePair(0.7, 0.7) in hull
