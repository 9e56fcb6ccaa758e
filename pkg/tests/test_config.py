"""Config parsing, overrides, and emit/parse round trips."""
import json

import numpy as np
import pytest

from conftest import crossed_noiseless_spec, dirty_paper_spec, make_policy, silent_policy
from twdp.config import (
    DiscreteConfig,
    RegionSearch,
    SimulateBundle,
    apply_region_overrides,
    apply_simulate_overrides,
    discrete_to_config,
    gaussian_to_config,
    parse_config,
    parse_config_data,
    simulate_to_config,
)
from twdp.errors import ConfigurationError, ValidationError
from twdp.gaussian import GaussianTwcSpec


MINIMAL_GAUSSIAN = {
    "kind": "gaussian",
    "a": 1, "b": 1, "c": 1, "d": 1,
    "p1": 1, "p2": 1, "ps1": 1, "ps2": 1, "pz1": 1, "pz2": 1,
    "rho_s": 0, "rho_z": 0,
}


def discrete_config_dict() -> dict:
    chan = np.zeros((2, 2, 1, 1, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            chan[x1, x2, 0, 0, x2, x1] = 1.0
    return {
        "kind": "discrete",
        "alphabets": {"x1": 2, "x2": 2, "y1": 2, "y2": 2, "s1": 1, "s2": 1},
        "state_dist": [[1.0]],
        "channel": chan.tolist(),
        "search": {"aux1": 2, "aux2": 2, "grid_step": 0.5},
    }


def simulate_config_dict() -> dict:
    chan = np.zeros((2, 1, 2, 1, 1, 2))
    for x1 in range(2):
        for s1 in range(2):
            clean = x1 ^ s1
            chan[x1, 0, s1, 0, 0, clean] = 0.9
            chan[x1, 0, s1, 0, 0, 1 - clean] = 0.1
    return {
        "kind": "simulate",
        "channel_spec": {
            "alphabets": {"x1": 2, "x2": 1, "y1": 1, "y2": 2, "s1": 2, "s2": 1},
            "state_dist": [[0.5], [0.5]],
            "channel": chan.tolist(),
        },
        "policy1": {"aux_given_state": [[0.75, 0.25], [0.25, 0.75]],
                    "input_map": [[0, 1], [1, 0]]},
        "policy2": {"aux_given_state": [[1.0]], "input_map": [[0]]},
        "sim": {"n": [8, 12], "rate1": 0.05, "rate2": 0.0, "trials": 50,
                "seed": 7, "epsilon": 0.5, "bin_rate1": 0.35, "bin_rate2": 0.0},
    }


class TestParsing:
    def test_minimal_gaussian(self):
        spec = parse_config_data(MINIMAL_GAUSSIAN)
        assert isinstance(spec, GaussianTwcSpec)
        assert spec.a == 1.0 and spec.rho_s == 0.0

    def test_rho_out_of_range(self):
        bad = dict(MINIMAL_GAUSSIAN, rho_s=1.5)
        with pytest.raises(ValidationError, match="rho_s"):
            parse_config_data(bad)

    def test_missing_field_named(self):
        bad = dict(MINIMAL_GAUSSIAN)
        del bad["pz2"]
        with pytest.raises(ValidationError, match="pz2"):
            parse_config_data(bad)

    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="kind"):
            parse_config_data({"kind": "mystery"})

    def test_kernel_row_sum_cites_row(self):
        cfg = discrete_config_dict()
        cfg["channel"][0][0][0][0] = [[0.5, 0.0], [0.4, 0.0]]
        with pytest.raises(ValidationError, match=r"\(0, 0, 0, 0\)"):
            parse_config_data(cfg)

    def test_parse_error_reports_location(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"kind": "gaussian",\n  "a": }\n')
        with pytest.raises(ValidationError, match=r"line \d+ column \d+"):
            parse_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            parse_config(str(tmp_path / "absent.json"))

    def test_discrete_with_search(self):
        cfg = parse_config_data(discrete_config_dict())
        assert isinstance(cfg, DiscreteConfig)
        assert cfg.search.grid_step == 0.5
        assert cfg.search.aux1 == 2

    def test_discrete_aux_defaults_to_input_times_state(self):
        raw = discrete_config_dict()
        del raw["search"]
        cfg = parse_config_data(raw)
        assert cfg.search.aux1 == 2  # |X1| * |S1|
        assert cfg.search.aux2 == 2

    def test_simulate_bundle(self):
        bundle = parse_config_data(simulate_config_dict())
        assert isinstance(bundle, SimulateBundle)
        assert bundle.n_values == (8, 12)
        assert bundle.sim_config(8).epsilon == 0.5

    def test_simulate_zero_trials_rejected(self):
        raw = simulate_config_dict()
        raw["sim"]["trials"] = 0
        with pytest.raises(ConfigurationError):
            parse_config_data(raw)

    def test_simulate_scalar_n_accepted(self):
        raw = simulate_config_dict()
        raw["sim"]["n"] = 10
        bundle = parse_config_data(raw)
        assert bundle.n_values == (10,)

    def test_boolean_not_a_number(self):
        bad = dict(MINIMAL_GAUSSIAN, p1=True)
        with pytest.raises(ValidationError):
            parse_config_data(bad)


class TestRoundTrip:
    def test_gaussian_round_trip(self):
        spec = GaussianTwcSpec(a=0.3, b=1.7, c=2.1, d=-0.5, p1=2.0, p2=3.0,
                               ps1=4.0, ps2=0.5, pz1=1.5, pz2=0.25,
                               rho_s=-0.4, rho_z=0.2)
        again = parse_config_data(gaussian_to_config(spec))
        assert again == spec

    def test_discrete_round_trip(self):
        cfg = DiscreteConfig(spec=crossed_noiseless_spec(),
                             search=RegionSearch(aux1=2, aux2=2, grid_step=0.25))
        again = parse_config_data(discrete_to_config(cfg))
        assert again.spec == cfg.spec
        assert again.search == cfg.search

    def test_simulate_round_trip(self):
        bundle = parse_config_data(simulate_config_dict())
        again = parse_config_data(simulate_to_config(bundle))
        assert again.spec == bundle.spec
        assert again.policy1 == bundle.policy1
        assert again.policy2 == bundle.policy2
        assert again.n_values == bundle.n_values
        assert again.sim_config(8) == bundle.sim_config(8)

    def test_round_trip_survives_json_text(self):
        bundle = parse_config_data(simulate_config_dict())
        text = json.dumps(simulate_to_config(bundle), indent=2, sort_keys=True)
        again = parse_config_data(json.loads(text))
        assert again.policy1 == bundle.policy1


class TestOverrides:
    def test_region_overrides(self):
        cfg = parse_config_data(discrete_config_dict())
        out = apply_region_overrides(cfg, grid_step=0.25, aux_size=(2,), max_pairs=500)
        assert out.search.grid_step == 0.25
        assert out.search.aux1 == 2 and out.search.aux2 == 2
        assert out.search.max_pairs == 500

    def test_region_override_two_aux_sizes(self):
        cfg = parse_config_data(discrete_config_dict())
        out = apply_region_overrides(cfg, aux_size=(3, 2))
        assert out.search.aux1 == 3 and out.search.aux2 == 2

    def test_region_override_rejects_three_sizes(self):
        cfg = parse_config_data(discrete_config_dict())
        with pytest.raises(ValidationError):
            apply_region_overrides(cfg, aux_size=(1, 2, 3))

    def test_simulate_overrides_revalidate(self):
        bundle = parse_config_data(simulate_config_dict())
        out = apply_simulate_overrides(bundle, seed=99, trials=10)
        assert out.seed == 99 and out.trials == 10
        with pytest.raises(ConfigurationError):
            apply_simulate_overrides(bundle, trials=0)

    def test_simulate_override_epsilon(self):
        bundle = parse_config_data(simulate_config_dict())
        out = apply_simulate_overrides(bundle, epsilon=0.3, bin_rate1=0.5)
        assert out.sim_config(8).epsilon == 0.3
        assert out.sim_config(8).bin_rate1 == 0.5
