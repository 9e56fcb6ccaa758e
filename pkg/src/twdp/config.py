"""Declarative JSON configs for channels, policies, and simulation runs.

Three kinds are recognized, selected by the top-level "kind" field:

  discrete   alphabet sizes, state distribution [s1][s2], channel kernel as
             nested arrays indexed [x1][x2][s1][s2][y1][y2], optional search
             block (aux1, aux2, grid_step, max_pairs)
  gaussian   gains a,b,c,d; powers p1,p2,ps1,ps2,pz1,pz2; rho_s, rho_z
  simulate   channel_spec (discrete body), policy1/policy2 (aux_given_state
             rows plus input_map), sim block (n scalar or list, rate1, rate2,
             trials, seed, epsilon, bin_rate1, bin_rate2)

Errors name the JSON path of the offending field; file-level syntax errors
carry the line and column from the parser. Emit helpers produce dicts that
re-parse to equal objects, which the service and CLI rely on.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .binning import SimConfig
from .discrete import DEFAULT_MAX_PAIRS, DiscreteTwcSpec, EncoderPolicy
from .errors import ValidationError
from .gaussian import GaussianTwcSpec
from .probability import Alphabet, ConditionalKernel

KINDS = ("discrete", "gaussian", "simulate")

DEFAULT_GRID_STEP = 0.25


@dataclass(frozen=True)
class RegionSearch:
    """Quantization and budget knobs for region enumeration."""

    aux1: int
    aux2: int
    grid_step: float = DEFAULT_GRID_STEP
    max_pairs: int = DEFAULT_MAX_PAIRS


@dataclass(frozen=True)
class DiscreteConfig:
    spec: DiscreteTwcSpec
    search: RegionSearch


@dataclass(frozen=True)
class SimulateBundle:
    spec: DiscreteTwcSpec
    policy1: EncoderPolicy
    policy2: EncoderPolicy
    n_values: tuple
    rate1: float
    rate2: float
    trials: int
    seed: int
    epsilon: float
    bin_rate1: float | None
    bin_rate2: float | None

    def sim_config(self, n: int) -> SimConfig:
        return SimConfig(n=n, rate1=self.rate1, rate2=self.rate2, trials=self.trials,
                         seed=self.seed, epsilon=self.epsilon,
                         bin_rate1=self.bin_rate1, bin_rate2=self.bin_rate2)


def _fail(path: str, message: str):
    raise ValidationError(f"{path}: {message}")


def _need(data: dict, key: str, path: str):
    if not isinstance(data, dict):
        _fail(path, f"expected an object, got {type(data).__name__}")
    if key not in data:
        _fail(f"{path}.{key}" if path else key, "missing required field")
    return data[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        _fail(path, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    return value


def _array(value, path: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError):
        _fail(path, "expected a (nested) numeric array")
    if arr.dtype != float or not np.all(np.isfinite(arr)):
        _fail(path, "array entries must be finite numbers")
    return arr


def load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}")


def parse_config(path: str):
    """Load and validate a config file; returns the parsed kind-specific object."""
    return parse_config_data(load_json(path))


def parse_config_data(data):
    if not isinstance(data, dict):
        raise ValidationError(f"config root must be an object, got {type(data).__name__}")
    kind = _need(data, "kind", "")
    if kind not in KINDS:
        raise ValidationError(f"kind: must be one of {list(KINDS)}, got {kind!r}")
    if kind == "gaussian":
        return parse_gaussian(data, "")
    if kind == "discrete":
        return parse_discrete(data, "")
    return parse_simulate(data, "")


def parse_gaussian(data: dict, path: str) -> GaussianTwcSpec:
    vals = {}
    for key in ("a", "b", "c", "d", "p1", "p2", "ps1", "ps2", "pz1", "pz2"):
        vals[key] = _number(_need(data, key, path), f"{path}.{key}" if path else key)
    for key in ("rho_s", "rho_z"):
        vals[key] = _number(data.get(key, 0.0), f"{path}.{key}" if path else key)
    try:
        return GaussianTwcSpec(**vals)
    except ValidationError as exc:
        raise ValidationError(f"{path or 'config'}: {exc}")


def _parse_discrete_body(data: dict, path: str) -> DiscreteTwcSpec:
    alph = _need(data, "alphabets", path)
    sizes = {}
    for key in ("x1", "x2", "y1", "y2", "s1", "s2"):
        raw = _need(alph, key, f"{path}.alphabets" if path else "alphabets")
        size = _integer(raw, f"{path}.alphabets.{key}" if path else f"alphabets.{key}")
        if size < 1:
            _fail(f"{path}.alphabets.{key}" if path else f"alphabets.{key}",
                  f"size must be >= 1, got {size}")
        sizes[key] = size
    state = _array(_need(data, "state_dist", path), f"{path}.state_dist" if path else "state_dist")
    chan = _array(_need(data, "channel", path), f"{path}.channel" if path else "channel")
    want_state = (sizes["s1"], sizes["s2"])
    if state.shape != want_state:
        _fail(f"{path}.state_dist" if path else "state_dist",
              f"shape {state.shape} does not match alphabet sizes {want_state}")
    want_chan = (sizes["x1"], sizes["x2"], sizes["s1"], sizes["s2"], sizes["y1"], sizes["y2"])
    if chan.shape != want_chan:
        _fail(f"{path}.channel" if path else "channel",
              f"shape {chan.shape} does not match [x1][x2][s1][s2][y1][y2] sizes {want_chan}")
    try:
        return DiscreteTwcSpec.create(sizes["x1"], sizes["x2"], sizes["y1"], sizes["y2"],
                                      sizes["s1"], sizes["s2"], state, chan)
    except ValidationError as exc:
        raise ValidationError(f"{path or 'config'}: {exc}")


def parse_discrete(data: dict, path: str) -> DiscreteConfig:
    spec = _parse_discrete_body(data, path)
    raw = data.get("search", {})
    if not isinstance(raw, dict):
        _fail(f"{path}.search" if path else "search", "expected an object")
    aux1 = _integer(raw.get("aux1", spec.alph_x1.size * spec.alph_s1.size),
                    f"{path}.search.aux1" if path else "search.aux1")
    aux2 = _integer(raw.get("aux2", spec.alph_x2.size * spec.alph_s2.size),
                    f"{path}.search.aux2" if path else "search.aux2")
    step = _number(raw.get("grid_step", DEFAULT_GRID_STEP),
                   f"{path}.search.grid_step" if path else "search.grid_step")
    cap = _integer(raw.get("max_pairs", DEFAULT_MAX_PAIRS),
                   f"{path}.search.max_pairs" if path else "search.max_pairs")
    return DiscreteConfig(spec=spec, search=RegionSearch(aux1=aux1, aux2=aux2,
                                                         grid_step=step, max_pairs=cap))


def _parse_policy(data: dict, user: int, spec: DiscreteTwcSpec, path: str) -> EncoderPolicy:
    kern = _array(_need(data, "aux_given_state", path), f"{path}.aux_given_state")
    if kern.ndim != 2:
        _fail(f"{path}.aux_given_state", f"expected a 2-d array of P(u|s) rows, got shape {kern.shape}")
    s_size = spec.alph_s1.size if user == 1 else spec.alph_s2.size
    if kern.shape[0] != s_size:
        _fail(f"{path}.aux_given_state", f"needs one row per state symbol ({s_size}), got {kern.shape[0]}")
    raw_map = _need(data, "input_map", path)
    fmap = np.array(raw_map)
    if fmap.ndim != 2 or fmap.dtype.kind not in "iu":
        _fail(f"{path}.input_map", "expected a 2-d integer array indexed [u][s]")
    aux = Alphabet(f"U{user}", kern.shape[1])
    s_alph = spec.alph_s1 if user == 1 else spec.alph_s2
    try:
        kernel = ConditionalKernel(input_axes=(s_alph,), output_axes=(aux,), probs=kern)
        pol = EncoderPolicy(user=user, aux_alph=aux, aux_given_state=kernel, input_map=fmap)
        pol.validate_against(spec)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}")
    return pol


def parse_simulate(data: dict, path: str) -> SimulateBundle:
    spec = _parse_discrete_body(_need(data, "channel_spec", path),
                                f"{path}.channel_spec" if path else "channel_spec")
    pol1 = _parse_policy(_need(data, "policy1", path), 1, spec,
                         f"{path}.policy1" if path else "policy1")
    pol2 = _parse_policy(_need(data, "policy2", path), 2, spec,
                         f"{path}.policy2" if path else "policy2")
    sim = _need(data, "sim", path)
    sim_path = f"{path}.sim" if path else "sim"
    raw_n = _need(sim, "n", sim_path)
    if isinstance(raw_n, list):
        if not raw_n:
            _fail(f"{sim_path}.n", "blocklength list must be nonempty")
        n_values = tuple(_integer(v, f"{sim_path}.n[{i}]") for i, v in enumerate(raw_n))
    else:
        n_values = (_integer(raw_n, f"{sim_path}.n"),)
    rate1 = _number(_need(sim, "rate1", sim_path), f"{sim_path}.rate1")
    rate2 = _number(_need(sim, "rate2", sim_path), f"{sim_path}.rate2")
    trials = _integer(_need(sim, "trials", sim_path), f"{sim_path}.trials")
    seed = _integer(_need(sim, "seed", sim_path), f"{sim_path}.seed")
    epsilon = _number(sim.get("epsilon", 0.15), f"{sim_path}.epsilon")
    br1 = sim.get("bin_rate1")
    br2 = sim.get("bin_rate2")
    bundle = SimulateBundle(
        spec=spec, policy1=pol1, policy2=pol2, n_values=n_values,
        rate1=rate1, rate2=rate2, trials=trials, seed=seed, epsilon=epsilon,
        bin_rate1=None if br1 is None else _number(br1, f"{sim_path}.bin_rate1"),
        bin_rate2=None if br2 is None else _number(br2, f"{sim_path}.bin_rate2"),
    )
    try:
        for n in n_values:
            bundle.sim_config(n)
    except ValidationError as exc:
        # keep the subclass so callers still see e.g. a configuration error
        raise type(exc)(f"{sim_path}: {exc}")
    return bundle


def apply_region_overrides(cfg: DiscreteConfig, grid_step: float | None = None,
                           aux_size=None, max_pairs: int | None = None) -> DiscreteConfig:
    """Fold CLI/service flag values into a parsed discrete config."""
    search = cfg.search
    if aux_size:
        sizes = list(aux_size)
        if len(sizes) == 1:
            search = dataclasses.replace(search, aux1=sizes[0], aux2=sizes[0])
        elif len(sizes) == 2:
            search = dataclasses.replace(search, aux1=sizes[0], aux2=sizes[1])
        else:
            raise ValidationError(f"aux_size takes one or two values, got {sizes}")
    if grid_step is not None:
        search = dataclasses.replace(search, grid_step=grid_step)
    if max_pairs is not None:
        search = dataclasses.replace(search, max_pairs=max_pairs)
    return dataclasses.replace(cfg, search=search)


def apply_simulate_overrides(bundle: SimulateBundle, seed: int | None = None,
                             trials: int | None = None, epsilon: float | None = None,
                             bin_rate1: float | None = None,
                             bin_rate2: float | None = None) -> SimulateBundle:
    """Fold CLI/service flag values into a parsed simulate bundle."""
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if trials is not None:
        updates["trials"] = trials
    if epsilon is not None:
        updates["epsilon"] = epsilon
    if bin_rate1 is not None:
        updates["bin_rate1"] = bin_rate1
    if bin_rate2 is not None:
        updates["bin_rate2"] = bin_rate2
    if not updates:
        return bundle
    replaced = dataclasses.replace(bundle, **updates)
    for n in replaced.n_values:
        replaced.sim_config(n)
    return replaced


def gaussian_to_config(spec: GaussianTwcSpec) -> dict:
    return {
        "kind": "gaussian",
        "a": spec.a, "b": spec.b, "c": spec.c, "d": spec.d,
        "p1": spec.p1, "p2": spec.p2, "ps1": spec.ps1, "ps2": spec.ps2,
        "pz1": spec.pz1, "pz2": spec.pz2, "rho_s": spec.rho_s, "rho_z": spec.rho_z,
    }


def discrete_body_to_config(spec: DiscreteTwcSpec) -> dict:
    return {
        "alphabets": {
            "x1": spec.alph_x1.size, "x2": spec.alph_x2.size,
            "y1": spec.alph_y1.size, "y2": spec.alph_y2.size,
            "s1": spec.alph_s1.size, "s2": spec.alph_s2.size,
        },
        "state_dist": spec.state_dist.probs.tolist(),
        "channel": spec.channel.probs.tolist(),
    }


def discrete_to_config(cfg: DiscreteConfig) -> dict:
    out = {"kind": "discrete"}
    out.update(discrete_body_to_config(cfg.spec))
    out["search"] = {
        "aux1": cfg.search.aux1, "aux2": cfg.search.aux2,
        "grid_step": cfg.search.grid_step, "max_pairs": cfg.search.max_pairs,
    }
    return out


def policy_to_config(pol: EncoderPolicy) -> dict:
    return {
        "aux_given_state": pol.aux_given_state.probs.tolist(),
        "input_map": pol.input_map.tolist(),
    }


def simulate_to_config(bundle: SimulateBundle) -> dict:
    return {
        "kind": "simulate",
        "channel_spec": discrete_body_to_config(bundle.spec),
        "policy1": policy_to_config(bundle.policy1),
        "policy2": policy_to_config(bundle.policy2),
        "sim": {
            "n": list(bundle.n_values),
            "rate1": bundle.rate1, "rate2": bundle.rate2,
            "trials": bundle.trials, "seed": bundle.seed, "epsilon": bundle.epsilon,
            "bin_rate1": bundle.bin_rate1, "bin_rate2": bundle.bin_rate2,
        },
    }
