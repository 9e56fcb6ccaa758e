"""Command orchestration shared by the HTTP service and the CLI.

Each runner takes parsed config objects and returns a JSON-serializable dict;
artifact writing (files, HTTP framing, exit codes) stays with the callers.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .binning import (
    SimConfig,
    default_bin_rate,
    estimate_error,
    is_jointly_typical,
    is_typical,
    sequence_count,
)
from .config import (
    DiscreteConfig,
    SimulateBundle,
    discrete_to_config,
    gaussian_to_config,
    policy_to_config,
    simulate_to_config,
)
from .discrete import (
    EncoderPolicy,
    convexify,
    enumerate_region,
    gp_rate_bounds,
    assemble_joint,
    pareto_frontier,
)
from .errors import ValidationError
from .gaussian import (
    DpcCoefficients,
    GaussianTwcSpec,
    capacity_region,
    dpc_coefficients,
    gp_rate_gaussian,
    verify_entropy_identity,
    verify_orthogonality,
)
from .probability import Alphabet, ConditionalKernel, JointTable, Pmf, marginalize

VERIFY_PAIR_BUDGET = 60_000


def format_sig(value: float) -> str:
    """CSV numeric rendering: 12 significant digits."""
    return format(float(value), ".12g")


def run_region(cfg: DiscreteConfig, convexify_flag: bool = False) -> dict:
    """Enumerate the policy grid, mark the Pareto frontier, keep achievers."""
    search = cfg.search
    rates, pairs = enumerate_region(cfg.spec, (search.aux1, search.aux2),
                                    search.grid_step, max_pairs=search.max_pairs,
                                    keep_policies=True)
    frontier = pareto_frontier(rates)
    frontier_keys = {(p.r1, p.r2) for p in frontier}
    achievers = {}
    for rp, (p1, p2) in zip(rates, pairs):
        key = (rp.r1, rp.r2)
        if key in frontier_keys and key not in achievers:
            achievers[key] = (p1, p2)
    result = {
        "command": "region",
        "grid_step": search.grid_step,
        "aux_sizes": [search.aux1, search.aux2],
        "num_points": len(rates),
        "points": [
            {"r1": rp.r1, "r2": rp.r2, "is_frontier": (rp.r1, rp.r2) in frontier_keys}
            for rp in rates
        ],
        "frontier": [
            {
                "r1": p.r1,
                "r2": p.r2,
                "policy1": policy_to_config(achievers[(p.r1, p.r2)][0]),
                "policy2": policy_to_config(achievers[(p.r1, p.r2)][1]),
            }
            for p in frontier
        ],
        "config_echo": discrete_to_config(cfg),
    }
    if convexify_flag:
        result["convex_hull"] = [{"r1": p.r1, "r2": p.r2} for p in convexify(rates)]
    return result


def region_csv_lines(result: dict) -> list:
    lines = ["r1,r2,is_frontier"]
    for row in result["points"]:
        flag = "true" if row["is_frontier"] else "false"
        lines.append(f"{format_sig(row['r1'])},{format_sig(row['r2'])},{flag}")
    return lines


def run_gaussian(spec: GaussianTwcSpec) -> dict:
    coeffs = dpc_coefficients(spec)
    cap = capacity_region(spec)
    gp = gp_rate_gaussian(spec, coeffs)
    orth = verify_orthogonality(spec, coeffs)
    ident = verify_entropy_identity(spec, coeffs)
    return {
        "command": "gaussian",
        "spec_echo": gaussian_to_config(spec),
        "coefficients": {"alpha": coeffs.alpha, "beta": coeffs.beta},
        "capacity": {"r1": cap.r1, "r2": cap.r2},
        "gp_rate": {"r1": gp.r1, "r2": gp.r2},
        "capacity_gap": max(abs(gp.r1 - cap.r1), abs(gp.r2 - cap.r2)),
        "orthogonality": orth,
        "entropy_identity": {
            "lhs": ident["lhs"],
            "rhs": ident["rhs"],
            "delta": abs(ident["lhs"] - ident["rhs"]),
        },
    }


def run_simulate(bundle: SimulateBundle, workers: int | None = None) -> dict:
    br1 = bundle.bin_rate1
    br2 = bundle.bin_rate2
    if br1 is None:
        br1 = default_bin_rate(bundle.spec, bundle.policy1)
    if br2 is None:
        br2 = default_bin_rate(bundle.spec, bundle.policy2)
    resolved = dataclasses.replace(bundle, bin_rate1=br1, bin_rate2=br2)
    runs = []
    for n in resolved.n_values:
        cfg = resolved.sim_config(n)
        report = estimate_error(resolved.spec, resolved.policy1, resolved.policy2,
                                cfg, workers=workers)
        runs.append({
            "n": n,
            "num_messages1": sequence_count(n, resolved.rate1),
            "num_messages2": sequence_count(n, resolved.rate2),
            "num_bins1": sequence_count(n, br1),
            "num_bins2": sequence_count(n, br2),
            "p_err1": report.p_err1,
            "p_err2": report.p_err2,
            "encode_fail1": report.encode_fail1,
            "encode_fail2": report.encode_fail2,
            "p_err1_half_width": report.p_err1_half_width,
            "p_err2_half_width": report.p_err2_half_width,
            "encode_fail1_half_width": report.encode_fail1_half_width,
            "encode_fail2_half_width": report.encode_fail2_half_width,
        })
    return {
        "command": "simulate",
        "trials": resolved.trials,
        "seed": resolved.seed,
        "epsilon": resolved.epsilon,
        "rate1": resolved.rate1,
        "rate2": resolved.rate2,
        "bin_rate1": br1,
        "bin_rate2": br2,
        "runs": runs,
        "config_echo": simulate_to_config(resolved),
    }


def simulate_csv_lines(result: dict) -> list:
    lines = ["n,p_err1,p_err2,encode_fail1,encode_fail2"]
    for row in result["runs"]:
        cells = [str(row["n"])] + [
            format_sig(row[key])
            for key in ("p_err1", "p_err2", "encode_fail1", "encode_fail2")
        ]
        lines.append(",".join(cells))
    return lines


def _prop(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _verify_gaussian(spec: GaussianTwcSpec) -> list:
    props = []
    coeffs = dpc_coefficients(spec)
    cap = capacity_region(spec)
    gp = gp_rate_gaussian(spec, coeffs)
    gap = max(abs(gp.r1 - cap.r1), abs(gp.r2 - cap.r2))
    props.append(_prop("dirty_paper_equivalence", gap < 1e-9, f"max coordinate gap {gap:.3e}"))

    dev = 0.0
    for power in (0.0, 1.0, 10.0, 100.0):
        for rho in (-0.9, 0.0, 0.9):
            swept = dataclasses.replace(spec, ps1=power, ps2=power, rho_s=rho)
            rates = gp_rate_gaussian(swept, dpc_coefficients(swept))
            corners = capacity_region(swept)
            dev = max(dev, abs(rates.r1 - cap.r1), abs(rates.r2 - cap.r2),
                      abs(corners.r1 - cap.r1), abs(corners.r2 - cap.r2))
    props.append(_prop("interference_invariance", dev < 1e-9,
                       f"max deviation over 12 interference settings {dev:.3e}"))

    dev = 0.0
    for ga in (-5.0, 0.0, 5.0):
        for gd in (-5.0, 0.0, 5.0):
            swept = dataclasses.replace(spec, a=ga, d=gd)
            rates = gp_rate_gaussian(swept, dpc_coefficients(swept))
            dev = max(dev, abs(rates.r1 - gp.r1), abs(rates.r2 - gp.r2))
    props.append(_prop("gain_invariance", dev <= 1e-12,
                       f"max deviation over 9 (a, d) settings {dev:.3e}"))

    orth = verify_orthogonality(spec, coeffs)
    worst = max(abs(orth["cov1"]), abs(orth["cov2"]))
    props.append(_prop("orthogonality", worst < 1e-12, f"max residual covariance {worst:.3e}"))

    ident = verify_entropy_identity(spec, coeffs)
    delta = abs(ident["lhs"] - ident["rhs"])
    props.append(_prop("entropy_identity", delta < 1e-9, f"entropy-identity delta {delta:.3e}"))

    if spec.c == 0:
        props.append(_prop("alpha_optimality", True, "skipped: c = 0 leaves no alpha domain"))
    else:
        lo, hi = sorted((0.0, 2.0 / spec.c))
        steps = int(math.floor((hi - lo) / 0.01 + 1e-9))
        alphas = [lo + 0.01 * k for k in range(steps + 1)]
        r1s = [gp_rate_gaussian(spec, DpcCoefficients(alpha=al, beta=coeffs.beta)).r1
               for al in alphas]
        spread = max(r1s) - min(r1s)
        if spread <= 1e-12:
            props.append(_prop("alpha_optimality", True,
                               "rate flat in alpha (no interference to cancel)"))
        else:
            best = alphas[int(np.argmax(r1s))]
            ok = abs(best - coeffs.alpha) <= 0.01 + 1e-9
            props.append(_prop("alpha_optimality", ok,
                               f"grid argmax {best:.4f} vs closed form {coeffs.alpha:.4f}"))
    return props


def _default_policy(spec, user: int, aux_size: int) -> EncoderPolicy:
    s_alph = spec.alph_s1 if user == 1 else spec.alph_s2
    x_size = (spec.alph_x1 if user == 1 else spec.alph_x2).size
    aux = Alphabet(f"U{user}", aux_size)
    kernel = ConditionalKernel(
        input_axes=(s_alph,), output_axes=(aux,),
        probs=np.full((s_alph.size, aux_size), 1.0 / aux_size),
    )
    fmap = np.tile(np.arange(aux_size)[:, None] % x_size, (1, s_alph.size))
    return EncoderPolicy(user=user, aux_alph=aux, aux_given_state=kernel, input_map=fmap)


def _count_policies(spec, user: int, aux_size: int, grid_step: float) -> int:
    levels = round(1.0 / grid_step)
    rows = math.comb(levels + aux_size - 1, aux_size - 1)
    s = (spec.alph_s1 if user == 1 else spec.alph_s2).size
    x = (spec.alph_x1 if user == 1 else spec.alph_x2).size
    return rows ** s * x ** (aux_size * s)


def _verify_discrete(cfg: DiscreteConfig) -> list:
    props = []
    spec = cfg.spec
    pol1 = _default_policy(spec, 1, 2)
    pol2 = _default_policy(spec, 2, 2)
    joint = assemble_joint(spec, pol1, pol2)
    marg = marginalize(joint, ["S1", "S2"])
    dev = float(np.abs(marg.probs - spec.state_dist.probs).max())
    props.append(_prop("state_marginal_reproduction", dev <= 1e-12,
                       f"max state-marginal deviation {dev:.3e}"))
    mass_err = abs(float(joint.probs.sum()) - 1.0)
    props.append(_prop("joint_mass", mass_err <= 1e-12, f"joint mass error {mass_err:.3e}"))

    rates = gp_rate_bounds(joint)
    props.append(_prop("rate_clamping", rates.r1 >= 0 and rates.r2 >= 0,
                       f"bounds ({rates.r1:.6g}, {rates.r2:.6g})"))

    total = _count_policies(spec, 1, 2, 0.5) * _count_policies(spec, 2, 2, 0.5)
    if total > VERIFY_PAIR_BUDGET:
        props.append(_prop("frontier_consistency", True,
                           f"skipped: {total} policy pairs exceeds the verify budget"))
        return props
    pts = enumerate_region(spec, (2, 2), 0.5, max_pairs=VERIFY_PAIR_BUDGET)
    front = pareto_frontier(pts)
    sorted_ok = all(front[i].r1 < front[i + 1].r1 for i in range(len(front) - 1))
    non_dominated = all(
        not (q.r1 >= p.r1 and q.r2 >= p.r2 and (q.r1 > p.r1 or q.r2 > p.r2))
        for p in front for q in front if p is not q
    )
    covered = all(
        any(f.r1 >= p.r1 - 1e-12 and f.r2 >= p.r2 - 1e-12 for f in front) for p in pts
    )
    props.append(_prop("frontier_consistency", sorted_ok and non_dominated and covered,
                       f"{len(pts)} points, {len(front)} on the frontier"))
    return props


def _verify_simulate(bundle: SimulateBundle) -> list:
    props = []
    bundle.policy1.validate_against(bundle.spec)
    bundle.policy2.validate_against(bundle.spec)
    props.append(_prop("policies_valid", True, "both policies match the channel spec"))

    n = min(bundle.n_values)
    trials = min(bundle.trials, 50)
    small = dataclasses.replace(bundle, n_values=(n,), trials=trials)
    cfg = small.sim_config(n)
    rep_a = estimate_error(small.spec, small.policy1, small.policy2, cfg, workers=1)
    rep_b = estimate_error(small.spec, small.policy1, small.policy2, cfg, workers=4)
    props.append(_prop("reproducibility", rep_a == rep_b,
                       f"two runs at n={n}, trials={trials} agree exactly"))

    from .binning import pair_law
    law = pair_law(bundle.spec, bundle.policy1)
    s_name = f"S{bundle.policy1.user}"
    s_alph = law.axes[law.axis_index(s_name)]
    s_marg = marginalize(law, [s_name])
    pmf = Pmf(alphabet=s_alph, probs=s_marg.probs)
    single = JointTable(axes=(s_alph,), probs=s_marg.probs)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(0xC0FFEE)))
    mismatches = 0
    implication_breaks = 0
    flat_law = law.probs.ravel()
    for _ in range(20):
        draw = rng.choice(flat_law.size, size=24, p=flat_law)
        s_seq, u_seq = np.unravel_index(draw, law.probs.shape)
        if is_jointly_typical({s_name: s_seq}, single, 0.3) != is_typical(s_seq, pmf, 0.3):
            mismatches += 1
        jointly = is_jointly_typical({s_name: s_seq, law.axes[1].name: u_seq}, law, 0.3)
        if jointly and not is_typical(s_seq, pmf, 0.3):
            implication_breaks += 1
    props.append(_prop("typicality_consistency", mismatches == 0 and implication_breaks == 0,
                       f"{mismatches} single-axis mismatches, {implication_breaks} implication breaks"))
    return props


def run_verify(parsed, workers: int | None = None) -> dict:
    if isinstance(parsed, GaussianTwcSpec):
        kind = "gaussian"
        props = _verify_gaussian(parsed)
    elif isinstance(parsed, DiscreteConfig):
        kind = "discrete"
        props = _verify_discrete(parsed)
    elif isinstance(parsed, SimulateBundle):
        kind = "simulate"
        props = _verify_simulate(parsed)
    else:
        raise ValidationError(f"verify does not support parsed object {type(parsed).__name__}")
    return {
        "command": "verify",
        "kind": kind,
        "properties": props,
        "all_passed": all(p["passed"] for p in props),
    }


def dispatch(command: str, parsed, *, convexify_flag: bool = False,
             workers: int | None = None) -> dict:
    """Route a parsed config to its runner, enforcing command/kind pairing."""
    if command == "region":
        if not isinstance(parsed, DiscreteConfig):
            raise ValidationError("region requires a discrete channel config")
        return run_region(parsed, convexify_flag=convexify_flag)
    if command == "gaussian":
        if not isinstance(parsed, GaussianTwcSpec):
            raise ValidationError("gaussian requires a gaussian spec config")
        return run_gaussian(parsed)
    if command == "simulate":
        if not isinstance(parsed, SimulateBundle):
            raise ValidationError("simulate requires a simulate bundle config")
        return run_simulate(parsed, workers=workers)
    if command == "verify":
        return run_verify(parsed, workers=workers)
    raise ValidationError(f"unknown command {command!r}")
