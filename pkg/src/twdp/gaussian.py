"""Gaussian two-way dirty paper: coefficient algebra and covariance checks.

The channel is Y1 = a*X1 + b*X2 + S2 + Z1 and Y2 = c*X1 + d*X2 + S1 + Z2 with
independent inputs, correlated interference pair (S1, S2), and correlated
noise pair (Z1, Z2), all zero mean. The auxiliary variables U1 = X1 + alpha*S1
and U2 = X2 + beta*S2 with the inference-cancelling coefficients make the
binning rate expressions collapse to the interference-free capacity corners,
which is what most routines here verify numerically.

All information quantities are in bits. Conditional covariances go through
Schur complements with a pseudo-reduction step that drops zero-variance
labels, plus a relative eigenvalue floor so determinant ratios stay finite.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .discrete import RatePair
from .errors import (
    ConfigurationError,
    DegenerateChannelError,
    DegenerateConditioningError,
    InternalConsistencyError,
    UnboundedRateError,
    ValidationError,
)

JOINT_LABELS = ("X1", "X2", "S1", "S2", "Z1", "Z2", "U1", "U2", "Y1", "Y2")

LOG2E = math.log2(math.e)
# differential entropy constant: 0.5*log2(2*pi*e) per dimension
HALF_LOG2_2PIE = 0.5 * math.log2(2.0 * math.pi * math.e)


@dataclass(frozen=True)
class GaussianTwcSpec:
    """Gains, powers, and pair correlations of the additive Gaussian model."""

    a: float
    b: float
    c: float
    d: float
    p1: float
    p2: float
    ps1: float
    ps2: float
    pz1: float
    pz2: float
    rho_s: float = 0.0
    rho_z: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "ps1", "ps2", "pz1", "pz2"):
            val = getattr(self, name)
            if not math.isfinite(val) or val < 0:
                raise ValidationError(f"power {name} must be finite and >= 0, got {val}")
        for name in ("a", "b", "c", "d"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"gain {name} must be finite")
        for name in ("rho_s", "rho_z"):
            val = getattr(self, name)
            if not math.isfinite(val) or abs(val) > 1:
                raise ValidationError(f"correlation {name} must lie in [-1, 1], got {val}")


@dataclass(frozen=True)
class DpcCoefficients:
    """Linear combination weights for the auxiliaries; finite reals.

    Values produced by dpc_coefficients satisfy alpha in [0, 1/c] for c > 0;
    the type itself stays permissive so perturbed coefficients can be probed.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValidationError(f"coefficients must be finite, got ({self.alpha}, {self.beta})")


@dataclass(frozen=True)
class GaussianVector:
    """Zero-mean jointly Gaussian variables: ordered labels plus covariance."""

    labels: tuple
    cov: np.ndarray
    mean: np.ndarray = field(default=None)

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels) or not labels:
            raise ValidationError(f"labels must be nonempty and unique, got {labels}")
        cov = np.array(self.cov, dtype=float)
        k = len(labels)
        if cov.shape != (k, k):
            raise ValidationError(f"covariance must be {k}x{k}, got {cov.shape}")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise ValidationError("covariance must be symmetric within 1e-12")
        cov = 0.5 * (cov + cov.T)
        eigmin = float(np.linalg.eigvalsh(cov).min())
        if eigmin < -1e-9 * max(1.0, float(np.trace(cov))):
            raise InternalConsistencyError(f"covariance has eigenvalue {eigmin}, below the PSD tolerance")
        mean = np.zeros(k) if self.mean is None else np.asarray(self.mean, dtype=float)
        if mean.shape != (k,) or np.any(mean != 0.0):
            raise ValidationError("means are zero throughout this model")
        cov.flags.writeable = False
        mean = mean.copy()
        mean.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ConfigurationError(f"unknown label {label!r}; have {self.labels}")


def dpc_coefficients(spec: GaussianTwcSpec) -> DpcCoefficients:
    """alpha = c*p1/(c^2*p1 + pz2), beta = b*p2/(b^2*p2 + pz1)."""
    den1 = spec.c ** 2 * spec.p1 + spec.pz2
    den2 = spec.b ** 2 * spec.p2 + spec.pz1
    if den1 <= 0 or den2 <= 0:
        raise DegenerateChannelError(
            f"coefficient denominators must be positive, got ({den1}, {den2})"
        )
    return DpcCoefficients(alpha=spec.c * spec.p1 / den1, beta=spec.b * spec.p2 / den2)


def build_joint_gaussian(spec: GaussianTwcSpec, coeffs: DpcCoefficients) -> GaussianVector:
    """Covariance of (X1,X2,S1,S2,Z1,Z2,U1,U2,Y1,Y2) implied by the model."""
    cs = spec.rho_s * math.sqrt(spec.ps1 * spec.ps2)
    cz = spec.rho_z * math.sqrt(spec.pz1 * spec.pz2)
    base = np.zeros((6, 6))
    base[0, 0] = spec.p1
    base[1, 1] = spec.p2
    base[2:4, 2:4] = [[spec.ps1, cs], [cs, spec.ps2]]
    base[4:6, 4:6] = [[spec.pz1, cz], [cz, spec.pz2]]

    lift = np.zeros((10, 6))
    lift[:6] = np.eye(6)
    lift[6, [0, 2]] = (1.0, coeffs.alpha)                      # U1 = X1 + alpha S1
    lift[7, [1, 3]] = (1.0, coeffs.beta)                       # U2 = X2 + beta S2
    lift[8, [0, 1, 3, 4]] = (spec.a, spec.b, 1.0, 1.0)         # Y1
    lift[9, [0, 1, 2, 5]] = (spec.c, spec.d, 1.0, 1.0)         # Y2
    cov = lift @ base @ lift.T
    cov = 0.5 * (cov + cov.T)
    eigmin = float(np.linalg.eigvalsh(cov).min())
    if eigmin < -1e-9 * max(1.0, float(np.trace(cov))):
        raise InternalConsistencyError(f"assembled covariance is not PSD (eigenvalue {eigmin})")
    return GaussianVector(labels=JOINT_LABELS, cov=cov)


def _floor(cov: np.ndarray) -> float:
    return 1e-12 * max(1.0, float(np.trace(cov)))


def _nonconstant(gv: GaussianVector, labels) -> list:
    floor = _floor(gv.cov)
    return [lb for lb in labels if gv.cov[gv.index(lb), gv.index(lb)] > floor]


def _conditional_cov(gv: GaussianVector, target, given) -> np.ndarray:
    t = [gv.index(lb) for lb in target]
    g = [gv.index(lb) for lb in given]
    cov = gv.cov
    block = cov[np.ix_(t, t)]
    if g:
        cgg = cov[np.ix_(g, g)]
        ctg = cov[np.ix_(t, g)]
        block = block - ctg @ np.linalg.pinv(cgg, hermitian=True) @ ctg.T
        block = 0.5 * (block + block.T)
    eigmin = float(np.linalg.eigvalsh(block).min()) if len(t) else 0.0
    if eigmin < -1e-9 * max(1.0, float(np.trace(gv.cov))):
        raise DegenerateConditioningError(
            f"conditioning {tuple(target)} on {tuple(given)} produced an invalid "
            f"covariance (eigenvalue {eigmin})"
        )
    return block


def _logdet_floored(block: np.ndarray, floor: float) -> tuple:
    """(sum of log2 of floored eigenvalues, count of floored eigenvalues)."""
    eigs = np.linalg.eigvalsh(block)
    degenerate = int(np.sum(eigs <= floor))
    return float(np.sum(np.log2(np.maximum(eigs, floor)))), degenerate


def gaussian_cmi(gv: GaussianVector, a_set, b_set, c_set=()) -> float:
    """I(A; B | C) in bits via conditional log-determinants.

    Zero-variance labels are dropped first; empty A or B after reduction
    gives 0. A block of A that becomes deterministic given (B, C) but not
    given C alone yields +inf (continuous self-information).
    """
    a = list(a_set)
    b = list(b_set)
    c = list(c_set)
    if not a or not b:
        raise ConfigurationError("gaussian_cmi needs nonempty A and B label sets")
    all_named = a + b + c
    if len(set(all_named)) != len(all_named):
        raise ConfigurationError(f"label sets must be disjoint, got A={a}, B={b}, C={c}")
    for lb in all_named:
        gv.index(lb)
    a = _nonconstant(gv, a)
    b = _nonconstant(gv, b)
    c = _nonconstant(gv, c)
    if not a or not b:
        return 0.0
    floor = _floor(gv.cov)
    logdet_ac, deg_ac = _logdet_floored(_conditional_cov(gv, a, c), floor)
    logdet_abc, deg_abc = _logdet_floored(_conditional_cov(gv, a, b + c), floor)
    if deg_abc > deg_ac:
        return math.inf
    return max(0.0, 0.5 * (logdet_ac - logdet_abc))


def conditional_differential_entropy(gv: GaussianVector, target, given) -> float:
    """h(target | given) in bits after dropping zero-variance labels."""
    t = _nonconstant(gv, list(target))
    g = _nonconstant(gv, list(given))
    if not t:
        return -math.inf
    floor = _floor(gv.cov)
    logdet, _ = _logdet_floored(_conditional_cov(gv, t, g), floor)
    return len(t) * HALF_LOG2_2PIE + 0.5 * logdet


def gp_rate_gaussian(spec: GaussianTwcSpec, coeffs: DpcCoefficients) -> RatePair:
    """Both binning rate expressions evaluated on the Gaussian joint."""
    gv = build_joint_gaussian(spec, coeffs)
    r1 = gaussian_cmi(gv, ["U1"], ["Y2"], ["U2", "S2"]) \
        - gaussian_cmi(gv, ["U1"], ["S1"], ["U2", "S2"])
    r2 = gaussian_cmi(gv, ["U2"], ["Y1"], ["U1", "S1"]) \
        - gaussian_cmi(gv, ["U2"], ["S2"], ["U1", "S1"])
    return RatePair(r1=max(0.0, r1), r2=max(0.0, r2))


def capacity_region(spec: GaussianTwcSpec) -> RatePair:
    """Interference-free corner: r1 = 0.5*log2(1 + c^2 p1/pz2), symmetric r2."""
    if spec.pz1 <= 0 or spec.pz2 <= 0:
        raise UnboundedRateError(
            f"capacity needs positive noise powers, got pz1={spec.pz1}, pz2={spec.pz2}"
        )
    r1 = 0.5 * math.log2(1.0 + spec.c ** 2 * spec.p1 / spec.pz2)
    r2 = 0.5 * math.log2(1.0 + spec.b ** 2 * spec.p2 / spec.pz1)
    return RatePair(r1=r1, r2=r2)


def verify_orthogonality(spec: GaussianTwcSpec, coeffs: DpcCoefficients) -> dict:
    """Covariances that the cancelling coefficients drive to zero.

    cov1 = cov(X1 - alpha(cX1+Z2), cX1+Z2); cov2 is the mirror image.
    """
    cov1 = spec.c * spec.p1 - coeffs.alpha * (spec.c ** 2 * spec.p1 + spec.pz2)
    cov2 = spec.b * spec.p2 - coeffs.beta * (spec.b ** 2 * spec.p2 + spec.pz1)
    return {"cov1": cov1, "cov2": cov2}


def verify_entropy_identity(spec: GaussianTwcSpec, coeffs: DpcCoefficients) -> dict:
    """h(U1|Y2,U2,S2) vs h(U1|Y2,U2,S1,S2); equal for the cancelling alpha."""
    gv = build_joint_gaussian(spec, coeffs)
    lhs = conditional_differential_entropy(gv, ["U1"], ["Y2", "U2", "S2"])
    rhs = conditional_differential_entropy(gv, ["U1"], ["Y2", "U2", "S1", "S2"])
    return {"lhs": lhs, "rhs": rhs}


def _base_samples(spec: GaussianTwcSpec, samples: int, seed: int) -> dict:
    """Draw (X1,X2,S1,S2,Z1,Z2) blocks; layout independent of the gains."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    g = rng.standard_normal((samples, 6))
    s_extra = math.sqrt(max(0.0, 1.0 - spec.rho_s ** 2))
    z_extra = math.sqrt(max(0.0, 1.0 - spec.rho_z ** 2))
    return {
        "x1": math.sqrt(spec.p1) * g[:, 0],
        "x2": math.sqrt(spec.p2) * g[:, 1],
        "s1": math.sqrt(spec.ps1) * g[:, 2],
        "s2": math.sqrt(spec.ps2) * (spec.rho_s * g[:, 2] + s_extra * g[:, 3]),
        "z1": math.sqrt(spec.pz1) * g[:, 4],
        "z2": math.sqrt(spec.pz2) * (spec.rho_z * g[:, 4] + z_extra * g[:, 5]),
    }


def sample_residuals(spec: GaussianTwcSpec, samples: int, seed: int) -> np.ndarray:
    """Monte Carlo draws of Y1 - a*X1 under the full channel law."""
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    v = _base_samples(spec, samples, seed)
    y1 = spec.a * v["x1"] + spec.b * v["x2"] + v["s2"] + v["z1"]
    return y1 - spec.a * v["x1"]


def residual_channel_demo(spec: GaussianTwcSpec, samples: int, seed: int) -> dict:
    """Empirical check that Y1 - a*X1 behaves as b*X2 + S2 + Z1.

    Reports first and second moments against the closed-form values with
    4-sigma sampling tolerances, plus the largest pointwise deviation of the
    residual sequence when the bystander gains a and d are swept.
    """
    res = sample_residuals(spec, samples, seed)
    # X2, S2, Z1 are pairwise uncorrelated, so the variances just add
    expected_var = spec.b ** 2 * spec.p2 + spec.ps2 + spec.pz1
    mean = float(res.mean())
    var = float(res.var())
    mean_tol = 4.0 * math.sqrt(expected_var / samples) if expected_var > 0 else 1e-12
    var_tol = 4.0 * expected_var * math.sqrt(2.0 / max(1, samples - 1)) if expected_var > 0 else 1e-12
    sweep_delta = 0.0
    for ga in (0.0, 7.0):
        for gd in (0.0, 7.0):
            swept = dataclasses.replace(spec, a=ga, d=gd)
            delta = float(np.max(np.abs(sample_residuals(swept, samples, seed) - res)))
            sweep_delta = max(sweep_delta, delta)
    return {
        "samples": samples,
        "residual_mean": mean,
        "residual_var": var,
        "expected_mean": 0.0,
        "expected_var": expected_var,
        "mean_tolerance": mean_tol,
        "var_tolerance": var_tol,
        "mean_ok": abs(mean) <= mean_tol,
        "var_ok": abs(var - expected_var) <= var_tol,
        "gain_sweep_max_delta": sweep_delta,
    }


def mc_plugin_cmi(gv: GaussianVector, a_set, b_set, c_set, samples: int, seed: int) -> float:
    """Plug-in CMI: sample the joint, form the sample covariance, reuse the
    log-determinant formula. Cross-check oracle for gaussian_cmi."""
    if samples < 2:
        raise ValidationError(f"plug-in estimate needs samples >= 2, got {samples}")
    labels = list(a_set) + list(b_set) + list(c_set)
    idx = [gv.index(lb) for lb in labels]
    sub = gv.cov[np.ix_(idx, idx)]
    eigs, vecs = np.linalg.eigh(sub)
    factor = vecs * np.sqrt(np.maximum(eigs, 0.0))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    draws = rng.standard_normal((samples, len(labels))) @ factor.T
    emp = np.cov(draws, rowvar=False)
    emp_gv = GaussianVector(labels=tuple(labels), cov=emp)
    return gaussian_cmi(emp_gv, list(a_set), list(b_set), list(c_set))
