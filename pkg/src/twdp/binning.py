"""Finite-blocklength Monte Carlo for the random binning scheme.

Each trial draws fresh codebooks of auxiliary sequences indexed by (message,
bin), encodes by picking the smallest bin index whose sequence is jointly
typical with the local state block, pushes the resulting inputs through the
channel, and decodes by scanning the other user's codebook for joint
typicality with everything the receiving side knows.

Typicality is the robust letter kind: every cell's empirical count must sit
within a relative epsilon window of n*P(cell), and cells of probability zero
must not occur at all. Trials use per-index counter-based RNG streams so the
aggregate is reproducible under any parallel schedule.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .discrete import DiscreteTwcSpec, EncoderPolicy, assemble_joint
from .errors import ConfigurationError, ValidationError
from .probability import JointTable, Pmf, conditional_mutual_information, marginalize

# Absolute guard at count scale so window-boundary decisions survive float
# rounding of n*P(cell).
COUNT_GUARD = 1e-9

# Standard normal 97.5% quantile for 95% two-sided intervals.
Z95 = 1.959963984540054

DEFAULT_BIN_MARGIN = 0.1


@dataclass(frozen=True)
class SimConfig:
    """Blocklength, per-flow message and bin rates, slack, and trial budget.

    bin_rate left as None means: use the policy's I(U;S) plus 0.1 bits,
    computed exactly at run time.
    """

    n: int
    rate1: float
    rate2: float
    trials: int
    seed: int
    epsilon: float = 0.15
    bin_rate1: float | None = None
    bin_rate2: float | None = None

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"blocklength must be a positive integer, got {self.n}")
        if self.rate1 < 0 or self.rate2 < 0:
            raise ValidationError(f"rates must be nonnegative, got ({self.rate1}, {self.rate2})")
        for label, br in (("bin_rate1", self.bin_rate1), ("bin_rate2", self.bin_rate2)):
            if br is not None and br < 0:
                raise ValidationError(f"{label} must be nonnegative, got {br}")
        if not (0 < self.epsilon < 1):
            raise ValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigurationError(f"trial budget must be a positive integer, got {self.trials}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2 ** 64):
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def sequence_count(n: int, rate: float) -> int:
    """ceil(2^(n*rate)); message and bin index counts both use this."""
    return max(1, math.ceil(2.0 ** (n * rate)))


@dataclass(frozen=True)
class Codebook:
    """Auxiliary sequences indexed by (message w, bin v), both 1-based."""

    user: int
    aux_size: int
    sequences: np.ndarray  # shape (M, B, n), integer symbols

    def __post_init__(self):
        seqs = np.asarray(self.sequences, dtype=int)
        if seqs.ndim != 3 or min(seqs.shape) < 1:
            raise ValidationError(f"codebook sequences must be (M, B, n) with positive dims, got {seqs.shape}")
        if np.any(seqs < 0) or np.any(seqs >= self.aux_size):
            raise ValidationError("codebook symbols fall outside the auxiliary alphabet")
        seqs = seqs.copy()
        seqs.flags.writeable = False
        object.__setattr__(self, "sequences", seqs)

    @property
    def num_messages(self) -> int:
        return self.sequences.shape[0]

    @property
    def num_bins(self) -> int:
        return self.sequences.shape[1]

    @classmethod
    def draw(cls, user: int, num_messages: int, num_bins: int, n: int,
             aux_marginal: Pmf, rng: np.random.Generator) -> "Codebook":
        """All M*B sequences i.i.d. from the auxiliary marginal."""
        size = aux_marginal.alphabet.size
        flat = rng.random((num_messages, num_bins, n))
        cum = np.cumsum(aux_marginal.probs)
        seqs = np.searchsorted(cum, flat, side="right")
        np.clip(seqs, 0, size - 1, out=seqs)
        return cls(user=user, aux_size=size, sequences=seqs)


def _counts_within(counts: np.ndarray, probs: np.ndarray, n: int, epsilon: float) -> bool:
    target = n * probs
    return bool(np.all(np.abs(counts - target) <= epsilon * target + COUNT_GUARD))


def is_typical(seq, pmf: Pmf, epsilon: float) -> bool:
    """Robust letter typicality of a single sequence against a pmf."""
    arr = np.asarray(seq, dtype=int)
    size = pmf.alphabet.size
    if arr.ndim != 1 or arr.size < 1:
        raise ConfigurationError("is_typical expects a nonempty 1-d sequence")
    if np.any(arr < 0) or np.any(arr >= size):
        raise ConfigurationError(f"sequence symbols fall outside alphabet {pmf.alphabet.name!r}")
    counts = np.bincount(arr, minlength=size)
    return _counts_within(counts, pmf.probs, arr.size, epsilon)


def is_jointly_typical(seqs, joint: JointTable, epsilon: float) -> bool:
    """Robust typicality of the empirical joint type of named sequences.

    seqs maps axis name -> integer sequence; the set of names must equal the
    table's axes and all sequences must share one length.
    """
    names = set(seqs)
    table_names = set(joint.axis_names)
    if names != table_names:
        raise ConfigurationError(
            f"sequence axes {sorted(names)} do not match table axes {sorted(table_names)}"
        )
    arrays = [np.asarray(seqs[name], dtype=int) for name in joint.axis_names]
    n = arrays[0].size
    for name, arr in zip(joint.axis_names, arrays):
        if arr.ndim != 1 or arr.size != n:
            raise ConfigurationError(f"sequence for {name!r} must be 1-d of common length {n}")
    shape = joint.probs.shape
    for arr, size, name in zip(arrays, shape, joint.axis_names):
        if np.any(arr < 0) or np.any(arr >= size):
            raise ConfigurationError(f"sequence symbols fall outside axis {name!r}")
    flat = np.ravel_multi_index(tuple(arrays), shape)
    counts = np.bincount(flat, minlength=joint.probs.size)
    return _counts_within(counts, joint.probs.ravel(), n, epsilon)


def _typical_row_mask(candidates: np.ndarray, fixed_flat: np.ndarray,
                      joint_flat: np.ndarray, cand_stride: int, epsilon: float) -> np.ndarray:
    """Vectorized robust-typicality test for many candidate rows at once.

    fixed_flat holds the already-raveled contribution of the non-candidate
    axes per time step; each candidate row adds symbol*cand_stride.
    """
    rows, n = candidates.shape
    cells = joint_flat.size
    idx = fixed_flat[None, :] + candidates * cand_stride
    offsets = (np.arange(rows) * cells)[:, None]
    counts = np.bincount((idx + offsets).ravel(), minlength=rows * cells).reshape(rows, cells)
    target = n * joint_flat
    ok = np.abs(counts - target[None, :]) <= epsilon * target[None, :] + COUNT_GUARD
    return ok.all(axis=1)


def gp_encode(w: int, state_seq, codebook: Codebook, pair_law: JointTable,
              epsilon: float) -> tuple[int, bool]:
    """Smallest bin index whose sequence is jointly typical with the state.

    Returns (v, failed); on failure the scheme falls back to bin 1.
    """
    if not (1 <= w <= codebook.num_messages):
        raise ConfigurationError(f"message index {w} outside 1..{codebook.num_messages}")
    if len(pair_law.axes) != 2:
        raise ConfigurationError("pair_law must be a two-axis (state, auxiliary) table")
    state = np.asarray(state_seq, dtype=int)
    # canonical order puts S before U for both users
    s_size, u_size = pair_law.probs.shape
    if np.any(state < 0) or np.any(state >= s_size):
        raise ConfigurationError("state symbols fall outside the pair law's state axis")
    rows = codebook.sequences[w - 1]
    mask = _typical_row_mask(rows, state * u_size, pair_law.probs.ravel(), 1, epsilon)
    hits = np.flatnonzero(mask)
    if hits.size:
        return int(hits[0]) + 1, False
    return 1, True


def transmit(u1_seq, s1_seq, input_map1, u2_seq, s2_seq, input_map2,
             spec: DiscreteTwcSpec, rng: np.random.Generator):
    """Symbolwise deterministic inputs, then i.i.d. channel outputs per use.

    Returns (y1_seq, y2_seq). One uniform variate is consumed per channel use
    regardless of alphabet sizes, keeping the stream layout stable.
    """
    u1 = np.asarray(u1_seq, dtype=int)
    u2 = np.asarray(u2_seq, dtype=int)
    s1 = np.asarray(s1_seq, dtype=int)
    s2 = np.asarray(s2_seq, dtype=int)
    n = u1.size
    if not (u2.size == s1.size == s2.size == n):
        raise ConfigurationError("transmit requires equal-length sequences")
    x1 = np.asarray(input_map1, dtype=int)[u1, s1]
    x2 = np.asarray(input_map2, dtype=int)[u2, s2]
    ny1 = spec.alph_y1.size
    ny2 = spec.alph_y2.size
    flat = spec.channel.probs.reshape(
        spec.alph_x1.size, spec.alph_x2.size, spec.alph_s1.size, spec.alph_s2.size, ny1 * ny2
    )
    rows = flat[x1, x2, s1, s2]
    cum = np.cumsum(rows, axis=1)
    draws = rng.random(n)
    picks = (draws[:, None] >= cum).sum(axis=1)
    np.clip(picks, 0, ny1 * ny2 - 1, out=picks)
    return picks // ny2, picks % ny2


def decode(own_w: int, own_u_seq, own_state_seq, y_seq, other_codebook: Codebook,
           decode_law: JointTable, epsilon: float) -> tuple[int, bool]:
    """Scan the other codebook for candidates jointly typical with the view.

    The receiving side knows its own auxiliary sequence, its own state, and
    the channel output; own_w is carried for bookkeeping only. Returns
    (w_hat, ambiguous): the unique hitting message, or the first hit with
    ambiguous=True when hits span several messages, or (1, False) when
    nothing hits (the caller scores that as an error unless the true message
    is 1).
    """
    if len(decode_law.axes) != 4:
        raise ConfigurationError("decode_law must cover (own U, other U, own S, own Y)")
    names = decode_law.axis_names
    other_u_name = f"U{other_codebook.user}"
    if other_u_name not in names:
        raise ConfigurationError(f"decode_law lacks the candidate axis {other_u_name!r}")
    own_u = np.asarray(own_u_seq, dtype=int)
    own_s = np.asarray(own_state_seq, dtype=int)
    y = np.asarray(y_seq, dtype=int)
    n = own_u.size
    if own_s.size != n or y.size != n:
        raise ConfigurationError("decode requires equal-length sequences")
    shape = decode_law.probs.shape
    cand_axis = names.index(other_u_name)
    # map the remaining table axes onto what the receiver knows
    seq_by_axis = {}
    for name in names:
        if name == other_u_name:
            continue
        if name.startswith("U"):
            seq_by_axis[name] = own_u
        elif name.startswith("S"):
            seq_by_axis[name] = own_s
        elif name.startswith("Y"):
            seq_by_axis[name] = y
        else:
            raise ConfigurationError(f"unexpected decode_law axis {name!r}")
    strides = np.ones(len(shape), dtype=int)
    for i in range(len(shape) - 2, -1, -1):
        strides[i] = strides[i + 1] * shape[i + 1]
    fixed_flat = np.zeros(n, dtype=int)
    for i, name in enumerate(names):
        if name == other_u_name:
            continue
        arr = seq_by_axis[name]
        if np.any(arr < 0) or np.any(arr >= shape[i]):
            raise ConfigurationError(f"sequence symbols fall outside axis {name!r}")
        fixed_flat = fixed_flat + arr * strides[i]
    cands = other_codebook.sequences  # (M, B, n)
    m, b, _ = cands.shape
    mask = _typical_row_mask(cands.reshape(m * b, n), fixed_flat,
                             decode_law.probs.ravel(), strides[cand_axis], epsilon)
    hit_rows = np.flatnonzero(mask)
    if hit_rows.size == 0:
        return 1, False
    messages = hit_rows // b
    first = int(messages[0]) + 1
    ambiguous = bool(np.any(messages != messages[0]))
    return first, ambiguous


@dataclass(frozen=True)
class TrialOutcome:
    """Per-trial flags; index 1/2 refers to the message flow, not the terminal."""

    encode_failure1: bool
    encode_failure2: bool
    decode_error1: bool
    decode_error2: bool


@dataclass(frozen=True)
class SimReport:
    """Empirical rates with normal-approximation 95% half-widths."""

    trials: int
    p_err1: float
    p_err2: float
    encode_fail1: float
    encode_fail2: float
    p_err1_half_width: float
    p_err2_half_width: float
    encode_fail1_half_width: float
    encode_fail2_half_width: float


def _half_width(p: float, trials: int) -> float:
    return Z95 * math.sqrt(p * (1.0 - p) / trials)


def pair_law(spec: DiscreteTwcSpec, pol: EncoderPolicy) -> JointTable:
    """Joint (state, auxiliary) law for one user: P(s) * P(u|s)."""
    s_name = f"S{pol.user}"
    s_marg = marginalize(spec.state_dist, [s_name])
    probs = s_marg.probs[:, None] * pol.aux_given_state.probs
    return JointTable(axes=(s_marg.axes[0], pol.aux_alph), probs=probs)


def default_bin_rate(spec: DiscreteTwcSpec, pol: EncoderPolicy,
                     margin: float = DEFAULT_BIN_MARGIN) -> float:
    """I(U;S) for the policy plus a covering margin."""
    law = pair_law(spec, pol)
    return conditional_mutual_information(law, [f"U{pol.user}"], [f"S{pol.user}"]) + margin


def _resolve_workers(workers) -> int:
    if workers is None:
        raw = os.environ.get("TWDP_THREADS", "1")
        try:
            workers = int(raw)
        except ValueError:
            raise ValidationError(f"TWDP_THREADS must be an integer, got {raw!r}")
    if workers < 1:
        raise ValidationError(f"worker count must be >= 1, got {workers}")
    return workers


def run_trial(trial_index: int, spec: DiscreteTwcSpec, pol1: EncoderPolicy,
              pol2: EncoderPolicy, cfg: SimConfig, laws: dict) -> TrialOutcome:
    """One independent trial; all randomness comes from a counter-based
    stream keyed by (seed, trial_index).

    Draw order: codebook 1, codebook 2, state block, both messages, channel
    noise. Changing it would silently break reproducibility tests.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((cfg.seed, trial_index))))
    n = cfg.n
    cb1 = Codebook.draw(1, laws["m1"], laws["b1"], n, laws["pu1"], rng)
    cb2 = Codebook.draw(2, laws["m2"], laws["b2"], n, laws["pu2"], rng)

    state_flat = laws["state_cum"]
    picks = np.searchsorted(state_flat, rng.random(n), side="right")
    np.clip(picks, 0, state_flat.size - 1, out=picks)
    ns2 = spec.alph_s2.size
    s1 = picks // ns2
    s2 = picks % ns2

    w1 = int(rng.integers(1, laws["m1"] + 1))
    w2 = int(rng.integers(1, laws["m2"] + 1))

    v1, ef1 = gp_encode(w1, s1, cb1, laws["pair1"], cfg.epsilon)
    v2, ef2 = gp_encode(w2, s2, cb2, laws["pair2"], cfg.epsilon)
    u1 = cb1.sequences[w1 - 1, v1 - 1]
    u2 = cb2.sequences[w2 - 1, v2 - 1]

    y1, y2 = transmit(u1, s1, pol1.input_map, u2, s2, pol2.input_map, spec, rng)

    wh1, amb1 = decode(w2, u2, s2, y2, cb1, laws["dec1"], cfg.epsilon)
    wh2, amb2 = decode(w1, u1, s1, y1, cb2, laws["dec2"], cfg.epsilon)

    return TrialOutcome(
        encode_failure1=ef1,
        encode_failure2=ef2,
        decode_error1=(wh1 != w1) or amb1,
        decode_error2=(wh2 != w2) or amb2,
    )


def _prepare_laws(spec: DiscreteTwcSpec, pol1: EncoderPolicy, pol2: EncoderPolicy,
                  cfg: SimConfig) -> dict:
    full = assemble_joint(spec, pol1, pol2)
    pu1_table = marginalize(full, ["U1"])
    pu2_table = marginalize(full, ["U2"])
    br1 = cfg.bin_rate1 if cfg.bin_rate1 is not None else default_bin_rate(spec, pol1)
    br2 = cfg.bin_rate2 if cfg.bin_rate2 is not None else default_bin_rate(spec, pol2)
    return {
        "m1": sequence_count(cfg.n, cfg.rate1),
        "m2": sequence_count(cfg.n, cfg.rate2),
        "b1": sequence_count(cfg.n, br1),
        "b2": sequence_count(cfg.n, br2),
        "pu1": Pmf(alphabet=pol1.aux_alph, probs=pu1_table.probs),
        "pu2": Pmf(alphabet=pol2.aux_alph, probs=pu2_table.probs),
        "pair1": pair_law(spec, pol1),
        "pair2": pair_law(spec, pol2),
        "dec1": marginalize(full, ["S2", "U1", "U2", "Y2"]),
        "dec2": marginalize(full, ["S1", "U1", "U2", "Y1"]),
        "state_cum": np.cumsum(spec.state_dist.probs.ravel()),
    }


def estimate_error(spec: DiscreteTwcSpec, pol1: EncoderPolicy, pol2: EncoderPolicy,
                   cfg: SimConfig, workers: int | None = None) -> SimReport:
    """Monte Carlo estimate of decode-error and encode-failure rates.

    Aggregation sums integer counts over trials, so any partition of the
    trial range across workers yields the identical report.
    """
    if cfg.trials < 1:
        raise ConfigurationError(f"trial budget must be positive, got {cfg.trials}")
    pol1.validate_against(spec)
    pol2.validate_against(spec)
    laws = _prepare_laws(spec, pol1, pol2, cfg)
    nworkers = _resolve_workers(workers)

    def count_range(lo: int, hi: int) -> np.ndarray:
        counts = np.zeros(4, dtype=np.int64)
        for t in range(lo, hi):
            out = run_trial(t, spec, pol1, pol2, cfg, laws)
            counts += (out.decode_error1, out.decode_error2,
                       out.encode_failure1, out.encode_failure2)
        return counts

    if nworkers == 1:
        totals = count_range(0, cfg.trials)
    else:
        chunk = max(1, -(-cfg.trials // nworkers))
        spans = [(lo, min(lo + chunk, cfg.trials)) for lo in range(0, cfg.trials, chunk)]
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            parts = list(pool.map(lambda span: count_range(*span), spans))
        totals = np.sum(parts, axis=0)

    t = cfg.trials
    p1, p2, e1, e2 = (float(c) / t for c in totals)
    return SimReport(
        trials=t,
        p_err1=p1,
        p_err2=p2,
        encode_fail1=e1,
        encode_fail2=e2,
        p_err1_half_width=_half_width(p1, t),
        p_err2_half_width=_half_width(p2, t),
        encode_fail1_half_width=_half_width(e1, t),
        encode_fail2_half_width=_half_width(e2, t),
    )
