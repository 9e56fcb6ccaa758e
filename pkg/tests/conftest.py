"""Shared channel builders used across the test modules."""
import numpy as np
import pytest

from twdp.discrete import DiscreteTwcSpec, EncoderPolicy
from twdp.probability import Alphabet, ConditionalKernel


def crossed_noiseless_spec() -> DiscreteTwcSpec:
    """Binary crossed links, constant state: Y1 = X2, Y2 = X1."""
    chan = np.zeros((2, 2, 1, 1, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            chan[x1, x2, 0, 0, x2, x1] = 1.0
    return DiscreteTwcSpec.create(2, 2, 2, 2, 1, 1, [[1.0]], chan)


def dirty_paper_spec(q: float = 0.1) -> DiscreteTwcSpec:
    """One-directional binary link Y2 = X1 xor S1 xor Z2, flip rate q, uniform S1.

    User 2 is silenced: |X2| = |Y1| = |S2| = 1.
    """
    chan = np.zeros((2, 1, 2, 1, 1, 2))
    for x1 in range(2):
        for s1 in range(2):
            clean = x1 ^ s1
            chan[x1, 0, s1, 0, 0, clean] = 1.0 - q
            chan[x1, 0, s1, 0, 0, 1 - clean] = q
    return DiscreteTwcSpec.create(2, 1, 1, 2, 2, 1, [[0.5], [0.5]], chan)


def make_policy(user: int, state_size: int, rows, input_map) -> EncoderPolicy:
    rows = np.asarray(rows, dtype=float)
    aux_size = rows.shape[1]
    aux = Alphabet(f"U{user}", aux_size)
    kernel = ConditionalKernel(
        input_axes=(Alphabet(f"S{user}", state_size),),
        output_axes=(aux,),
        probs=rows,
    )
    return EncoderPolicy(user=user, aux_alph=aux, aux_given_state=kernel,
                         input_map=np.asarray(input_map, dtype=int))


def silent_policy(user: int) -> EncoderPolicy:
    """Degenerate single-symbol policy for a silenced side."""
    return make_policy(user, 1, [[1.0]], [[0]])


@pytest.fixture
def crossed_spec():
    return crossed_noiseless_spec()


@pytest.fixture
def dp_spec():
    return dirty_paper_spec()
