"""Multiple channel uses: stacked embeddings and repetition aggregation.

Two ways of combining M uses of a memoryless channel:

* an arbitrary codeword X = (X_1..X_M) is embedded by concatenation into
  R^(N*M); its posterior is a softmax of minus the stacked squared distance,
  normalised over all N^M codewords;
* M repetitions of one equally likely symbol are summarised by the *sum* of
  the per-use observation embeddings, which stays in R^N and keeps the
  exp(-squared distance) posterior law.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from ._mathutil import log_softmax
from .channels import Channel, as_prior, is_uniform
from .errors import EnumerationCapError, ErasureError, NonUniformPriorError
from .geometry import (
    embed_log_posterior,
    embed_symbol,
    posterior_from_point,
    squared_distances,
    symbol_matrix,
)
from .tolerances import ENUMERATION_CAP


def _check_codeword(n: int, codeword) -> tuple[int, ...]:
    cw = tuple(int(c) for c in codeword)
    if not cw:
        raise ValueError("a codeword needs at least one symbol")
    for c in cw:
        if not 0 <= c < n:
            raise IndexError(f"symbol index {c} outside 0..{n - 1}")
    return cw


def embed_codeword(alphabet_or_n, codeword: Sequence[int]) -> np.ndarray:
    n = alphabet_or_n if isinstance(alphabet_or_n, int) else len(alphabet_or_n)
    cw = _check_codeword(n, codeword)
    return np.concatenate([embed_symbol(n, c) for c in cw])


def observation_points(channel: Channel, seq, prior=None) -> np.ndarray:
    """Per-use observation embeddings as an (M, N) array."""
    if len(seq) == 0:
        raise ValueError("an observation sequence needs at least one entry")
    log_prior = np.log(as_prior(prior, channel.n))
    points = []
    for pos, obs in enumerate(seq):
        try:
            points.append(embed_log_posterior(channel.loglik(obs) + log_prior))
        except ErasureError as exc:
            raise ErasureError(str(exc), position=pos) from None
    return np.vstack(points)


def embed_sequence(channel: Channel, seq, prior=None) -> np.ndarray:
    return observation_points(channel, seq, prior).ravel()


def _check_cap(n: int, m: int, cap: int) -> None:
    if n**m > cap:
        raise EnumerationCapError(
            f"enumerating {n}^{m} = {n**m} codewords exceeds the cap of {cap}"
        )


def codebook_squared_distances(per_use: np.ndarray) -> np.ndarray:
    """Stacked squared distance for every codeword, shape (N,)*M.

    ``per_use[m, i]`` is the squared distance of use ``m`` to symbol ``i``;
    the stacked distance of a codeword is the sum along its path.
    """
    return reduce(np.add.outer, list(per_use))


def sequence_posterior_table(channel: Channel, seq, prior=None, cap=ENUMERATION_CAP) -> np.ndarray:
    """Posterior of every codeword given the sequence, as an (N,)*M array."""
    _check_cap(channel.n, len(seq), cap)
    pts = observation_points(channel, seq, prior)
    total = codebook_squared_distances(squared_distances(pts, symbol_matrix(channel.n)))
    return np.exp(log_softmax(-total.ravel())).reshape(total.shape)


def sequence_posterior(channel: Channel, seq, codeword, prior=None, cap=ENUMERATION_CAP) -> float:
    """Pr{X = codeword | Y = seq} from stacked distances, normalised over A^M."""
    cw = _check_codeword(channel.n, codeword)
    if len(cw) != len(seq):
        raise ValueError(f"codeword length {len(cw)} != sequence length {len(seq)}")
    return float(sequence_posterior_table(channel, seq, prior, cap)[cw])


def aggregate_repetition(channel: Channel, seq, prior=None) -> np.ndarray:
    """Sum of per-use observation embeddings for a repeated symbol.

    Only meaningful for equally likely symbols; a non-uniform prior would be
    counted once per use.
    """
    if not is_uniform(prior, channel.n):
        raise NonUniformPriorError(
            "repetition aggregation assumes equally likely input symbols"
        )
    return observation_points(channel, seq).sum(axis=0)


def repetition_posterior(channel: Channel, seq, prior=None, symbols=None) -> np.ndarray:
    """Posterior of the repeated symbol from the aggregated point.

    ``symbols`` overrides the symbol embeddings (rows); it exists so tests can
    show the identity breaks once the simplex loses its equal norms.
    """
    point = aggregate_repetition(channel, seq, prior)
    if symbols is None:
        symbols = symbol_matrix(channel.n)
    return posterior_from_point(point, symbols)
