"""MAP detection as nearest-neighbour search among the symbol embeddings."""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._mathutil import fmt
from .channels import Channel, DiscreteChannel, as_prior, is_uniform, stream
from .errors import NonUniformPriorError
from .geometry import embed_log_posterior, posterior_from_point, squared_distances, symbol_matrix
from .sequence import (
    _check_cap,
    aggregate_repetition,
    codebook_squared_distances,
    observation_points,
)
from .tolerances import ENUMERATION_CAP, TIE_TOL


@dataclass(frozen=True)
class Decision:
    """Outcome of a MAP decision.

    ``margin`` is the gap between the second-smallest and the smallest
    distance to a symbol embedding; it is 0 exactly when ``tie`` is set.
    ``tied`` lists every index attaining the minimum (just the winner when
    there is no tie).
    """

    chosen_index: int
    posterior: np.ndarray
    margin: float
    tie: bool
    tied: tuple[int, ...]
    distances: np.ndarray


def nearest_symbols(points, symbols):
    """Vectorised nearest-symbol search with lowest-index tie breaking.

    Returns ``(chosen, near_mask, margin)`` for a (..., N) batch of points.
    Candidates whose squared distance is within ``TIE_TOL`` of the minimum
    are tied; for the symbol simplex that gap equals the log-posterior ratio.
    """
    sq = squared_distances(points, symbols)
    near = sq - sq.min(axis=-1, keepdims=True) <= TIE_TOL
    chosen = np.argmax(near, axis=-1)
    d = np.sort(np.sqrt(sq), axis=-1)
    margin = np.where(near.sum(axis=-1) > 1, 0.0, d[..., 1] - d[..., 0])
    return chosen, near, margin


def decision_from_point(point, symbols=None) -> Decision:
    point = np.asarray(point, dtype=float)
    if symbols is None:
        symbols = symbol_matrix(point.shape[-1])
    chosen, near, margin = nearest_symbols(point, symbols)
    tied = tuple(int(i) for i in np.flatnonzero(near))
    return Decision(
        chosen_index=int(chosen),
        posterior=posterior_from_point(point, symbols),
        margin=float(margin),
        tie=len(tied) > 1,
        tied=tied,
        distances=np.sqrt(squared_distances(point, symbols)),
    )


def decide(channel: Channel, observation, prior=None) -> Decision:
    p = as_prior(prior, channel.n)
    point = embed_log_posterior(channel.loglik(observation) + np.log(p))
    return decision_from_point(point)


def decide_sequence(channel: Channel, seq, prior=None, cap=ENUMERATION_CAP) -> tuple[int, ...]:
    """Codeword whose stacked embedding is nearest to the stacked observations."""
    _check_cap(channel.n, len(seq), cap)
    pts = observation_points(channel, seq, prior)
    total = codebook_squared_distances(squared_distances(pts, symbol_matrix(channel.n)))
    flat = total.ravel()
    best = int(np.argmax(flat - flat.min() <= TIE_TOL))
    return tuple(int(i) for i in np.unravel_index(best, total.shape))


def decide_repetition(channel: Channel, seq, prior=None) -> Decision:
    return decision_from_point(aggregate_repetition(channel, seq, prior))


def decision_regions(channel: DiscreteChannel, prior=None) -> dict[str, Decision]:
    """MAP decision for every observation label of a discrete channel."""
    return {label: decide(channel, label, prior) for label in channel.observations}


# --------------------------------------------------------------------------
# Monte Carlo error-rate simulation

_BLOCK = 8192


@dataclass(frozen=True)
class SimulationResult:
    channel: str
    parameter: float | None
    repetitions: int
    trials: int
    seed: int
    sent: np.ndarray
    errors: np.ndarray
    erasures: np.ndarray
    agreement: np.ndarray

    @property
    def decoded(self) -> int:
        return int(self.trials - self.erasures.sum())

    @property
    def agreements(self) -> int:
        return int(self.agreement.sum())

    @property
    def all_agree(self) -> bool:
        return self.agreements == self.decoded

    @property
    def symbol_error_rates(self) -> np.ndarray:
        decoded = self.sent - self.erasures
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(decoded > 0, self.errors / np.maximum(decoded, 1), np.nan)

    @property
    def error_rate(self) -> float:
        return float(self.errors.sum() / max(self.decoded, 1))

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        buf.write("channel,sigma2_or_lambda,M,trials,symbol_index,errors,erasures,agreement\n")
        param = "" if self.parameter is None else fmt(self.parameter)
        rows = [
            (str(i + 1), self.sent[i], self.errors[i], self.erasures[i], self.agreement[i])
            for i in range(len(self.sent))
        ]
        rows.append(
            ("all", self.trials, self.errors.sum(), self.erasures.sum(), self.agreement.sum())
        )
        for idx, sent, err, era, agr in rows:
            buf.write(
                f"{self.channel},{param},{self.repetitions},{int(sent)},{idx},"
                f"{int(err)},{int(era)},{int(agr)}\n"
            )
        return buf.getvalue()


def _draw_observations(channel, symbols, m, rng):
    codes = np.empty((symbols.size, m), dtype=int if channel.kind == "discrete" else float)
    for i in range(channel.n):
        rows = np.flatnonzero(symbols == i)
        if rows.size:
            codes[rows] = channel.draw(i, rng, size=(rows.size, m))
    return codes


def _simulate_block(channel, log_prior, m, size, rng):
    n = channel.n
    sent = rng.choice(n, size=size, p=np.exp(log_prior))
    codes = _draw_observations(channel, sent, m, rng)
    ll = channel.loglik_codes(codes.ravel()).reshape(size, m, n)
    erased = np.any(np.isneginf(ll), axis=(1, 2))
    ok = ~erased
    ll, truth = ll[ok], sent[ok]

    # geometric path: per-use embeddings, summed, nearest symbol
    lp = ll + log_prior if m == 1 else ll
    points = embed_log_posterior(lp).sum(axis=1)
    geo, _, _ = nearest_symbols(points, symbol_matrix(n))

    # probabilistic path: product of likelihoods times the prior
    score = ll.sum(axis=1) + log_prior
    bayes = np.argmax(score >= score.max(axis=1, keepdims=True) - TIE_TOL, axis=1)

    counts = lambda mask: np.bincount(truth[mask], minlength=n)  # noqa: E731
    return (
        np.bincount(sent, minlength=n),
        counts(geo != truth),
        np.bincount(sent[erased], minlength=n),
        counts(geo == bayes),
    )


def simulate_error_rate(
    channel: Channel,
    repetitions: int,
    trials: int,
    seed: int,
    prior=None,
    workers: int = 1,
) -> SimulationResult:
    """Symbol error rates of repetition MAP decoding, decoded two ways.

    Each trial draws a symbol from the prior, passes it ``repetitions`` times
    through the channel and decodes with both the aggregated-embedding
    nearest neighbour and the direct Bayes product.  Trials are processed in
    fixed-size blocks, block ``b`` drawing from ``stream(seed, b)``, so the
    counts do not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    if repetitions > 1 and not is_uniform(prior, channel.n):
        raise NonUniformPriorError("repetition decoding assumes equally likely symbols")
    log_prior = np.log(as_prior(prior, channel.n))
    sizes = [min(_BLOCK, trials - start) for start in range(0, trials, _BLOCK)]

    def run(b):
        return _simulate_block(channel, log_prior, repetitions, sizes[b], stream(seed, b))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(b) for b in range(len(sizes))]
    sent, errors, erasures, agreement = (sum(p[k] for p in parts) for k in range(4))
    return SimulationResult(
        channel=channel.kind,
        parameter=channel.parameter,
        repetitions=repetitions,
        trials=trials,
        seed=seed,
        sent=sent,
        errors=errors,
        erasures=erasures,
        agreement=agreement,
    )
