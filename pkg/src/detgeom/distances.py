"""Expected squared embedding distances between symbols and codewords.

``d_s(i, j) = E[ ||M_R(Y) - x_j||^2 | X = x_i ]`` measures how far, on
average, an observation caused by symbol i lands from the embedding of symbol
j.  For a codeword pair the stacked version ``d_v(c1, c2)`` is the sum of the
per-position ``d_s`` terms, which is what makes it cheap to tabulate.

Three estimators are provided: an exact finite sum for discrete channels,
composite Gauss-Legendre quadrature for the additive channels and seeded
Monte Carlo for any channel.  The expectation is always taken under the
channel law; the prior only enters through the embedding.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._mathutil import fmt
from .channels import AwgnChannel, Channel, DiscreteChannel, LaplaceChannel, as_prior, stream
from .errors import EstimatorError
from .geometry import embed_log_posterior, squared_distances, symbol_matrix
from .sequence import _check_codeword
from .tolerances import TRUNCATION_MASS_TOL

DEFAULT_SAMPLES = 100_000
DEFAULT_POINTS = 512
_MC_BLOCK = 65_536
_GL_ORDER = 16


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float


def _log_prior(channel, prior):
    return np.log(as_prior(prior, channel.n))


def _points_for_codes(channel, codes, log_prior):
    return embed_log_posterior(channel.loglik_codes(codes) + log_prior)


# --------------------------------------------------------------------------
# exact


def symbol_distance_matrix_exact(channel: DiscreteChannel, prior=None) -> np.ndarray:
    """All N x N values of d_s for a discrete channel, by finite summation."""
    if not isinstance(channel, DiscreteChannel):
        raise EstimatorError("exact symbol distances need a discrete channel")
    k = len(channel.observations)
    pts = _points_for_codes(channel, np.arange(k), _log_prior(channel, prior))
    sq = squared_distances(pts, symbol_matrix(channel.n))  # (K, N)
    return channel.transition @ sq


def symbol_distance_exact(channel: DiscreteChannel, i: int, j: int, prior=None) -> float:
    return float(symbol_distance_matrix_exact(channel, prior)[i, j])


# --------------------------------------------------------------------------
# Monte Carlo


def _mc_row(channel, i, samples, seed, log_prior):
    """d_s(i, .) for every j from one seeded batch of draws given x_i.

    Blocks are combined in a fixed order with Chan's pairwise update, so the
    estimate is bit-stable for a given seed.
    """
    if samples < 1000:
        raise EstimatorError("Monte Carlo estimates need at least 1000 samples")
    symbols = symbol_matrix(channel.n)
    count, mean, m2, rejected = 0, np.zeros(channel.n), np.zeros(channel.n), 0
    for b, start in enumerate(range(0, samples, _MC_BLOCK)):
        size = min(_MC_BLOCK, samples - start)
        codes = channel.draw(i, stream(seed, b), size=size)
        ll = channel.loglik_codes(codes) + log_prior
        keep = ~np.any(np.isneginf(ll), axis=1)
        rejected += int(size - keep.sum())
        sq = squared_distances(embed_log_posterior(ll[keep]), symbols)
        nb = sq.shape[0]
        if nb == 0:
            continue
        mb = sq.mean(axis=0)
        m2b = ((sq - mb) ** 2).sum(axis=0)
        delta = mb - mean
        tot = count + nb
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + delta**2 * count * nb / tot
        count = tot
    if rejected:
        warnings.warn(f"{rejected} erasure draws rejected from the Monte Carlo sample")
    if count < 2:
        raise EstimatorError("no usable Monte Carlo draws")
    stderr = np.sqrt(m2 / (count - 1) / count)
    return mean, stderr


def symbol_distance_mc(
    channel: Channel, i: int, j: int, samples: int = DEFAULT_SAMPLES, seed: int = 0, prior=None
) -> Estimate:
    mean, se = _mc_row(channel, i, samples, seed, _log_prior(channel, prior))
    return Estimate(float(mean[j]), float(se[j]))


# --------------------------------------------------------------------------
# quadrature


def _half_width(channel, width):
    if isinstance(channel, AwgnChannel):
        sigma = math.sqrt(channel.noise_variance)
        width = 8.0 if width is None else width
        mass = math.erfc(width / math.sqrt(2.0))
        return width * sigma, mass
    if isinstance(channel, LaplaceChannel):
        width = 25.0 if width is None else width
        return width * channel.scale, math.exp(-width)
    raise EstimatorError("quadrature needs an AWGN or Laplace channel")


def _gauss_legendre(edges, points):
    """Composite Gauss-Legendre nodes/weights over consecutive ``edges``.

    Panels are shared out in proportion to subinterval length, at least one
    per subinterval, so no panel straddles a breakpoint.
    """
    lengths = np.diff(edges)
    n_sub = lengths.size
    panels_total = max(n_sub, points // _GL_ORDER)
    share = lengths / lengths.sum() * (panels_total - n_sub)
    panels = 1 + np.floor(share).astype(int)
    leftover = panels_total - panels.sum()
    for k in np.argsort(-(share - np.floor(share)), kind="stable")[:leftover]:
        panels[k] += 1
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    nodes, weights = [], []
    for a, b, p in zip(edges[:-1], edges[1:], panels):
        cuts = np.linspace(a, b, p + 1)
        half = np.diff(cuts) / 2
        mid = (cuts[:-1] + cuts[1:]) / 2
        nodes.append((mid[:, None] + half[:, None] * x).ravel())
        weights.append((half[:, None] * w).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _quadrature_row(channel, i, points, log_prior, width=None):
    half, mass = _half_width(channel, width)
    if mass > TRUNCATION_MASS_TOL:
        raise EstimatorError(
            f"truncated domain leaves {mass:.3g} of the conditional mass uncovered"
        )
    centre = channel.alphabet.values[i]
    lo, hi = centre - half, centre + half
    inner = sorted(v for v in channel.alphabet.values if lo < v < hi)
    edges = np.array([lo, *inner, hi])
    y, w = _gauss_legendre(edges, points)
    ll = channel.loglik_codes(y)
    density = np.exp(ll[:, i])
    sq = squared_distances(embed_log_posterior(ll + log_prior), symbol_matrix(channel.n))
    return (w * density) @ sq


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    error: float
    points: int


def symbol_distance_quadrature(
    channel: Channel, i: int, j: int, points: int = DEFAULT_POINTS, prior=None, width=None
) -> QuadratureEstimate:
    """d_s by composite Gauss-Legendre over a truncated domain.

    The domain is +-8 sigma (Gaussian) or +-25 lambda (Laplace) around x_i and
    is split at every symbol value, where the Laplace integrand has kinks.
    ``error`` is the change when the number of points is doubled.
    """
    if points < 64:
        raise EstimatorError("quadrature needs at least 64 points")
    lp = _log_prior(channel, prior)
    value = _quadrature_row(channel, i, points, lp, width)[j]
    finer = _quadrature_row(channel, i, 2 * points, lp, width)[j]
    return QuadratureEstimate(float(value), float(abs(finer - value)), points)


# --------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class SymbolDistanceTable:
    values: np.ndarray
    method: str
    stderr: np.ndarray | None = None
    samples_or_points: int | None = None
    seed: int | None = None

    def self_distance_violations(self) -> list[tuple[int, int]]:
        """Pairs (i, j) where d_s(i, i) exceeds d_s(i, j).

        Not proven to be impossible in general, so it is reported rather than
        enforced.
        """
        v = self.values
        return [
            (i, j)
            for i in range(v.shape[0])
            for j in range(v.shape[1])
            if i != j and v[i, i] > v[i, j]
        ]

    def csv_rows(self):
        n = self.values.shape[0]
        for i in range(n):
            for j in range(n):
                se = "" if self.stderr is None else fmt(self.stderr[i, j])
                yield (
                    i + 1,
                    j + 1,
                    fmt(self.values[i, j]),
                    self.method,
                    "" if self.samples_or_points is None else self.samples_or_points,
                    "" if self.seed is None else self.seed,
                    se,
                )


def default_method(channel: Channel) -> str:
    return "exact" if isinstance(channel, DiscreteChannel) else "quadrature"


def symbol_distance_table(
    channel: Channel,
    prior=None,
    method: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
) -> SymbolDistanceTable:
    if method == "auto":
        method = default_method(channel)
    lp = _log_prior(channel, prior)
    if method == "exact":
        return SymbolDistanceTable(symbol_distance_matrix_exact(channel, prior), "exact")
    if method == "quadrature":
        rows = [_quadrature_row(channel, i, points, lp) for i in range(channel.n)]
        return SymbolDistanceTable(np.vstack(rows), "quadrature", samples_or_points=points)
    if method == "mc":
        rows = [_mc_row(channel, i, samples, seed, lp) for i in range(channel.n)]
        return SymbolDistanceTable(
            np.vstack([r[0] for r in rows]),
            "mc",
            stderr=np.vstack([r[1] for r in rows]),
            samples_or_points=samples,
            seed=seed,
        )
    raise ValueError(f"unknown estimator {method!r}")


def write_symbol_table_csv(tables: Sequence[SymbolDistanceTable], header=None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    buf.write("i,j,value,method,samples_or_points,seed,stderr\n")
    for table in tables:
        for row in table.csv_rows():
            buf.write(",".join(str(c) for c in row) + "\n")
    return buf.getvalue()


# --------------------------------------------------------------------------
# codewords


@dataclass(frozen=True)
class CodewordDistance:
    value: float
    c1: tuple[int, ...]
    c2: tuple[int, ...]
    terms: tuple[float, ...]
    method: str
    stderr: float | None = None


def _position_seed(seed: int, position: int) -> int:
    return (int(seed) ^ (int(position) << 32)) & 0xFFFFFFFFFFFFFFFF


class _TermSource:
    """Caches per-symbol rows of d_s so codebooks do not recompute them.

    Monte Carlo rows are drawn per codeword position from
    ``seed XOR (position << 32)``, giving independent terms across positions.
    """

    def __init__(self, channel, prior, method, samples, points, seed):
        if method == "auto":
            method = default_method(channel)
        if method not in ("exact", "quadrature", "mc"):
            raise ValueError(f"unknown estimator {method!r}")
        self.channel, self.method = channel, method
        self.samples, self.points, self.seed = samples, points, seed
        self.lp = _log_prior(channel, prior)
        self.prior = prior
        self._rows: dict = {}
        self._exact = None

    def row(self, position, i):
        if self.method == "exact":
            if self._exact is None:
                self._exact = symbol_distance_matrix_exact(self.channel, self.prior)
            return self._exact[i], None
        key = (position, i) if self.method == "mc" else i
        if key not in self._rows:
            try:
                if self.method == "quadrature":
                    self._rows[key] = (_quadrature_row(self.channel, i, self.points, self.lp), None)
                else:
                    self._rows[key] = _mc_row(
                        self.channel, i, self.samples, _position_seed(self.seed, position), self.lp
                    )
            except EstimatorError as exc:
                raise EstimatorError(f"{exc} (at codeword position {position})") from None
        return self._rows[key]

    def distance(self, c1, c2) -> CodewordDistance:
        terms, var = [], 0.0
        for pos, (a, b) in enumerate(zip(c1, c2)):
            vals, se = self.row(pos, a)
            terms.append(float(vals[b]))
            if se is not None:
                var += float(se[b]) ** 2
        stderr = math.sqrt(var) if self.method == "mc" else None
        return CodewordDistance(math.fsum(terms), c1, c2, tuple(terms), self.method, stderr)


def codeword_distance(
    channel: Channel,
    c1: Sequence[int],
    c2: Sequence[int],
    prior=None,
    method: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
) -> CodewordDistance:
    """d_v(c1, c2) as the sum of per-position d_s terms."""
    c1 = _check_codeword(channel.n, c1)
    c2 = _check_codeword(channel.n, c2)
    if len(c1) != len(c2):
        raise ValueError("codewords must have equal length")
    return _TermSource(channel, prior, method, samples, points, seed).distance(c1, c2)


def codeword_distance_joint_mc(
    channel: Channel,
    c1: Sequence[int],
    c2: Sequence[int],
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    prior=None,
) -> Estimate:
    """Direct Monte Carlo of E[||stacked M_R(Y) - stacked x(c2)||^2 | X = c1].

    Does not use the per-position decomposition, so it can be used to check it.
    """
    c1 = _check_codeword(channel.n, c1)
    c2 = _check_codeword(channel.n, c2)
    if len(c1) != len(c2):
        raise ValueError("codewords must have equal length")
    lp = _log_prior(channel, prior)
    target = symbol_matrix(channel.n)[list(c2)]  # (M, N)
    chunks = []
    for b, start in enumerate(range(0, samples, _MC_BLOCK)):
        size = min(_MC_BLOCK, samples - start)
        rng = stream(seed, b)
        codes = np.stack([channel.draw(a, rng, size=size) for a in c1], axis=1)
        ll = channel.loglik_codes(codes.ravel()).reshape(size, len(c1), channel.n) + lp
        diff = embed_log_posterior(ll) - target
        chunks.append(np.einsum("smn,smn->s", diff, diff))
    vals = np.concatenate(chunks)
    return Estimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size)))


@dataclass(frozen=True)
class CodebookTable:
    codebook: tuple[tuple[int, ...], ...]
    values: np.ndarray
    stderr: np.ndarray | None
    min_pair: tuple[int, int]
    method: str
    samples_or_points: int | None = None
    seed: int | None = None

    def to_csv(self, header=None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        buf.write("a,b,codeword_a,codeword_b,value,method,samples_or_points,seed,stderr,min_pair\n")
        word = lambda c: " ".join(str(s + 1) for s in c)  # noqa: E731
        k = len(self.codebook)
        for a in range(k):
            for b in range(k):
                se = "" if self.stderr is None else fmt(self.stderr[a, b])
                flag = int((a, b) == self.min_pair)
                buf.write(
                    f"{a + 1},{b + 1},{word(self.codebook[a])},{word(self.codebook[b])},"
                    f"{fmt(self.values[a, b])},{self.method},"
                    f"{'' if self.samples_or_points is None else self.samples_or_points},"
                    f"{'' if self.seed is None else self.seed},{se},{flag}\n"
                )
        return buf.getvalue()


def codebook_table(
    channel: Channel,
    codebook: Sequence[Sequence[int]],
    prior=None,
    method: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    points: int = DEFAULT_POINTS,
    seed: int = 0,
) -> CodebookTable:
    """Pairwise d_v over a codebook plus the closest ordered off-diagonal pair."""
    words = tuple(_check_codeword(channel.n, c) for c in codebook)
    if len(words) < 2:
        raise ValueError("a codebook table needs at least two codewords")
    if len({len(c) for c in words}) != 1:
        raise ValueError("all codewords must have the same length")
    src = _TermSource(channel, prior, method, samples, points, seed)
    k = len(words)
    values = np.zeros((k, k))
    stderr = np.zeros((k, k)) if src.method == "mc" else None
    for a in range(k):
        for b in range(k):
            d = src.distance(words[a], words[b])
            values[a, b] = d.value
            if stderr is not None:
                stderr[a, b] = d.stderr
    off = values + np.diag(np.full(k, np.inf))
    a, b = np.unravel_index(int(np.argmin(off)), off.shape)
    return CodebookTable(
        words,
        values,
        stderr,
        (int(a), int(b)),
        src.method,
        samples if src.method == "mc" else points if src.method == "quadrature" else None,
        seed if src.method == "mc" else None,
    )
