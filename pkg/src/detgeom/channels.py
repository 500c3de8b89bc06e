"""Alphabets, priors and the three memoryless channel families.

Every channel exposes the same small surface:

* ``loglik(obs)`` -- log Pr{Y=obs | X=x_i} for all i (log-densities for the
  additive channels; a common additive constant is irrelevant downstream),
* ``loglik_codes(codes)`` -- the vectorised form over an array of encoded
  observations (label indices for discrete channels, reals otherwise),
* ``draw(i, rng, size)`` -- seeded sampling of encoded observations,
* ``validate()`` -- a list of invariant violations (empty when healthy).

Symbol indices are 0-based throughout the library.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._mathutil import log_softmax
from .errors import DegeneratePosteriorError, SpecError, UnknownObservationError
from .tolerances import PRIOR_SUM_TOL, ROW_SUM_TOL


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of input symbols; ``len(alphabet)`` is the dimension N."""

    labels: tuple[str, ...]
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise ValueError("an alphabet needs at least two symbols")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate symbol labels in {labels}")
        if self.values is not None:
            values = tuple(float(v) for v in self.values)
            if len(values) != len(labels):
                raise ValueError("one numeric value per symbol is required")
            if len(set(values)) != len(values):
                raise ValueError("numeric symbol values must be distinct")
            object.__setattr__(self, "values", values)

    @classmethod
    def numeric(cls, values: Sequence[float]) -> "Alphabet":
        values = [float(v) for v in values]
        return cls(tuple(f"{v:g}" for v in values), tuple(values))

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(str(label))


def uniform_prior(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def as_prior(prior, n: int) -> np.ndarray:
    """Validate a prior vector, returning the uniform prior for ``None``."""
    if prior is None:
        return uniform_prior(n)
    p = np.asarray(prior, dtype=float)
    if p.shape != (n,):
        raise ValueError(f"prior must have length {n}, got shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise ValueError("prior components must be strictly positive")
    if abs(p.sum() - 1.0) > PRIOR_SUM_TOL:
        raise ValueError(f"prior sums to {p.sum()!r}, not 1")
    return p


def is_uniform(prior, n: int) -> bool:
    if prior is None:
        return True
    p = np.asarray(prior, dtype=float)
    return bool(np.all(np.abs(p - 1.0 / n) <= PRIOR_SUM_TOL))


class Channel:
    """Common behaviour of the memoryless channel families."""

    kind = "abstract"
    alphabet: Alphabet

    @property
    def n(self) -> int:
        return len(self.alphabet)

    @property
    def parameter(self) -> float | None:
        """Noise parameter reported in tables (sigma^2, lambda, or None)."""
        return None

    def encode(self, obs):
        return float(obs)

    def decode(self, code):
        return float(code)

    def loglik(self, obs) -> np.ndarray:
        return self.loglik_codes(np.asarray([self.encode(obs)]))[0]

    def loglik_codes(self, codes) -> np.ndarray:
        raise NotImplementedError

    def draw(self, i: int, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def validate(self) -> list[str]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class DiscreteChannel(Channel):
    """Finite-output channel given by its N x K forward transition matrix."""

    alphabet: Alphabet
    observations: tuple[str, ...]
    transition: np.ndarray = field(repr=False)

    kind = "discrete"

    def __post_init__(self):
        obs = tuple(str(o) for o in self.observations)
        if len(set(obs)) != len(obs):
            raise ValueError("duplicate observation labels")
        t = np.array(self.transition, dtype=float)
        if t.shape != (len(self.alphabet), len(obs)):
            raise ValueError(
                f"transition matrix must be {len(self.alphabet)}x{len(obs)}, got {t.shape}"
            )
        t.setflags(write=False)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "transition", t)

    @classmethod
    def from_posterior_table(cls, alphabet, observations, table) -> "DiscreteChannel":
        """Build the forward channel from a table of Pr{X=x_i | Y=y_k}.

        The observation marginal is taken to be uniform, so the implied input
        prior is the row sum divided by K and
        ``Pr{Y=y_k | X=x_i} = table[i, k] / (K * prior_i)``.
        """
        if not isinstance(alphabet, Alphabet):
            alphabet = Alphabet(tuple(alphabet))
        table = np.asarray(table, dtype=float)
        k = table.shape[1]
        implied_prior = table.sum(axis=1) / k
        forward = table / (k * implied_prior[:, None])
        return cls(alphabet, tuple(observations), forward)

    def observation_index(self, obs) -> int:
        try:
            return self.observations.index(str(obs))
        except ValueError:
            raise UnknownObservationError(
                f"observation {obs!r} is not one of {list(self.observations)}"
            ) from None

    def encode(self, obs):
        return self.observation_index(obs)

    def decode(self, code):
        return self.observations[int(code)]

    def loglik_codes(self, codes) -> np.ndarray:
        codes = np.asarray(codes, dtype=int)
        with np.errstate(divide="ignore"):
            return np.log(self.transition[:, codes]).T

    def draw(self, i, rng, size=None):
        return rng.choice(len(self.observations), size=size, p=self.transition[i])

    def validate(self):
        problems = []
        t = self.transition
        if not np.all(np.isfinite(t)):
            problems.append("transition matrix has non-finite entries")
        for i, s in enumerate(t.sum(axis=1)):
            if abs(s - 1.0) > ROW_SUM_TOL:
                problems.append(f"row {i} sums to {s!r}, not 1")
        for i, k in zip(*np.nonzero(t < 0.0)):
            problems.append(f"negative entry at ({i},{k})")
        for i, k in zip(*np.nonzero(t == 0.0)):
            problems.append(
                f"erasure-like entry at ({i},{k}): an observation that rules out an "
                "input symbol has no embedding"
            )
        return problems

    def to_dict(self):
        return {
            "type": "discrete",
            "symbols": list(self.alphabet.labels),
            "observations": list(self.observations),
            "transition": self.transition.tolist(),
        }


def _numeric_alphabet(alphabet) -> Alphabet:
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet.numeric(alphabet)
    if alphabet.values is None:
        raise ValueError("additive channels need numeric symbol values")
    return alphabet


@dataclass(frozen=True, eq=False)
class AwgnChannel(Channel):
    """Y = X + Z with Z ~ Normal(0, noise_variance)."""

    alphabet: Alphabet
    noise_variance: float

    kind = "awgn"

    def __post_init__(self):
        object.__setattr__(self, "alphabet", _numeric_alphabet(self.alphabet))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))

    @property
    def parameter(self):
        return self.noise_variance

    @property
    def symbol_values(self) -> np.ndarray:
        return np.asarray(self.alphabet.values)

    def loglik_codes(self, codes):
        y = np.asarray(codes, dtype=float)[:, None]
        s2 = self.noise_variance
        return -((y - self.symbol_values) ** 2) / (2.0 * s2) - 0.5 * math.log(2.0 * math.pi * s2)

    def draw(self, i, rng, size=None):
        return self.alphabet.values[i] + math.sqrt(self.noise_variance) * rng.standard_normal(size)

    def validate(self):
        s2 = self.noise_variance
        if not (math.isfinite(s2) and s2 > 0.0):
            return [f"noise variance must be positive and finite, got {s2!r}"]
        return []

    def to_dict(self):
        return {"type": "awgn", "symbols": list(self.alphabet.values), "sigma2": self.noise_variance}


@dataclass(frozen=True, eq=False)
class LaplaceChannel(Channel):
    """Y = X + Z with Z Laplacian of scale ``scale`` (density exp(-|z|/scale) / 2scale)."""

    alphabet: Alphabet
    scale: float

    kind = "laplace"

    def __post_init__(self):
        object.__setattr__(self, "alphabet", _numeric_alphabet(self.alphabet))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def parameter(self):
        return self.scale

    @property
    def symbol_values(self) -> np.ndarray:
        return np.asarray(self.alphabet.values)

    def loglik_codes(self, codes):
        y = np.asarray(codes, dtype=float)[:, None]
        lam = self.scale
        return -np.abs(y - self.symbol_values) / lam - math.log(2.0 * lam)

    def draw(self, i, rng, size=None):
        return self.alphabet.values[i] + rng.laplace(0.0, self.scale, size)

    def validate(self):
        lam = self.scale
        if not (math.isfinite(lam) and lam > 0.0):
            return [f"Laplace scale must be positive and finite, got {lam!r}"]
        return []

    def to_dict(self):
        return {"type": "laplace", "symbols": list(self.alphabet.values), "lambda": self.scale}


# Posterior table of the three-symbol, six-observation example channel.
EXAMPLE_OBSERVATIONS = ("a", "b", "c", "d", "e", "f")
EXAMPLE_POSTERIOR_TABLE = np.array(
    [
        [0.34, 0.33, 0.33, 0.335, 0.335, 0.33],
        [0.33, 0.34, 0.33, 0.335, 0.33, 0.335],
        [0.33, 0.33, 0.34, 0.33, 0.335, 0.335],
    ]
)


def example_discrete_channel() -> DiscreteChannel:
    """The 3-input, 6-output example channel, reconstructed with a uniform
    observation marginal (the implied input prior is uniform)."""
    return DiscreteChannel.from_posterior_table(
        Alphabet(("x1", "x2", "x3")), EXAMPLE_OBSERVATIONS, EXAMPLE_POSTERIOR_TABLE
    )


def log_likelihoods(channel: Channel, observation) -> np.ndarray:
    return channel.loglik(observation)


def log_posterior(channel: Channel, observation, prior=None) -> np.ndarray:
    """Log of the Bayes posterior over the alphabet, without underflow."""
    p = as_prior(prior, channel.n)
    return log_softmax(channel.loglik(observation) + np.log(p))


def posterior(channel: Channel, observation, prior=None) -> np.ndarray:
    """Bayes posterior Pr{X=x_i | Y=observation}.

    Raises:
        DegeneratePosteriorError: some component is exactly zero, either
            because the channel rules the symbol out or through underflow.
    """
    post = np.exp(log_posterior(channel, observation, prior))
    if np.any(post == 0.0):
        raise DegeneratePosteriorError(
            f"posterior for observation {observation!r} has a zero component: {post}"
        )
    return post


def sample(channel: Channel, symbol_index: int, rng: np.random.Generator, size=None):
    """Draw observation(s) given X = x_{symbol_index}.

    A scalar draw returns the observation in its public form (a label for
    discrete channels); ``size`` returns an array of encoded observations.
    """
    if not 0 <= symbol_index < channel.n:
        raise IndexError(f"symbol index {symbol_index} outside 0..{channel.n - 1}")
    if size is None:
        return channel.decode(channel.draw(symbol_index, rng))
    return channel.draw(symbol_index, rng, size)


def validate(channel: Channel) -> list[str]:
    return channel.validate()


def stream(root_seed: int, k: int = 0) -> np.random.Generator:
    """Random stream number ``k`` derived from a 64-bit root seed (seed XOR k)."""
    seed = (int(root_seed) ^ int(k)) & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng(seed)


# --------------------------------------------------------------------------
# JSON channel specification files


@dataclass(frozen=True)
class ChannelSpec:
    channel: Channel
    prior: np.ndarray | None
    digest: str


def channel_from_dict(doc: dict) -> tuple[Channel, np.ndarray | None]:
    """Build ``(channel, prior)`` from a parsed spec document.

    Structural problems raise SpecError; invariant violations (row sums,
    zero entries, nonpositive noise) are left to ``validate``.
    """
    if not isinstance(doc, dict):
        raise SpecError("channel spec must be a JSON object")
    kind = doc.get("type")
    symbols = doc.get("symbols")
    if not isinstance(symbols, list):
        raise SpecError("'symbols' must be a list")
    try:
        if kind == "discrete":
            for key in ("observations", "transition"):
                if key not in doc:
                    raise SpecError(f"discrete spec needs '{key}'")
            channel = DiscreteChannel(
                Alphabet(tuple(symbols)), tuple(doc["observations"]), doc["transition"]
            )
        elif kind == "awgn":
            if "sigma2" not in doc:
                raise SpecError("awgn spec needs 'sigma2'")
            channel = AwgnChannel(Alphabet.numeric(symbols), doc["sigma2"])
        elif kind == "laplace":
            if "lambda" not in doc:
                raise SpecError("laplace spec needs 'lambda'")
            channel = LaplaceChannel(Alphabet.numeric(symbols), doc["lambda"])
        else:
            raise SpecError(f"unknown channel type {kind!r}")
        prior = doc.get("prior")
        if prior is not None:
            prior = as_prior(prior, channel.n)
    except SpecError:
        raise
    except (TypeError, ValueError) as exc:
        raise SpecError(str(exc)) from exc
    return channel, prior


def load_channel_spec(path) -> ChannelSpec:
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SpecError(f"{path}: {exc}") from exc
    channel, prior = channel_from_dict(doc)
    return ChannelSpec(channel, prior, hashlib.sha256(raw).hexdigest())
