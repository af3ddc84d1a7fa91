"""Inter-renewal-time distributions: exact moments, densities, and sampling.

Each distribution is an immutable value object with closed-form first and
second moments.  A divergent moment is represented as ``math.inf`` rather than
an error: the simulator can still drive a renewal process with infinite
variance, while the analytic engine refuses such inputs.

Sampling is batch-first.  Families with a closed-form quantile (exponential,
uniform, rayleigh, pareto1, deterministic) use the inverse transform, so each
draw consumes exactly one uniform and is a deterministic function of the
stream state.  Chi-square draws sum k squared standard normals obtained by the
Box-Muller transform (a fixed 2*ceil(k/2) uniforms per draw).  Beta draws use
Cheng's rejection when both shapes exceed 1 and Johnk's rejection otherwise;
their uniform consumption varies per draw, which is safe because every renewal
stream owns its own generator.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import InvalidParameter
from .rng import RngStream

__all__ = [
    "Moments",
    "Distribution",
    "Exponential",
    "Uniform",
    "Rayleigh",
    "ChiSquare",
    "Beta",
    "ParetoI",
    "Deterministic",
    "from_literal",
    "LITERAL_TYPES",
]

_LN4 = math.log(4.0)
_CHENG_C = 1.0 + math.log(5.0)


@dataclass(frozen=True)
class Moments:
    """Exact mean and second moment; either may be ``math.inf``."""

    mean: float
    second_moment: float

    @property
    def variance(self) -> float:
        if math.isinf(self.second_moment):
            return math.inf
        return self.second_moment - self.mean * self.mean

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.mean) and math.isfinite(self.second_moment)


class Distribution(ABC):
    """A nonnegative inter-renewal-time distribution."""

    #: literal tag used in config files
    type_name: str = ""
    #: True when the support lies on a lattice {0, d, 2d, ...}
    arithmetic: bool = False

    @abstractmethod
    def moments(self) -> Moments:
        """Exact analytic moments, never an approximation."""

    @abstractmethod
    def cdf(self, x: float) -> float:
        """P(Y <= x)."""

    @abstractmethod
    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        """n i.i.d. draws consumed from ``rng`` in a deterministic pattern."""

    def pdf(self, x: float) -> float:
        """Density at x; point masses have none."""
        raise InvalidParameter(f"{self.type_name} has no density")

    def sample(self, rng: RngStream) -> float:
        """One draw from the distribution."""
        return float(self.sample_batch(rng, 1)[0])

    def to_literal(self) -> dict:
        """Config-file literal: a ``type`` tag plus named parameters."""
        params = {k: v for k, v in self.__dict__.items()}
        return {"type": self.type_name, **params}

    def __str__(self) -> str:
        params = ", ".join(f"{k}={v:g}" for k, v in self.__dict__.items())
        return f"{self.type_name}({params})"


def _require_positive(name: str, value: float) -> float:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise InvalidParameter(f"{name} must be a positive finite real, got {value!r}")
    return float(value)


@dataclass(frozen=True, eq=True)
class Exponential(Distribution):
    """Exponential with the given rate (mean 1/rate)."""

    rate: float
    type_name = "exponential"

    def __post_init__(self):
        _require_positive("rate", self.rate)

    def moments(self) -> Moments:
        return Moments(1.0 / self.rate, 2.0 / (self.rate * self.rate))

    def pdf(self, x: float) -> float:
        return self.rate * math.exp(-self.rate * x) if x >= 0 else 0.0

    def cdf(self, x: float) -> float:
        return -math.expm1(-self.rate * x) if x >= 0 else 0.0

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        u = rng.uniforms(n)
        return -np.log1p(-u) / self.rate


@dataclass(frozen=True, eq=True)
class Uniform(Distribution):
    """Uniform on [lo, hi] with 0 <= lo < hi."""

    lo: float
    hi: float
    type_name = "uniform"

    def __post_init__(self):
        if not (isinstance(self.lo, (int, float)) and math.isfinite(self.lo) and self.lo >= 0):
            raise InvalidParameter(f"lo must be a nonnegative finite real, got {self.lo!r}")
        _require_positive("hi", self.hi)
        if not self.hi > self.lo:
            raise InvalidParameter(f"hi must exceed lo, got [{self.lo}, {self.hi}]")

    def moments(self) -> Moments:
        lo, hi = self.lo, self.hi
        return Moments((lo + hi) / 2.0, (lo * lo + lo * hi + hi * hi) / 3.0)

    def pdf(self, x: float) -> float:
        return 1.0 / (self.hi - self.lo) if self.lo <= x <= self.hi else 0.0

    def cdf(self, x: float) -> float:
        if x < self.lo:
            return 0.0
        if x > self.hi:
            return 1.0
        return (x - self.lo) / (self.hi - self.lo)

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.uniforms(n)


@dataclass(frozen=True, eq=True)
class Rayleigh(Distribution):
    """Rayleigh with scale sigma."""

    sigma: float
    type_name = "rayleigh"

    def __post_init__(self):
        _require_positive("sigma", self.sigma)

    def moments(self) -> Moments:
        s = self.sigma
        return Moments(s * math.sqrt(math.pi / 2.0), 2.0 * s * s)

    def pdf(self, x: float) -> float:
        if x < 0:
            return 0.0
        s2 = self.sigma * self.sigma
        return (x / s2) * math.exp(-x * x / (2.0 * s2))

    def cdf(self, x: float) -> float:
        if x < 0:
            return 0.0
        return -math.expm1(-x * x / (2.0 * self.sigma * self.sigma))

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        u = rng.uniforms(n)
        return self.sigma * np.sqrt(-2.0 * np.log1p(-u))


@dataclass(frozen=True, eq=True)
class ChiSquare(Distribution):
    """Chi-square with k degrees of freedom."""

    k: int
    type_name = "chi_square"

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k > 0):
            raise InvalidParameter(f"k must be a positive integer, got {self.k!r}")

    def moments(self) -> Moments:
        return Moments(float(self.k), float(self.k * (self.k + 2)))

    def pdf(self, x: float) -> float:
        if x <= 0:
            return 0.0
        h = self.k / 2.0
        return x ** (h - 1.0) * math.exp(-x / 2.0) / (2.0 ** h * special.gamma(h))

    def cdf(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return float(special.gammainc(self.k / 2.0, x / 2.0))

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        pairs = (self.k + 1) // 2
        u1 = rng.uniforms(n * pairs).reshape(n, pairs)
        u2 = rng.uniforms(n * pairs).reshape(n, pairs)
        r = -2.0 * np.log(u1)
        angle = 2.0 * np.pi * u2
        squares = np.concatenate(
            [r * np.cos(angle) ** 2, r * np.sin(angle) ** 2], axis=1
        )[:, : self.k]
        return squares.sum(axis=1)


@dataclass(frozen=True, eq=True)
class Beta(Distribution):
    """Beta on [0, 1] with shape parameters alpha, beta."""

    alpha: float
    beta: float
    type_name = "beta"

    def __post_init__(self):
        _require_positive("alpha", self.alpha)
        _require_positive("beta", self.beta)

    def moments(self) -> Moments:
        a, b = self.alpha, self.beta
        mean = a / (a + b)
        second = a * (a + 1.0) / ((a + b) * (a + b + 1.0))
        return Moments(mean, second)

    def pdf(self, x: float) -> float:
        if not 0.0 < x < 1.0:
            return 0.0
        a, b = self.alpha, self.beta
        log_density = (
            (a - 1.0) * math.log(x)
            + (b - 1.0) * math.log1p(-x)
            - special.betaln(a, b)
        )
        return math.exp(log_density)

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        return float(special.betainc(self.alpha, self.beta, x))

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        if min(self.alpha, self.beta) > 1.0:
            return self._sample_cheng(rng, n)
        return self._sample_johnk(rng, n)

    def _sample_cheng(self, rng: RngStream, n: int) -> np.ndarray:
        """Cheng's BB rejection; two uniforms per trial, acceptance > 0.5."""
        a, b = self.alpha, self.beta
        p, q = min(a, b), max(a, b)
        s = p + q
        lam = math.sqrt((s - 2.0) / (2.0 * p * q - s))
        grow = p + 1.0 / lam
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = 2 * (n - filled) + 8
            u1 = rng.uniforms(m)
            u2 = rng.uniforms(m)
            v = lam * np.log(u1 / (1.0 - u1))
            w = p * np.exp(v)
            z = u1 * u1 * u2
            r = grow * v - _LN4
            margin = p + r - w
            accept = margin + _CHENG_C >= 5.0 * z
            retry = np.flatnonzero(~accept)
            if retry.size:
                t = np.log(z[retry])
                slow = (margin[retry] >= t) | (
                    r[retry] + s * np.log(s / (q + w[retry])) >= t
                )
                accept[retry[slow]] = True
            w_acc = w[accept]
            x = w_acc / (q + w_acc) if a == p else q / (q + w_acc)
            take = min(n - filled, x.size)
            out[filled : filled + take] = x[:take]
            filled += take
        return out

    def _sample_johnk(self, rng: RngStream, n: int) -> np.ndarray:
        """Johnk's rejection, efficient when a shape parameter is <= 1."""
        inv_a, inv_b = 1.0 / self.alpha, 1.0 / self.beta
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = 4 * (n - filled) + 8
            x = rng.uniforms(m) ** inv_a
            y = rng.uniforms(m) ** inv_b
            total = x + y
            ok = total <= 1.0
            accepted = x[ok] / total[ok]
            take = min(n - filled, accepted.size)
            out[filled : filled + take] = accepted[:take]
            filled += take
        return out


@dataclass(frozen=True, eq=True)
class ParetoI(Distribution):
    """Pareto Type I with tail index ``shape`` and minimum ``scale``.

    The mean diverges for shape <= 1 and the second moment for shape <= 2;
    divergent moments are reported as ``math.inf``.
    """

    shape: float
    scale: float
    type_name = "pareto1"

    def __post_init__(self):
        _require_positive("shape", self.shape)
        _require_positive("scale", self.scale)

    def moments(self) -> Moments:
        a, m = self.shape, self.scale
        mean = a * m / (a - 1.0) if a > 1.0 else math.inf
        second = a * m * m / (a - 2.0) if a > 2.0 else math.inf
        return Moments(mean, second)

    def pdf(self, x: float) -> float:
        if x < self.scale:
            return 0.0
        return self.shape * self.scale ** self.shape / x ** (self.shape + 1.0)

    def cdf(self, x: float) -> float:
        if x < self.scale:
            return 0.0
        return 1.0 - (self.scale / x) ** self.shape

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        u = rng.uniforms(n)
        return self.scale * (1.0 - u) ** (-1.0 / self.shape)


@dataclass(frozen=True, eq=True)
class Deterministic(Distribution):
    """Point mass at c.  Arithmetic: the renewal limit theorems exclude it,
    so analytic results over deterministic links carry a warning."""

    c: float
    type_name = "deterministic"
    arithmetic = True

    def __post_init__(self):
        _require_positive("c", self.c)

    def moments(self) -> Moments:
        return Moments(self.c, self.c * self.c)

    def cdf(self, x: float) -> float:
        return 1.0 if x >= self.c else 0.0

    def sample_batch(self, rng: RngStream, n: int) -> np.ndarray:
        return np.full(n, self.c)


LITERAL_TYPES: dict[str, type] = {
    cls.type_name: cls
    for cls in (Exponential, Uniform, Rayleigh, ChiSquare, Beta, ParetoI, Deterministic)
}

_LITERAL_PARAMS: dict[str, tuple[str, ...]] = {
    "exponential": ("rate",),
    "uniform": ("lo", "hi"),
    "rayleigh": ("sigma",),
    "chi_square": ("k",),
    "beta": ("alpha", "beta"),
    "pareto1": ("shape", "scale"),
    "deterministic": ("c",),
}


def from_literal(obj: dict) -> Distribution:
    """Build a distribution from its config-file literal.

    A literal is an object with a ``type`` tag and the named numeric
    parameters of that family, e.g. ``{"type": "uniform", "lo": 0, "hi": 2}``.
    """
    if not isinstance(obj, dict):
        raise InvalidParameter(f"distribution literal must be an object, got {obj!r}")
    tag = obj.get("type")
    if tag not in LITERAL_TYPES:
        known = "|".join(sorted(LITERAL_TYPES))
        raise InvalidParameter(f"unknown distribution type {tag!r} (expected {known})")
    wanted = _LITERAL_PARAMS[tag]
    extra = set(obj) - set(wanted) - {"type"}
    if extra:
        raise InvalidParameter(f"{tag}: unexpected parameters {sorted(extra)}")
    missing = [p for p in wanted if p not in obj]
    if missing:
        raise InvalidParameter(f"{tag}: missing parameters {missing}")
    kwargs = {p: obj[p] for p in wanted}
    if tag == "chi_square":
        k = kwargs["k"]
        if isinstance(k, float) and k.is_integer():
            kwargs["k"] = int(k)
    return LITERAL_TYPES[tag](**kwargs)
