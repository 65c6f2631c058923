"""Innovation distributions: standard normal and unit-variance standardized Student-t.

Both families expose exact quantiles, densities, tail expectations and
reproducible sampling. The standardized-t is the classical t_nu variate
rescaled by sqrt((nu - 2) / nu) so that its variance is exactly one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


class DegenerateIntervalError(ValueError):
    """Raised when a truncation interval carries no usable probability mass."""


def _check_level(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability level must be in (0, 1), got {p}")


@dataclass(frozen=True)
class StandardNormal:
    """Standard normal innovation distribution (mean 0, variance 1)."""

    def quantile(self, p: float) -> float:
        _check_level(p)
        return float(stats.norm.ppf(p))

    def cdf(self, z: float) -> float:
        return float(stats.norm.cdf(z))

    def pdf(self, z: float) -> float:
        return float(stats.norm.pdf(z))

    def partial_moment(self, z: float) -> float:
        """E[Z 1{Z <= z}] = -phi(z)."""
        return -float(stats.norm.pdf(z))

    def expected_shortfall(self, p: float) -> float:
        _check_level(p)
        return -float(stats.norm.pdf(stats.norm.ppf(p))) / p

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise ValueError("sample size must be >= 1")
        return rng.standard_normal(n)

    def truncated_mean(self, a: float, b: float) -> float:
        return _truncated_mean(self, a, b)

    @property
    def label(self) -> str:
        return "normal"


@dataclass(frozen=True)
class StandardizedStudentT:
    """Student-t rescaled by sqrt((nu - 2) / nu) to unit variance; requires nu > 2."""

    nu: float

    def __post_init__(self) -> None:
        if not self.nu > 2.0:
            raise ValueError(f"degrees of freedom must exceed 2, got {self.nu}")

    @property
    def _scale(self) -> float:
        return math.sqrt((self.nu - 2.0) / self.nu)

    def quantile(self, p: float) -> float:
        _check_level(p)
        return self._scale * float(stats.t.ppf(p, self.nu))

    def cdf(self, z: float) -> float:
        return float(stats.t.cdf(z / self._scale, self.nu))

    def pdf(self, z: float) -> float:
        return float(stats.t.pdf(z / self._scale, self.nu)) / self._scale

    def partial_moment(self, z: float) -> float:
        """E[Z 1{Z <= z}], using the closed-form t antiderivative.

        For classical t: int_{-inf}^{x} t f(t) dt = -f(x) (nu + x^2) / (nu - 1).
        """
        x = z / self._scale
        m_classical = -float(stats.t.pdf(x, self.nu)) * (self.nu + x * x) / (self.nu - 1.0)
        return self._scale * m_classical

    def expected_shortfall(self, p: float) -> float:
        _check_level(p)
        return self.partial_moment(self.quantile(p)) / p

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise ValueError("sample size must be >= 1")
        return self._scale * rng.standard_t(self.nu, size=n)

    def truncated_mean(self, a: float, b: float) -> float:
        return _truncated_mean(self, a, b)

    @property
    def label(self) -> str:
        return f"t{self.nu:g}"


InnovationDistribution = StandardNormal | StandardizedStudentT

_MASS_FLOOR = 1e-15


def _truncated_mean(dist: InnovationDistribution, a: float, b: float) -> float:
    """E[Z | a <= Z < b]; the interval must carry nonnegligible mass."""
    if a >= b:
        raise ValueError(f"truncation interval requires a < b, got a={a}, b={b}")
    mass = dist.cdf(b) - dist.cdf(a)
    if mass < _MASS_FLOOR:
        raise DegenerateIntervalError(
            f"interval [{a}, {b}) carries probability mass {mass:.3e}"
        )
    return (dist.partial_moment(b) - dist.partial_moment(a)) / mass
