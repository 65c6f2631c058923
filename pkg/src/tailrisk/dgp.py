"""Return-path simulation and conditional-variance filtering.

The data-generating process is a zero-mean location-scale model
r_t = z_t * sqrt(sigma2_t) where sigma2_t follows one of four recursions:
a constant variance, GARCH(1,1), TGARCH(1,1) (GJR leverage term driven by
the sign of the previous shock), or a RiskMetrics EWMA. Each competitor
model filters its own variance path from the common simulated returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit

from .distributions import InnovationDistribution


class NonstationaryModelError(ValueError):
    """Raised when a recursion has no finite unconditional variance."""


@dataclass(frozen=True)
class Constant:
    sigma2: float

    def __post_init__(self) -> None:
        if not self.sigma2 > 0.0:
            raise ValueError("constant variance must be positive")


@dataclass(frozen=True)
class Garch11:
    omega: float
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if min(self.omega, self.alpha, self.beta) < 0.0:
            raise ValueError("GARCH parameters must be nonnegative")


@dataclass(frozen=True)
class Tgarch11:
    omega: float
    alpha: float
    gamma: float
    beta: float

    def __post_init__(self) -> None:
        if min(self.omega, self.alpha, self.gamma, self.beta) < 0.0:
            raise ValueError("TGARCH parameters must be nonnegative")


@dataclass(frozen=True)
class RiskMetricsEwma:
    lam: float = 0.94

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise ValueError("EWMA decay must lie in (0, 1)")


VolatilityModel = Union[Constant, Garch11, Tgarch11, RiskMetricsEwma]


@dataclass(frozen=True)
class ModelSpec:
    """A volatility recursion paired with an innovation distribution."""

    vol: VolatilityModel
    dist: InnovationDistribution
    label: str


@dataclass
class ReturnPath:
    """Simulated daily log-returns (x100) with the true conditional variances."""

    returns: np.ndarray
    sigma2_true: np.ndarray
    seed: object
    sigma2_uncond: float  # unconditional variance of the generating model

    def __len__(self) -> int:
        return len(self.returns)


def unconditional_variance(vol: VolatilityModel) -> float:
    """Stationary variance of the recursion; leverage enters with weight 1/2."""
    if isinstance(vol, Constant):
        return vol.sigma2
    if isinstance(vol, Garch11):
        persistence = vol.alpha + vol.beta
        if persistence >= 1.0:
            raise NonstationaryModelError(f"alpha + beta = {persistence} >= 1")
        return vol.omega / (1.0 - persistence)
    if isinstance(vol, Tgarch11):
        persistence = vol.alpha + 0.5 * vol.gamma + vol.beta
        if persistence >= 1.0:
            raise NonstationaryModelError(f"alpha + gamma/2 + beta = {persistence} >= 1")
        return vol.omega / (1.0 - persistence)
    raise NonstationaryModelError("EWMA recursion has no finite unconditional variance")


def calibrate_omega(vol: VolatilityModel, target_sigma2: float) -> VolatilityModel:
    """Rescale the intercept so the unconditional variance hits the target."""
    if not target_sigma2 > 0.0:
        raise ValueError("target variance must be positive")
    if isinstance(vol, Constant):
        return Constant(target_sigma2)
    if isinstance(vol, Garch11):
        return Garch11(target_sigma2 * (1.0 - vol.alpha - vol.beta), vol.alpha, vol.beta)
    if isinstance(vol, Tgarch11):
        return Tgarch11(
            target_sigma2 * (1.0 - vol.alpha - 0.5 * vol.gamma - vol.beta),
            vol.alpha,
            vol.gamma,
            vol.beta,
        )
    raise NonstationaryModelError("EWMA recursion has no intercept to calibrate")


@njit(cache=True)
def _simulate_tgarch(z, omega, alpha, gamma, beta, sigma2_0):  # pragma: no cover
    n = z.shape[0]
    returns = np.empty(n)
    sigma2 = np.empty(n)
    s2 = sigma2_0
    for t in range(n):
        sigma2[t] = s2
        r = z[t] * math.sqrt(s2)
        returns[t] = r
        lev = gamma * r * r if r < 0.0 else 0.0
        s2 = omega + alpha * r * r + lev + beta * s2
    return returns, sigma2


@njit(cache=True)
def _filter_tgarch(returns, omega, alpha, gamma, beta, sigma2_0):  # pragma: no cover
    n = returns.shape[0]
    sigma2 = np.empty(n)
    s2 = sigma2_0
    for t in range(n):
        sigma2[t] = s2
        r = returns[t]
        lev = gamma * r * r if r < 0.0 else 0.0
        s2 = omega + alpha * r * r + lev + beta * s2
    return sigma2


@njit(cache=True)
def _filter_ewma(returns, lam, sigma2_0):  # pragma: no cover
    n = returns.shape[0]
    sigma2 = np.empty(n)
    s2 = sigma2_0
    for t in range(n):
        sigma2[t] = s2
        s2 = lam * s2 + (1.0 - lam) * returns[t] * returns[t]
    return sigma2


def simulate_path(
    true_model: ModelSpec,
    n: int,
    rng: np.random.Generator,
    burn_in: int = 2000,
    seed: object = None,
) -> ReturnPath:
    """Simulate burn_in + n steps from the unconditional variance, keep the last n."""
    if n < 1 or burn_in < 0:
        raise ValueError("need n >= 1 and burn_in >= 0")
    vol = true_model.vol
    sigma2_0 = unconditional_variance(vol)
    total = burn_in + n
    z = true_model.dist.sample(total, rng)
    if isinstance(vol, Constant):
        returns = z * math.sqrt(vol.sigma2)
        sigma2 = np.full(total, vol.sigma2)
    else:
        if isinstance(vol, Garch11):
            params = (vol.omega, vol.alpha, 0.0, vol.beta)
        else:
            params = (vol.omega, vol.alpha, vol.gamma, vol.beta)
        returns, sigma2 = _simulate_tgarch(z, *params, sigma2_0)
    return ReturnPath(returns[burn_in:], sigma2[burn_in:], seed, sigma2_0)


def filter_volatility(
    model: ModelSpec, path: ReturnPath, init_sigma2: float | None = None
) -> np.ndarray:
    """One-step-ahead conditional variances from running the model on the returns.

    GARCH-type filters start at the model's own unconditional variance; the
    EWMA has none and starts at the true model's unconditional variance.
    """
    if len(path) == 0:
        raise ValueError("path must be nonempty")
    vol = model.vol
    if isinstance(vol, Constant):
        return np.full(len(path), vol.sigma2)
    if isinstance(vol, RiskMetricsEwma):
        s0 = path.sigma2_uncond if init_sigma2 is None else init_sigma2
        return _filter_ewma(path.returns, vol.lam, s0)
    s0 = unconditional_variance(vol) if init_sigma2 is None else init_sigma2
    if isinstance(vol, Garch11):
        return _filter_tgarch(path.returns, vol.omega, vol.alpha, 0.0, vol.beta, s0)
    return _filter_tgarch(path.returns, vol.omega, vol.alpha, vol.gamma, vol.beta, s0)


def export_path_csv(path: ReturnPath, fh) -> None:
    fh.write("t,return,sigma2_true\n")
    for t, (r, s2) in enumerate(zip(path.returns, path.sigma2_true)):
        fh.write(f"{t},{float(r)!r},{float(s2)!r}\n")
