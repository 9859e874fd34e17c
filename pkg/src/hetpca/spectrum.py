"""Rational secular functions A(x), B(x) and their largest real roots.

For a noise profile with variances ``v_l`` in proportions ``p_l`` and a
sample-to-dimension ratio ``c``::

    A(x) = 1 - c * sum_l p_l v_l**2 / (x - v_l)**2
    B(x) = 1 - c * theta**2 * sum_l p_l / (x - v_l)

Both are strictly increasing on ``x > max(v)``, tend to ``-inf`` at the
largest pole and have exactly one root there. The roots (``alpha`` for A,
``beta`` for B) drive every asymptotic PCA limit in
:mod:`hetpca.asymptotics`.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from hetpca.errors import DomainError, InvariantError

__all__ = [
    "NoiseProfile",
    "SpectrumParams",
    "eval_A",
    "eval_A_prime",
    "eval_B",
    "eval_B_prime",
    "solve_alpha",
    "solve_beta",
    "solve_beta_gap",
    "eval_A_gap",
    "eval_B_prime_gap",
    "TOL_RESIDUAL",
]

TOL_RESIDUAL = 1e-10
_BISECT_RTOL = 1e-13
_MAX_NEWTON = 5


@dataclass(frozen=True)
class NoiseProfile:
    """Noise variances ``variances[l]`` occurring in proportions ``proportions[l]``."""

    variances: tuple[float, ...]
    proportions: tuple[float, ...]

    def __init__(self, variances: Sequence[float], proportions: Sequence[float] | None = None):
        v = tuple(float(x) for x in np.atleast_1d(np.asarray(variances, dtype=float)))
        if proportions is None:
            proportions = [1.0 / len(v)] * len(v) if v else []
        p = tuple(float(x) for x in np.atleast_1d(np.asarray(proportions, dtype=float)))
        if len(v) == 0:
            raise DomainError("noise profile needs at least one variance")
        if len(v) != len(p):
            raise DomainError(f"{len(v)} variances but {len(p)} proportions")
        if not all(math.isfinite(x) and x >= 0 for x in v):
            raise DomainError(f"variances must be finite and >= 0, got {v}")
        if any(0 < x < sys.float_info.min for x in v):
            # subnormal values carry no relative precision for the root brackets
            raise DomainError(f"nonzero variances must be at least {sys.float_info.min!r}")
        if not all(math.isfinite(x) and x > 0 for x in p):
            raise DomainError(f"proportions must be finite and > 0, got {p}")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise DomainError(f"proportions must sum to 1 (got {math.fsum(p)!r})")
        object.__setattr__(self, "variances", v)
        object.__setattr__(self, "proportions", p)

    @classmethod
    def homoscedastic(cls, variance: float) -> NoiseProfile:
        return cls([variance], [1.0])

    @property
    def L(self) -> int:
        return len(self.variances)

    @property
    def v(self) -> np.ndarray:
        return np.asarray(self.variances)

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.proportions)

    @property
    def max_variance(self) -> float:
        return max(self.variances)

    @property
    def mean_variance(self) -> float:
        """Average noise variance ``sum_l p_l v_l``."""
        return math.fsum(pl * vl for pl, vl in zip(self.proportions, self.variances))

    @property
    def mean_inverse_variance(self) -> float:
        """Average inverse noise variance ``sum_l p_l / v_l``; needs all ``v_l > 0``."""
        if min(self.variances) <= 0:
            raise DomainError("average inverse variance needs strictly positive variances")
        return math.fsum(pl / vl for pl, vl in zip(self.proportions, self.variances))

    @property
    def is_noiseless(self) -> bool:
        return self.max_variance == 0.0

    def merged(self) -> NoiseProfile:
        """Equivalent profile with exactly-equal variances combined."""
        acc: dict[float, float] = {}
        for vl, pl in zip(self.variances, self.proportions):
            acc[vl] = acc.get(vl, 0.0) + pl
        if len(acc) == self.L:
            return self
        return NoiseProfile(list(acc.keys()), list(acc.values()))

    def shifted(self, delta: float) -> NoiseProfile:
        return NoiseProfile([vl + delta for vl in self.variances], self.proportions)


@dataclass(frozen=True)
class SpectrumParams:
    """Inputs for one subspace component: ratio ``c``, squared amplitude, noise."""

    c: float
    theta_sq: float
    noise: NoiseProfile

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise DomainError(f"c must be finite and > 0, got {self.c!r}")
        if not (math.isfinite(self.theta_sq) and self.theta_sq > 0):
            raise DomainError(f"theta_sq must be finite and > 0, got {self.theta_sq!r}")
        if not isinstance(self.noise, NoiseProfile):
            raise DomainError("noise must be a NoiseProfile")


def _check_c(c: float) -> None:
    if not (math.isfinite(c) and c > 0):
        raise DomainError(f"c must be finite and > 0, got {c!r}")


def _gaps(x: float, noise: NoiseProfile) -> np.ndarray:
    if not x > noise.max_variance:
        raise DomainError(f"x={x!r} must exceed the largest variance {noise.max_variance!r}")
    return x - noise.v


def eval_A(x: float, c: float, noise: NoiseProfile) -> float:
    if noise.is_noiseless and x > 0:
        return 1.0
    g = _gaps(x, noise)
    # ratio first so tiny variances do not underflow to 0/0
    return float(1.0 - c * np.sum(noise.p * (noise.v / g) ** 2))


def eval_A_prime(x: float, c: float, noise: NoiseProfile) -> float:
    if noise.is_noiseless and x > 0:
        return 0.0
    g = _gaps(x, noise)
    return float(2.0 * c * np.sum(noise.p * (noise.v / g) ** 2 / g))


def eval_B(x: float, params: SpectrumParams) -> float:
    g = _gaps(x, params.noise)
    return float(1.0 - params.c * params.theta_sq * np.sum(params.noise.p / g))


def eval_B_prime(x: float, params: SpectrumParams) -> float:
    g = _gaps(x, params.noise)
    return float(params.c * params.theta_sq * np.sum(params.noise.p / g**2))


def _largest_root(
    f: Callable[[float], float],
    fprime: Callable[[float], float],
    pole: float,
    hi: float,
) -> float:
    """Root of an increasing ``f`` on ``(pole, hi]`` given ``f(pole+) = -inf`` and ``f(hi) >= 0``.

    Bisection down to a relative width of 1e-13, then at most five Newton
    steps that are discarded if they leave the current bracket.
    """
    fhi = f(hi)
    if fhi < -TOL_RESIDUAL:
        raise InvariantError(f"bracket end {hi!r} has negative value {fhi!r}")
    if fhi <= 0:
        # upper bound attained up to rounding
        return hi
    lo = pole
    while hi - lo > _BISECT_RTOL * abs(hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    x = hi if lo == pole else 0.5 * (lo + hi)
    fx = f(x)
    for _ in range(_MAX_NEWTON):
        if fx == 0:
            break
        if fx < 0:
            lo = x
        else:
            hi = x
        step = fx / fprime(x)
        xn = x - step
        if not lo < xn <= hi or xn == x:
            break
        x, fx = xn, f(xn)
    if abs(fx) > TOL_RESIDUAL:
        # accept only when the sign change is pinned between adjacent floats
        if np.nextafter(lo, np.inf) < hi or lo == pole:
            raise InvariantError(f"root residual {fx!r} exceeds {TOL_RESIDUAL} at x={x!r}")
    return float(x)


def solve_alpha(c: float, noise: NoiseProfile) -> float:
    """Largest real root of A; ``0.0`` for a noiseless profile (A is identically 1)."""
    _check_c(c)
    noise = noise.merged()
    if noise.is_noiseless:
        return 0.0
    m = noise.max_variance
    if noise.L == 1:
        return m * (1.0 + math.sqrt(c))
    return _largest_root(
        lambda x: eval_A(x, c, noise),
        lambda x: eval_A_prime(x, c, noise),
        m,
        m * (1.0 + math.sqrt(c)),
    )


def _offsets(noise: NoiseProfile) -> np.ndarray:
    # distance of each pole below the largest one; exactly 0 for the top level
    return noise.max_variance - noise.v


def eval_A_gap(gap: float, c: float, noise: NoiseProfile) -> float:
    """``A(max_variance + gap)`` evaluated without forming the sum, for accuracy near the pole."""
    if noise.is_noiseless:
        return 1.0
    if not gap > 0:
        raise DomainError(f"gap={gap!r} must be positive")
    g = gap + _offsets(noise)
    return float(1.0 - c * np.sum(noise.p * (noise.v / g) ** 2))


def eval_B_prime_gap(gap: float, params: SpectrumParams) -> float:
    """``B'(max_variance + gap)``; see :func:`eval_A_gap`."""
    if not gap > 0:
        raise DomainError(f"gap={gap!r} must be positive")
    g = gap + _offsets(params.noise)
    return float(params.c * params.theta_sq * np.sum(params.noise.p / g**2))


def solve_beta_gap(params: SpectrumParams) -> float:
    """``beta - max_variance``, solved in that coordinate.

    Near the pole ``beta`` itself cannot resolve the gap to full relative
    precision, and ``B'(beta)`` scales with the inverse gap squared.
    """
    params = SpectrumParams(params.c, params.theta_sq, params.noise.merged())
    ct = params.c * params.theta_sq
    if params.noise.L == 1:
        # single pole: B(x) = 1 - ct / (x - v) is solved exactly
        return ct
    off = _offsets(params.noise)
    p = params.noise.p
    return _largest_root(
        lambda g: float(1.0 - ct * np.sum(p / (g + off))),
        lambda g: float(ct * np.sum(p / (g + off) ** 2)),
        0.0,
        ct,
    )


def solve_beta(params: SpectrumParams) -> float:
    """Largest real root of B for one component."""
    return params.noise.max_variance + solve_beta_gap(params)
