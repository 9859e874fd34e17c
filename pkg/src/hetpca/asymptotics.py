"""Asymptotic PCA recovery under heteroscedastic noise.

Every quantity is a closed-form function of the roots ``alpha`` and ``beta``
found in :mod:`hetpca.spectrum`. Below the phase transition (``A(beta) <= 0``)
the recoveries are reported as zero, which is the conjectured limit rather than
a proven one; :attr:`ComponentPrediction.conjectured` flags those outputs.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from hetpca.errors import DomainError, HypothesisViolation, InvariantError
from hetpca.spectrum import (
    NoiseProfile,
    SpectrumParams,
    eval_A_gap,
    eval_B_prime_gap,
    solve_alpha,
    solve_beta_gap,
)

__all__ = [
    "ComponentPrediction",
    "OverallPrediction",
    "RecoveryBounds",
    "IdentityReport",
    "predict_component",
    "predict_homoscedastic",
    "predict_overall",
    "amplitude_bias_alt",
    "homoscedastic_bounds",
    "average_inverse_variance",
    "psi_inverse",
    "q_function",
    "check_spectrum_identities",
    "added_data_params",
    "added_data_break_even",
]


@dataclass(frozen=True)
class ComponentPrediction:
    alpha: float
    beta: float
    a_at_beta: float
    above_transition: bool
    amplitude_sq_limit: float
    amplitude_sq_ratio: float
    subspace_recovery: float
    coefficient_recovery: float
    mixed_recovery: float
    b_prime_at_beta: float = math.nan

    @property
    def conjectured(self) -> bool:
        """True when the zero recoveries rest on the phase-transition conjecture."""
        return not self.above_transition

    def as_dict(self) -> dict:
        d = asdict(self)
        d["conjectured"] = self.conjectured
        return d


@dataclass(frozen=True)
class OverallPrediction:
    mean_subspace_recovery: float
    mse: float


@dataclass(frozen=True)
class RecoveryBounds:
    amplitude_sq_ratio_lower: float
    subspace_upper: float
    coefficient_upper: float


def predict_component(params: SpectrumParams) -> ComponentPrediction:
    """All limits for one component: amplitude, subspace, coefficient and mixed recovery."""
    c, t2 = params.c, params.theta_sq
    noise = params.noise.merged()
    params = SpectrumParams(c, t2, noise)
    alpha = solve_alpha(c, noise)
    gap = solve_beta_gap(params)
    beta = noise.max_variance + gap
    a_beta = eval_A_gap(gap, c, noise)
    bp = eval_B_prime_gap(gap, params)

    if beta >= alpha:
        x, dist = beta, gap + (noise.max_variance - noise.v)
    else:
        x, dist = alpha, alpha - noise.v
    amp = (x / c) * (1.0 + c * float(np.sum(noise.p * noise.v / dist)))

    above = a_beta > 0
    if above:
        denom_z = beta + (1.0 - c) * t2
        if denom_z <= 0:
            raise InvariantError(f"beta + (1 - c) theta^2 = {denom_z!r} <= 0 above transition")
        sub = a_beta / (beta * bp)
        coef = a_beta / (c * denom_z * bp)
        mixed = a_beta / (math.sqrt(c * beta * denom_z) * bp)
    else:
        sub = coef = mixed = 0.0
    return ComponentPrediction(
        alpha=alpha,
        beta=beta,
        a_at_beta=a_beta,
        above_transition=above,
        amplitude_sq_limit=amp,
        amplitude_sq_ratio=amp / t2,
        subspace_recovery=sub,
        coefficient_recovery=coef,
        mixed_recovery=mixed,
        b_prime_at_beta=bp,
    )


def predict_homoscedastic(c: float, theta_sq: float, sigma_sq: float) -> ComponentPrediction:
    """Closed-form limits for a single noise variance."""
    if not (c > 0 and theta_sq > 0 and sigma_sq >= 0):
        raise DomainError("need c > 0, theta_sq > 0, sigma_sq >= 0")
    r = sigma_sq / theta_sq
    above = c * theta_sq**2 > sigma_sq**2
    if above:
        amp = theta_sq * (1.0 + r / c) * (1.0 + r)
        sub = (c - r**2) / (c + r)
        coef = (c - r**2) / (c * (1.0 + r))
        mixed = math.sqrt(sub * coef)
    else:
        amp = sigma_sq * (1.0 + 1.0 / math.sqrt(c)) ** 2
        sub = coef = mixed = 0.0
    beta = sigma_sq + c * theta_sq
    return ComponentPrediction(
        alpha=(1.0 + math.sqrt(c)) * sigma_sq,
        beta=beta,
        a_at_beta=1.0 - r**2 / c,
        above_transition=above,
        amplitude_sq_limit=amp,
        amplitude_sq_ratio=amp / theta_sq,
        subspace_recovery=sub,
        coefficient_recovery=coef,
        mixed_recovery=mixed,
        b_prime_at_beta=1.0 / (c * theta_sq),
    )


def predict_overall(c: float, amplitudes_sq: Sequence[float], noise: NoiseProfile) -> OverallPrediction:
    """Mean subspace recovery over k components and the limiting mean square error.

    Raises HypothesisViolation if any component is at or below the transition.
    """
    preds = [predict_component(SpectrumParams(c, t2, noise)) for t2 in amplitudes_sq]
    below = [i for i, pr in enumerate(preds) if not pr.above_transition]
    if below:
        raise HypothesisViolation(f"components {below} are not above the phase transition")
    mean_sub = math.fsum(pr.subspace_recovery for pr in preds) / len(preds)
    mse = math.fsum(
        2.0 * (t2 - pr.a_at_beta / (c * pr.b_prime_at_beta))
        + (pr.beta / (c * t2) - 1.0) * (pr.beta + t2)
        for t2, pr in zip(amplitudes_sq, preds)
    )
    return OverallPrediction(mean_subspace_recovery=mean_sub, mse=mse)


def amplitude_bias_alt(beta: float, c: float, theta_sq: float) -> float:
    """Limit of ``theta_hat^2 / theta^2`` written in terms of ``beta`` alone (valid when A(beta) >= 0)."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    return 1.0 + (beta / (c * theta_sq) - 1.0) * (beta / theta_sq + 1.0)


def homoscedastic_bounds(c: float, theta_sq: float, noise: NoiseProfile) -> RecoveryBounds:
    """Best-case limits attainable for the profile's average noise variance."""
    r = noise.mean_variance / theta_sq
    return RecoveryBounds(
        amplitude_sq_ratio_lower=(1.0 + r / c) * (1.0 + r),
        subspace_upper=(c - r**2) / (c + r),
        coefficient_upper=(c - r**2) / (c * (1.0 + r)),
    )


def average_inverse_variance(noise: NoiseProfile) -> float:
    return noise.mean_inverse_variance


def psi_inverse(x: float, c: float, noise: NoiseProfile) -> float:
    if not x > noise.max_variance:
        raise DomainError(f"x={x!r} must exceed the largest variance {noise.max_variance!r}")
    rad = (x / c) * (1.0 + c * float(np.sum(noise.p * noise.v / (x - noise.v))))
    if rad < 0:
        raise InvariantError(f"negative radicand {rad!r}")
    return math.sqrt(rad)


def q_function(s: float, z: float, c: float, noise: NoiseProfile) -> float:
    """Algebraic relation satisfied by ``(s, z) = (psi(z), z)``; zero on the curve."""
    if not s > noise.max_variance:
        raise DomainError(f"s={s!r} must exceed the largest variance")
    return c * z**2 / s**2 + (c - 1.0) / s - c * float(np.sum(noise.p / (s - noise.v)))


@dataclass
class IdentityReport:
    """Residuals of identities that must hold at ``beta``, plus bound slacks.

    Residuals pass when ``|r| < tol``; slacks pass when ``>= -tol``.
    """

    residuals: dict[str, float] = field(default_factory=dict)
    slacks: dict[str, float] = field(default_factory=dict)
    tol: float = 1e-9

    @property
    def passed(self) -> dict[str, bool]:
        out = {k: abs(v) < self.tol for k, v in self.residuals.items()}
        out.update({k: v >= -self.tol for k, v in self.slacks.items()})
        return out

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def _rel(diff: float, *scales: float) -> float:
    return diff / max(1.0, *(abs(s) for s in scales))


def check_spectrum_identities(params: SpectrumParams, tol: float = 1e-9) -> IdentityReport:
    """Cross-check the root-based limits against independent algebraic routes.

    Residuals are scaled by the magnitude of the largest term involved
    (floored at 1) so that large ``c`` does not register as a failure.
    """
    c, t2 = params.c, params.theta_sq
    noise = params.noise.merged()
    params = SpectrumParams(c, t2, noise)
    pred = predict_component(params)
    beta, a_beta, bp = pred.beta, pred.a_at_beta, pred.b_prime_at_beta
    sbar = noise.mean_variance
    rep = IdentityReport(tol=tol)

    rewrite = 1.0 - c - (beta / t2) * (beta * bp - 2.0)
    rep.residuals["a_rewrite"] = _rel(a_beta - rewrite, c, (beta / t2) * beta * bp)

    z = psi_inverse(beta, c, noise)
    rep.residuals["q_consistency"] = _rel(q_function(beta, z, c, noise), c * z**2 / beta**2, c / (beta - noise.max_variance))

    if pred.above_transition:
        rep.residuals["psi_amplitude"] = _rel(pred.amplitude_sq_limit - z**2, z**2)
        rep.residuals["geometric_mean"] = pred.mixed_recovery**2 - pred.subspace_recovery * pred.coefficient_recovery

    rep.slacks["beta_bound"] = _rel(beta - (c * t2 + sbar), beta)
    rep.slacks["b_prime_bound"] = _rel(bp - 1.0 / (c * t2), bp)
    rep.slacks["a_bound"] = (1.0 - (sbar / t2) ** 2 / c) - a_beta
    return rep


def added_data_params(c1: float, var1: float, c2: float, var2: float) -> tuple[float, NoiseProfile]:
    """Combined ratio and noise profile after appending ``c2`` samples/dim at ``var2``."""
    if c2 == 0:
        return c1, NoiseProfile([var1], [1.0])
    c = c1 + c2
    return c, NoiseProfile([var1, var2], [c1 / c, c2 / c])


def added_data_break_even(c1: float, var1: float, var2: float, theta_sq: float, c2_max: float = 1e6) -> float:
    """Smallest positive ``c2`` at which subspace recovery returns to its ``c2 = 0`` value.

    Returns ``0.0`` when adding data never hurts and ``inf`` if no crossing is
    found below ``c2_max``.
    """
    base = predict_component(SpectrumParams(c1, theta_sq, NoiseProfile([var1], [1.0]))).subspace_recovery

    def gain(c2: float) -> float:
        c, prof = added_data_params(c1, var1, c2, var2)
        return predict_component(SpectrumParams(c, theta_sq, prof)).subspace_recovery - base

    grid = np.geomspace(1e-6, c2_max, 400)
    vals = np.array([gain(g) for g in grid])
    if vals[0] >= 0:
        return 0.0
    idx = np.nonzero(vals >= 0)[0]
    if idx.size == 0:
        return math.inf
    j = idx[0]
    return float(brentq(gain, grid[j - 1], grid[j], xtol=1e-12, rtol=1e-12))
