"""PCA via truncated SVD and the empirical counterparts of the asymptotic limits.

All metrics are invariant to the arbitrary phase of each singular pair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from hetpca.datagen import Dataset
from hetpca.errors import DomainError

__all__ = [
    "PcaResult",
    "EmpiricalMetrics",
    "pca",
    "amplitude_groups",
    "subspace_metric",
    "coefficient_metric",
    "mixed_metric",
    "mse_metric",
    "overall_subspace_metric",
    "evaluate",
    "SVD_RESIDUAL_RTOL",
]

SVD_RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray  # d x k, left singular vectors of Y / sqrt(n)
    amplitudes_sq: np.ndarray  # squared singular values, descending
    scores: np.ndarray  # n x k, unit-norm right singular vectors

    @property
    def k(self) -> int:
        return self.components.shape[1]


def _svd_residuals(Ys: np.ndarray, U: np.ndarray, s: np.ndarray, V: np.ndarray) -> np.ndarray:
    return np.linalg.norm(Ys @ V - U * s[None, :], axis=0)


def pca(Y: np.ndarray, k: int) -> PcaResult:
    """Top-``k`` singular triples of ``Y / sqrt(n)``.

    The Gram matrix of the shorter side is eigendecomposed first; if any
    retained triple misses ``||Y v - s u|| <= 1e-8 ||Y||`` the full LAPACK SVD
    is used instead.
    """
    Y = np.asarray(Y)
    if Y.ndim != 2:
        raise DomainError("Y must be a 2-D array")
    d, n = Y.shape
    if not 1 <= k <= min(n, d):
        raise DomainError(f"need 1 <= k <= min(n, d) = {min(n, d)}, got {k}")
    Ys = Y / np.sqrt(n)
    YsH = Ys.conj().T

    if d <= n:
        G = Ys @ YsH
        w, Uk = sla.eigh(G, subset_by_index=[d - k, d - 1])
        w, Uk = w[::-1], Uk[:, ::-1]
        s = np.sqrt(np.clip(w, 0.0, None))
        ok = s > 0
        Vk = np.zeros((n, k), dtype=Uk.dtype)
        Vk[:, ok] = (YsH @ Uk[:, ok]) / s[ok]
    else:
        G = YsH @ Ys
        w, Vk = sla.eigh(G, subset_by_index=[n - k, n - 1])
        w, Vk = w[::-1], Vk[:, ::-1]
        s = np.sqrt(np.clip(w, 0.0, None))
        ok = s > 0
        Uk = np.zeros((d, k), dtype=Vk.dtype)
        Uk[:, ok] = (Ys @ Vk[:, ok]) / s[ok]

    top = s[0] if s.size else 0.0
    needs_dense = not ok.all() or np.any(_svd_residuals(Ys, Uk, s, Vk) > SVD_RESIDUAL_RTOL * max(top, 1e-300))
    if not needs_dense:
        # vectors recovered through Y inherit its rounding; re-normalize
        for M in (Uk, Vk):
            M /= np.linalg.norm(M, axis=0)[None, :]
        needs_dense = not np.allclose(Uk.conj().T @ Uk, np.eye(k), atol=1e-10)
    if needs_dense:
        Uf, sf, Vhf = sla.svd(Ys, full_matrices=False)
        Uk, s, Vk = Uf[:, :k], sf[:k], Vhf[:k].conj().T
    return PcaResult(components=Uk, amplitudes_sq=s**2, scores=Vk)


def amplitude_groups(amplitudes) -> list[np.ndarray]:
    """For each component, the indices sharing its amplitude (exact equality)."""
    a = np.asarray(amplitudes)
    return [np.nonzero(a == a[i])[0] for i in range(a.size)]


def _split(i: int, amplitudes) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(amplitudes)
    same = a == a[i]
    return np.nonzero(same)[0], np.nonzero(~same)[0]


def _sq_proj(x: np.ndarray, B: np.ndarray) -> float:
    """Squared norm of the projection of unit vector ``x`` onto orthonormal ``B``."""
    if B.shape[1] == 0:
        return 0.0
    return float(np.sum(np.abs(B.conj().T @ x) ** 2))


def _orth(M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    Q, _ = np.linalg.qr(M)
    return Q


def subspace_metric(res: PcaResult, truth: Dataset, i: int) -> tuple[float, float]:
    """Squared cosines of component ``i`` against its amplitude group and the rest."""
    same, other = _split(i, truth.spec.amplitudes)
    u = res.components[:, i]
    return _sq_proj(u, truth.U[:, same]), _sq_proj(u, truth.U[:, other])


def coefficient_metric(res: PcaResult, truth: Dataset, i: int) -> tuple[float, float]:
    """Squared cosines of score ``i`` against the (orthonormalized) coefficient groups."""
    same, other = _split(i, truth.spec.amplitudes)
    z = res.scores[:, i]
    return _sq_proj(z, _orth(truth.Z[:, same])), _sq_proj(z, _orth(truth.Z[:, other]))


def mixed_metric(res: PcaResult, truth: Dataset, i: int) -> tuple[float, float]:
    """Real part and |imaginary part| of ``sum_j <u_i, u_j> conj(<z_i, z_j / |z_j|>)`` over the group.

    ``<a, b>`` is ``b^H a``. The singular pair shares its phase, so the sum does not
    depend on it; no sign folding is applied.
    """
    same, _ = _split(i, truth.spec.amplitudes)
    u, z = res.components[:, i], res.scores[:, i]
    Zs = truth.Z[:, same]
    zn = Zs / np.linalg.norm(Zs, axis=0)[None, :]
    total = np.sum((truth.U[:, same].conj().T @ u) * np.conj(zn.conj().T @ z))
    return float(np.real(total)), float(abs(np.imag(total)))


def overall_subspace_metric(res: PcaResult, truth: Dataset) -> float:
    return float(np.sum(np.abs(res.components.conj().T @ truth.U) ** 2) / res.k)


def mse_metric(res: PcaResult, truth: Dataset) -> float:
    """``||U Theta (Z/sqrt n)^H - U_hat Theta_hat V_hat^H||_F^2`` without forming d x n arrays.

    Both terms live in ``span[U, U_hat]``; after a QR of that basis the
    distance is the Frobenius norm of a ``2k x n`` difference.
    """
    n = truth.Z.shape[0]
    k = res.k
    Q, R = np.linalg.qr(np.hstack([truth.U, res.components]))
    left = R[:, :k] @ (truth.theta[:, None] * truth.Z.conj().T) / np.sqrt(n)
    right = R[:, k:] @ (np.sqrt(res.amplitudes_sq)[:, None] * res.scores.conj().T)
    return float(np.sum(np.abs(left - right) ** 2))


@dataclass(frozen=True)
class EmpiricalMetrics:
    subspace_sq_cos: np.ndarray
    subspace_sq_cos_other: np.ndarray
    coeff_sq_cos: np.ndarray
    coeff_sq_cos_other: np.ndarray
    mixed_real: np.ndarray
    mixed_imag_abs: np.ndarray
    amplitude_ratio: np.ndarray
    mse: float
    overall_subspace: float

    PER_COMPONENT = (
        "subspace_sq_cos",
        "subspace_sq_cos_other",
        "coeff_sq_cos",
        "coeff_sq_cos_other",
        "mixed_real",
        "mixed_imag_abs",
        "amplitude_ratio",
    )

    def as_dict(self) -> dict:
        out = {name: getattr(self, name).tolist() for name in self.PER_COMPONENT}
        out["mse"] = self.mse
        out["overall_subspace"] = self.overall_subspace
        return out


def evaluate(truth: Dataset, res: PcaResult | None = None) -> EmpiricalMetrics:
    """Run PCA (unless given) and compute every empirical metric."""
    k = truth.spec.k
    if res is None:
        res = pca(truth.Y, k)
    sub = np.array([subspace_metric(res, truth, i) for i in range(k)])
    coef = np.array([coefficient_metric(res, truth, i) for i in range(k)])
    mix = np.array([mixed_metric(res, truth, i) for i in range(k)])
    return EmpiricalMetrics(
        subspace_sq_cos=sub[:, 0],
        subspace_sq_cos_other=sub[:, 1],
        coeff_sq_cos=coef[:, 0],
        coeff_sq_cos_other=coef[:, 1],
        mixed_real=mix[:, 0],
        mixed_imag_abs=mix[:, 1],
        amplitude_ratio=res.amplitudes_sq / np.asarray(truth.spec.amplitudes) ** 2,
        mse=mse_metric(res, truth),
        overall_subspace=overall_subspace_metric(res, truth),
    )
