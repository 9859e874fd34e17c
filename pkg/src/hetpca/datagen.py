"""Seeded synthetic data ``Y = U diag(theta) Z^H + E diag(eta)`` with ground truth.

Four noise-assignment policies are supported:

``deterministic``
    exactly ``n_l`` samples at each level (largest-remainder rounding of
    ``p_l * n``), laid out in contiguous blocks in input order.
``random-iid``
    each ``eta_i**2`` drawn independently from the levels with probabilities ``p_l``.
``johnstone-spiked``
    iid samples with covariance ``diag(theta^2 + s, ..., s, ...)`` in the basis
    ``U``, where ``s`` is the average variance. ``Z`` then holds the whitened
    spike coordinates rather than separate coefficients.
``mixture-homoscedastic``
    a single noise level ``sqrt(s)`` whose unit-variance entries are drawn
    from a Gaussian mixture with component variances ``v_l / s``.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from hetpca.errors import DomainError
from hetpca.spectrum import NoiseProfile

__all__ = [
    "DatasetSpec",
    "Dataset",
    "sample_subspace",
    "level_counts",
    "generate",
    "derive_seed",
    "prediction_profile",
    "export_dataset",
    "load_dataset",
    "SEED_SCHEME_VERSION",
    "ASSIGNMENTS",
]

Field = Literal["real", "complex"]
ASSIGNMENTS = ("deterministic", "random-iid", "johnstone-spiked", "mixture-homoscedastic")
COEFF_DISTS = ("gaussian", "rademacher")
NOISE_DISTS = ("gaussian",)
SEED_SCHEME_VERSION = 1

_MAGIC = b"HPCA"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHQQQ")  # 32 bytes
_FIELD_TAGS = {"real": 0, "complex": 1}


def derive_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    """Per-trial 64-bit seed, a pure function of its three arguments.

    Mixing is numpy's ``SeedSequence`` hash with the point and trial indices
    as the spawn key.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(point_index), int(trial_index)))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class DatasetSpec:
    n: int
    d: int
    amplitudes: tuple[float, ...]
    noise: NoiseProfile
    field: Field = "real"
    coeff_dist: str = "gaussian"
    noise_dist: str = "gaussian"
    assignment: str = "deterministic"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        if self.n < 1 or self.d < 1:
            raise DomainError("n and d must be >= 1")
        k = len(self.amplitudes)
        if k < 1 or k > min(self.n, self.d):
            raise DomainError(f"need 1 <= k <= min(n, d); got k={k}, n={self.n}, d={self.d}")
        if not all(a > 0 and math.isfinite(a) for a in self.amplitudes):
            raise DomainError("amplitudes must be finite and > 0")
        if self.field not in _FIELD_TAGS:
            raise DomainError(f"unknown field {self.field!r}")
        if self.coeff_dist not in COEFF_DISTS:
            raise DomainError(f"unknown coefficient distribution {self.coeff_dist!r}")
        if self.noise_dist not in NOISE_DISTS:
            raise DomainError(f"unknown noise distribution {self.noise_dist!r}")
        if self.assignment not in ASSIGNMENTS:
            raise DomainError(f"unknown assignment {self.assignment!r}")
        if self.assignment == "johnstone-spiked" and self.coeff_dist != "gaussian":
            raise DomainError("johnstone-spiked data has no separate coefficient draw; use gaussian")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")

    @property
    def k(self) -> int:
        return len(self.amplitudes)

    @property
    def c(self) -> float:
        return self.n / self.d

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "amplitudes": list(self.amplitudes),
            "variances": list(self.noise.variances),
            "proportions": list(self.noise.proportions),
            "field": self.field,
            "coeff_dist": self.coeff_dist,
            "noise_dist": self.noise_dist,
            "assignment": self.assignment,
            "seed": int(self.seed),
        }

    @classmethod
    def from_dict(cls, d: dict) -> DatasetSpec:
        return cls(
            n=int(d["n"]),
            d=int(d["d"]),
            amplitudes=tuple(d["amplitudes"]),
            noise=NoiseProfile(d["variances"], d["proportions"]),
            field=d.get("field", "real"),
            coeff_dist=d.get("coeff_dist", "gaussian"),
            noise_dist=d.get("noise_dist", "gaussian"),
            assignment=d.get("assignment", "deterministic"),
            seed=int(d.get("seed", 0)),
        )


@dataclass
class Dataset:
    Y: np.ndarray
    U: np.ndarray
    Z: np.ndarray
    eta: np.ndarray
    spec: DatasetSpec
    E: np.ndarray | None = field(default=None, repr=False)

    @property
    def theta(self) -> np.ndarray:
        if self.spec.assignment == "johnstone-spiked":
            return np.sqrt(np.asarray(self.spec.amplitudes) ** 2 + self.spec.noise.mean_variance)
        return np.asarray(self.spec.amplitudes)

    def signal(self) -> np.ndarray:
        return self.U @ (self.theta[:, None] * self.Z.conj().T)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _normal(rng: np.random.Generator, shape, fld: str) -> np.ndarray:
    if fld == "complex":
        out = rng.standard_normal(shape + (2,)).view(np.complex128)[..., 0]
        out *= math.sqrt(0.5)
        return out
    return rng.standard_normal(shape)


def sample_subspace(d: int, k: int, field: Field = "real", seed=None) -> np.ndarray:
    """Orthonormal ``d x k`` basis from Gram-Schmidt on a Gaussian matrix."""
    if k > d:
        raise DomainError(f"cannot fit k={k} orthonormal columns in dimension d={d}")
    G = _normal(_rng(seed), (d, k), field)
    Q, R = np.linalg.qr(G)
    ph = np.diag(R)
    ph = ph / np.abs(ph)
    return Q * ph.conj()[None, :]


def level_counts(n: int, proportions: Sequence[float]) -> np.ndarray:
    """Largest-remainder apportionment of ``n`` samples; ties go to earlier levels."""
    p = np.asarray(proportions, dtype=float)
    raw = p * n
    base = np.floor(raw).astype(np.int64)
    short = n - int(base.sum())
    order = np.argsort(-(raw - base), kind="stable")
    base[order[:short]] += 1
    return base


def prediction_profile(spec: DatasetSpec, realized: bool = False) -> NoiseProfile:
    """Noise profile whose asymptotic predictions apply to data generated from ``spec``.

    The two comparison generators are homoscedastic at the average variance.
    ``realized=True`` replaces the nominal proportions with the rounded counts
    of the deterministic assignment.
    """
    if spec.assignment in ("johnstone-spiked", "mixture-homoscedastic"):
        return NoiseProfile([spec.noise.mean_variance], [1.0])
    if realized and spec.assignment == "deterministic":
        counts = level_counts(spec.n, spec.noise.proportions)
        keep = counts > 0
        return NoiseProfile(np.asarray(spec.noise.variances)[keep], counts[keep] / spec.n)
    return spec.noise


def generate(spec: DatasetSpec, retain_noise: bool = False) -> Dataset:
    """Draw one dataset; identical ``spec`` (seed included) gives identical arrays."""
    ss = np.random.SeedSequence(int(spec.seed))
    s_sub, s_coef, s_assign, s_noise = (np.random.default_rng(s) for s in ss.spawn(4))
    n, d, k, fld = spec.n, spec.d, spec.k, spec.field
    v, p = spec.noise.v, spec.noise.p
    sbar = spec.noise.mean_variance

    U = sample_subspace(d, k, fld, s_sub)
    if spec.coeff_dist == "rademacher":
        Z = s_coef.choice(np.array([-1.0, 1.0]), size=(n, k))
        if fld == "complex":
            Z = Z.astype(np.complex128)
    else:
        Z = _normal(s_coef, (n, k), fld)

    E = _normal(s_noise, (d, n), fld)
    if spec.assignment == "deterministic":
        eta = np.repeat(np.sqrt(v), level_counts(n, p))
    elif spec.assignment == "random-iid":
        eta = np.sqrt(v)[s_assign.choice(len(v), size=n, p=p)]
    elif spec.assignment == "mixture-homoscedastic":
        eta = np.full(n, math.sqrt(sbar))
        if sbar > 0:
            comp = s_assign.choice(len(v), size=(d, n), p=p)
            E *= np.sqrt(v / sbar)[comp]
    else:  # johnstone-spiked
        eta = np.full(n, math.sqrt(sbar))
        # project the isotropic noise off span(U); the spike directions carry
        # variance theta^2 + sbar through Z instead
        E -= U @ (U.conj().T @ E)

    noise = E if not retain_noise else E.copy()
    Y = noise
    Y *= eta[None, :]
    theta = np.asarray(spec.amplitudes)
    if spec.assignment == "johnstone-spiked":
        theta = np.sqrt(theta**2 + sbar)
    Y += U @ (theta[:, None] * Z.conj().T)
    return Dataset(Y=Y, U=U, Z=Z, eta=eta, spec=spec, E=E if retain_noise else None)


def export_dataset(ds: Dataset, path: str | Path) -> tuple[Path, Path]:
    """Write ``ds`` as a binary file plus a JSON sidecar holding the spec.

    Layout after the 32-byte header (magic, u16 version, u16 field tag, u64 n,
    d, k, all little-endian): Y (d x n), U (d x k), Z (n x k) column-major as
    float64 or complex128, then eta (n float64).
    """
    path = Path(path)
    spec = ds.spec
    dt = np.dtype("<c16") if spec.field == "complex" else np.dtype("<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _FORMAT_VERSION, _FIELD_TAGS[spec.field], spec.n, spec.d, spec.k))
        for arr in (ds.Y, ds.U, ds.Z):
            fh.write(np.asarray(arr, dtype=dt).tobytes(order="F"))
        fh.write(np.asarray(ds.eta, dtype="<f8").tobytes())
    sidecar = path.with_name(path.name + ".json")
    meta = {"format": "HPCA", "version": _FORMAT_VERSION, "layout": ["Y", "U", "Z", "eta"], "spec": spec.to_dict()}
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path, sidecar


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    raw = path.read_bytes()
    magic, version, tag, n, d, k = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC or version != _FORMAT_VERSION:
        raise DomainError(f"{path} is not an HPCA v{_FORMAT_VERSION} file")
    dt = np.dtype("<c16") if tag == 1 else np.dtype("<f8")
    off = _HEADER.size
    out = []
    for rows, cols in ((d, n), (d, k), (n, k)):
        cnt = rows * cols
        out.append(np.frombuffer(raw, dtype=dt, count=cnt, offset=off).reshape((rows, cols), order="F").copy())
        off += cnt * dt.itemsize
    eta = np.frombuffer(raw, dtype="<f8", count=n, offset=off).copy()
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    return Dataset(Y=out[0], U=out[1], Z=out[2], eta=eta, spec=DatasetSpec.from_dict(meta["spec"]))
