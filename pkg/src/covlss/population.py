"""Population covariance models whose leading eigenvalues grow with n.

A spectrum is split into a spiked group of size floor(beta*p) with
eigenvalues (2 + r_i) * n^alpha and a bulk group with eigenvalues
2*r_i in (0, 2), for r_i in (0, 1).  The covariance is Sigma = U L U'
for a random orthogonal U (or L itself in the diagonal-only regime);
its square root shares the same eigenbasis, so Sigma^{1/2} is exact by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symmat import SymMatrix, TraceSet, trace_set

TRACE_CHECK_RTOL = 1e-8


class ConsistencyError(RuntimeError):
    """Trace functionals disagree with the eigenvalue sums."""


@dataclass(frozen=True)
class SpectrumSpec:
    """Declarative description of the population eigenvalue list."""

    p: int
    n: int
    alpha: float
    beta: float
    r_values: np.ndarray
    diagonal_only: bool = False

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ValueError("p must be a positive integer")
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        r = np.asarray(self.r_values, dtype=float)
        if r.shape != (self.p,):
            raise ValueError(f"r_values must have length p = {self.p}")
        if np.any(r <= 0.0) or np.any(r >= 1.0):
            raise ValueError("all r_values must lie strictly in (0, 1)")
        r = r.copy()
        r.flags.writeable = False
        object.__setattr__(self, "r_values", r)

    @property
    def spike_count(self) -> int:
        return int(np.floor(self.beta * self.p))


@dataclass(frozen=True)
class PopulationModel:
    """Assembled covariance, its square root, eigenvalues and trace bundle."""

    sigma: SymMatrix
    sigma_half: SymMatrix
    eigenvalues: np.ndarray
    traces: TraceSet
    is_diagonal: bool

    @property
    def p(self) -> int:
        return self.sigma.dim


def build_spectrum(spec: SpectrumSpec) -> np.ndarray:
    """Descending eigenvalue list: spikes (2+r)*n^alpha, then bulk 2r."""
    k = spec.spike_count
    lam = np.empty(spec.p)
    growth = float(spec.n) ** spec.alpha
    lam[:k] = (2.0 + spec.r_values[:k]) * growth
    lam[k:] = 2.0 * spec.r_values[k:]
    return np.sort(lam)[::-1].copy()


def haar_orthogonal(p: int, seed: int) -> np.ndarray:
    """Haar-distributed p x p orthogonal matrix, deterministic per seed.

    QR of an i.i.d. standard normal matrix with the column signs fixed so
    that diag(R) > 0, which makes the factorization unique and the law Haar.
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((p, p))
    q, r = np.linalg.qr(z)
    signs = np.where(np.diagonal(r) >= 0.0, 1.0, -1.0)
    return q * signs


def assemble_model(eigs, u: np.ndarray | None = None) -> PopulationModel:
    """Sigma = U L U' (or L when u is None) with its exact square root.

    The trace bundle of the assembled Sigma is cross-checked against the
    eigenvalue power sums; disagreement beyond 1e-8 relative raises
    :class:`ConsistencyError`.
    """
    lam = np.asarray(eigs, dtype=float).copy()
    if lam.ndim != 1 or lam.size < 1:
        raise ValueError("eigenvalues must be a nonempty vector")
    if np.any(lam <= 0.0):
        raise ValueError("all eigenvalues must be strictly positive")

    if u is None:
        sigma = np.diag(lam)
        half = np.diag(np.sqrt(lam))
    else:
        u = np.asarray(u, dtype=float)
        if u.shape != (lam.size, lam.size):
            raise ValueError(f"u must be {lam.size} x {lam.size}, got {u.shape}")
        gram_defect = float(np.linalg.norm(u @ u.T - np.eye(lam.size)))
        if gram_defect > 1e-8 * max(1.0, float(lam.size)):
            raise ValueError(f"u is not orthogonal: ||UU' - I||_F = {gram_defect:.3e}")
        sigma = (u * lam) @ u.T
        sigma = 0.5 * (sigma + sigma.T)
        half = (u * np.sqrt(lam)) @ u.T
        half = 0.5 * (half + half.T)

    traces = trace_set(SymMatrix(sigma))
    for k, got in enumerate((traces.tr1, traces.tr2, traces.tr3, traces.tr4), start=1):
        want = float(np.sum(lam**k))
        if abs(got - want) > TRACE_CHECK_RTOL * max(1.0, abs(want)):
            raise ConsistencyError(
                f"tr Sigma^{k} = {got!r} disagrees with eigenvalue sum {want!r}"
            )

    lam.flags.writeable = False
    return PopulationModel(
        sigma=SymMatrix(sigma),
        sigma_half=SymMatrix(half),
        eigenvalues=lam,
        traces=traces,
        is_diagonal=u is None,
    )


def build_model(spec: SpectrumSpec, rotation_seed: int) -> PopulationModel:
    """Spectrum plus (unless diagonal-only) a Haar rotation, assembled."""
    lam = build_spectrum(spec)
    u = None if spec.diagonal_only else haar_orthogonal(spec.p, rotation_seed)
    return assemble_model(lam, u)
