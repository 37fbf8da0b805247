"""Sample covariance trace statistics T_k = tr(B^k), B = (1/n) S^{1/2} X X' S^{1/2}.

T_k is computed on whichever side of the Gram correspondence is cheaper:
the p x p matrix B and the n x n matrix A/n = X' S X / n share nonzero
eigenvalues, so tr(B^k) = tr(A^k) / n^k.  The mean-centered statistics
T_1^0, T_2^0 of B - ybar ybar' need only A and its row sums (rank-one
update), never a p x p detour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .innovations import InnovationDist, sample_block
from .population import PopulationModel
from .seeding import REPLICATION_STREAM, derive_seed
from .symmat import SymMatrix, trace_power

_PSD_SLACK = 1e-9


class ReplicationInvariantError(RuntimeError):
    """A per-replication sanity bound failed (numerical corruption)."""


@dataclass(frozen=True)
class SampleConfig:
    """One replication's worth of inputs, fully deterministic per index."""

    model: PopulationModel
    dist: InnovationDist
    n: int
    replication_index: int
    master_seed: int
    max_power: int = 2
    centered: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.centered and self.n < 2:
            raise ValueError("centered statistics need n >= 2")
        if not 1 <= self.max_power <= 4:
            raise ValueError(f"max_power must be in 1..4, got {self.max_power}")


@dataclass(frozen=True)
class ReplicationResult:
    t: tuple[float, ...]
    t_centered: tuple[float, float] | None
    replication_index: int


def _draw_x(cfg: SampleConfig) -> np.ndarray:
    seed = derive_seed(cfg.master_seed, REPLICATION_STREAM, cfg.replication_index)
    p = cfg.model.p
    return sample_block(cfg.dist, seed, p * cfg.n).reshape(p, cfg.n)


def _sigma_times(model: PopulationModel, x: np.ndarray) -> np.ndarray:
    if model.is_diagonal:
        return model.eigenvalues[:, None] * x
    return model.sigma.array @ x


def _half_times(model: PopulationModel, x: np.ndarray) -> np.ndarray:
    if model.is_diagonal:
        return np.sqrt(model.eigenvalues)[:, None] * x
    return model.sigma_half.array @ x


def generate_gram(cfg: SampleConfig) -> SymMatrix:
    """The n x n Gram matrix A = X' Sigma X for this replication's X."""
    x = _draw_x(cfg)
    return _gram(cfg.model, x)


def _gram(model: PopulationModel, x: np.ndarray) -> SymMatrix:
    a = x.T @ _sigma_times(model, x)
    a = 0.5 * (a + a.T)
    return SymMatrix(a)


def lss_traces(gram: SymMatrix, n: int, m: int) -> tuple[float, ...]:
    """T_k = tr(A^k) / n^k for k = 1..m (m <= 4)."""
    if m > 4:
        raise ValueError("trace powers beyond 4 are not supported")
    if m < 1:
        raise ValueError("m must be at least 1")
    return tuple(trace_power(gram, k) / float(n) ** k for k in range(1, m + 1))


def _centered_from_gram(a: np.ndarray, n: int) -> tuple[float, float]:
    # T1^0 = T1 - ybar'ybar with ybar'ybar = 1'A1 / n^2;
    # T2^0 = T2 - 2 ybar'B ybar + (ybar'ybar)^2 with ybar'B ybar = ||A1||^2 / n^3.
    rowsum = a.sum(axis=1)
    total = float(rowsum.sum())
    yy = total / n**2
    t1 = float(np.trace(a)) / n
    t2 = float(np.sum(a * a)) / n**2
    t2c = t2 - 2.0 * float(rowsum @ rowsum) / n**3 + yy * yy
    return t1 - yy, t2c


def centered_lss(cfg: SampleConfig, x: np.ndarray) -> tuple[float, float]:
    """(T1^0, T2^0) of B - ybar ybar', computed in the n x n Gram form."""
    if cfg.n < 2:
        raise ValueError("centered statistics need n >= 2")
    gram = _gram(cfg.model, x)
    return _centered_from_gram(gram.array, cfg.n)


def _traces_p_side(
    y: np.ndarray, n: int, max_power: int, centered: bool
) -> tuple[tuple[float, ...], tuple[float, float] | None]:
    g = y @ y.T
    t1 = float(np.trace(g)) / n
    t2 = float(np.sum(g * g)) / n**2
    t = [t1, t2]
    if max_power >= 3:
        g2 = g @ g
        t.append(float(np.sum(g2 * g)) / n**3)
        if max_power == 4:
            t.append(float(np.sum(g2 * g2)) / n**4)
    tc = None
    if centered:
        ybar = y.mean(axis=1)
        yy = float(ybar @ ybar)
        z = y.T @ ybar
        tc = (t1 - yy, t2 - 2.0 * float(z @ z) / n + yy * yy)
    return tuple(t[:max_power]), tc


def run_replication(cfg: SampleConfig) -> ReplicationResult:
    """Sample X and compute (T_1..T_m) plus the centered pair when asked.

    Uses the p x p side when p <= n and the n x n Gram side otherwise;
    both sides agree to floating-point accuracy and the choice depends
    only on (p, n), so results are reproducible for any worker layout.
    """
    x = _draw_x(cfg)
    model, n = cfg.model, cfg.n
    if model.p <= n:
        y = _half_times(model, x)
        t, tc = _traces_p_side(y, n, cfg.max_power, cfg.centered)
    else:
        gram = _gram(model, x)
        t = lss_traces(gram, n, cfg.max_power)
        tc = _centered_from_gram(gram.array, n) if cfg.centered else None
    _check_invariants(t, tc, model.p, cfg.replication_index)
    return ReplicationResult(t=t, t_centered=tc, replication_index=cfg.replication_index)


def _check_invariants(
    t: tuple[float, ...], tc: tuple[float, float] | None, p: int, rep: int
) -> None:
    t1 = t[0]
    t2 = t[1] if len(t) > 1 else None
    bad = t1 < -_PSD_SLACK
    if t2 is not None:
        bad = bad or t2 < -_PSD_SLACK
        # eigenvalues of B are nonnegative: (sum l)^2 / p <= sum l^2 <= (sum l)^2
        bad = bad or t2 > t1 * t1 * (1.0 + _PSD_SLACK) + _PSD_SLACK
        bad = bad or t2 < t1 * t1 / p * (1.0 - _PSD_SLACK) - _PSD_SLACK
    if tc is not None:
        bad = bad or tc[0] > t1 * (1.0 + _PSD_SLACK) + _PSD_SLACK
    if bad:
        raise ReplicationInvariantError(
            f"replication {rep}: trace statistics violate PSD ordering: t={t}, centered={tc}"
        )
