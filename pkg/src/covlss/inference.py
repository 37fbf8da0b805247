"""Whitening of (T_1, T_2), chi-square(2) reference, Q-Q and KS reporting.

The whitened statistic ts = d' Psi^{-1} d with d the centered pair is
asymptotically chi-square with 2 degrees of freedom, whose CDF and
quantile have the closed forms 1 - exp(-x/2) and -2 ln(1 - q).  The
Kolmogorov-Smirnov distance is the scalar summary of each Q-Q comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .moments import MomentSet

_STD_NORMAL = NormalDist()


class DegenerateCovarianceError(RuntimeError):
    """The 2x2 covariance is not positive definite; whitening is refused."""

    def __init__(self, psi11: float, psi12: float, psi22: float, context: str = ""):
        self.psi11, self.psi12, self.psi22 = psi11, psi12, psi22
        self.det = psi11 * psi22 - psi12 * psi12
        suffix = f" ({context})" if context else ""
        super().__init__(
            f"covariance of (T1, T2) is degenerate: psi11={psi11!r}, "
            f"psi12={psi12!r}, psi22={psi22!r}, det={self.det!r}{suffix}"
        )


# A mathematically singular covariance (e.g. constant T1 under a sign
# innovation with a diagonal spectrum) may round to a tiny value of either
# sign, so degeneracy is judged against each quantity's cancellation scale.
_DEGENERACY_RTOL = 1e-12


def check_covariance(ms: MomentSet, context: str = "") -> None:
    """Raise :class:`DegenerateCovarianceError` unless Psi is solidly PD."""
    degenerate = (
        ms.psi11 <= _DEGENERACY_RTOL * ms.psi11_scale
        or ms.psi22 <= _DEGENERACY_RTOL * ms.psi22_scale
        or ms.det_psi
        <= _DEGENERACY_RTOL * (abs(ms.psi11 * ms.psi22) + ms.psi12 * ms.psi12)
    )
    if degenerate:
        raise DegenerateCovarianceError(ms.psi11, ms.psi12, ms.psi22, context)


@dataclass(frozen=True)
class TSValue:
    ts: float
    t1_raw: float
    t2_raw: float


@dataclass(frozen=True, eq=False)
class QQReport:
    """Paired theoretical/empirical quantiles plus the KS distance."""

    probs: np.ndarray
    q_theoretical: np.ndarray
    q_empirical: np.ndarray
    ks: float
    reps: int
    config_digest: str = ""

    def as_dict(self) -> dict:
        return {"ks": self.ks, "reps": self.reps, "config_digest": self.config_digest}


def chi2_df2_cdf(x):
    """CDF of chi-square with 2 degrees of freedom: 1 - exp(-x/2) on x >= 0."""
    arr = np.asarray(x, dtype=float)
    out = np.where(arr < 0.0, 0.0, -np.expm1(-0.5 * np.maximum(arr, 0.0)))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def chi2_df2_quantile(q: float) -> float:
    """Quantile of chi-square(2): -2 ln(1 - q), for q in (0, 1)."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    return -2.0 * math.log1p(-q)


def _normal_cdf_array(x: np.ndarray) -> np.ndarray:
    return np.array([_STD_NORMAL.cdf(float(v)) for v in x])


_REFERENCES = {
    "chi2_df2": (lambda x: np.asarray(chi2_df2_cdf(x)), chi2_df2_quantile),
    "standard_normal": (_normal_cdf_array, lambda q: _STD_NORMAL.inv_cdf(q)),
}


def whiten(t1: float, t2: float, ms: MomentSet) -> TSValue:
    """ts = d' Psi^{-1} d with d = (t1 - E T1, t2 - E T2).

    Uses the closed-form 2x2 inverse; refuses a non-positive-definite
    covariance rather than pseudo-inverting it.
    """
    check_covariance(ms)
    det = ms.det_psi
    d1 = t1 - ms.e_t1
    d2 = t2 - ms.e_t2
    ts = (ms.psi22 * d1 * d1 - 2.0 * ms.psi12 * d1 * d2 + ms.psi11 * d2 * d2) / det
    return TSValue(ts=max(ts, 0.0), t1_raw=t1, t2_raw=t2)


def ks_distance(samples: np.ndarray, reference_cdf) -> float:
    """sup |empirical CDF - reference CDF| over the sorted sample,
    considering both one-sided gaps at every jump."""
    s = np.sort(np.asarray(samples, dtype=float))
    m = s.size
    if m == 0:
        raise ValueError("cannot compute a KS distance of an empty sample")
    f = np.asarray(reference_cdf(s), dtype=float)
    i = np.arange(1, m + 1)
    return float(max((i / m - f).max(), (f - (i - 1) / m).max()))


def qq_report(
    samples,
    reference: str = "chi2_df2",
    grid_size: int = 199,
    config_digest: str = "",
) -> QQReport:
    """Q-Q table on the probability grid (i - 0.5)/grid_size plus the KS
    distance of the full sample against the reference."""
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise ValueError("samples must be nonempty")
    if grid_size < 2:
        raise ValueError(f"grid_size must be at least 2, got {grid_size}")
    if reference not in _REFERENCES:
        raise ValueError(f"unknown reference {reference!r}")
    cdf, quantile = _REFERENCES[reference]
    probs = (np.arange(1, grid_size + 1) - 0.5) / grid_size
    q_th = np.array([quantile(float(q)) for q in probs])
    # Hazen plotting position: order statistic i sits at (i - 0.5)/m,
    # matching the probability grid above.
    q_emp = np.quantile(s, probs, method="hazen")
    return QQReport(
        probs=probs,
        q_theoretical=q_th,
        q_empirical=q_emp,
        ks=ks_distance(s, cdf),
        reps=int(s.size),
        config_digest=config_digest,
    )


def marginal_normal_check(tk_samples, grid_size: int = 199) -> QQReport:
    """Standardize a T_k sample by its own mean/sd and compare to N(0, 1).

    This is the desk-scale probe of asymptotic marginal normality for
    statistics whose limiting parameters have no closed form.
    """
    s = np.asarray(tk_samples, dtype=float)
    if s.size < 100:
        raise ValueError(f"need at least 100 samples, got {s.size}")
    sd = float(s.std(ddof=1))
    if sd == 0.0:
        raise ValueError("degenerate sample: zero variance")
    z = (s - s.mean()) / sd
    return qq_report(z, reference="standard_normal", grid_size=grid_size)
