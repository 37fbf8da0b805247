"""Closed-form means and covariances of the trace statistics (T_1, T_2).

With S the population covariance, t* its trace functionals and nu4 the
innovation's fourth cumulant excess, the implemented formulas are

  E T_1   = tr S                                                  (exact)
  E T_2   = [nu4 tr(S∘S) + tr^2 S + (n+1) tr S^2] / n             (exact)
  psi11   = [nu4 tr(S∘S) + 2 tr S^2] / n                          (exact)
  psi12   = [4 tr S^2 tr S + 2 nu4 tr(S∘S) tr S
             + 2 nu4 n tr(S∘S^2) + 4 n tr S^3] / n^2       (leading order)
  psi22   = [8 tr S^2 tr^2 S + 4 nu4 tr^2 S tr(S∘S)
             + 16 n tr S tr S^3 + 4 n tr^2(S^2)
             + 8 nu4 n tr(S∘S^2) tr S + 4 nu4 n^2 tr(S^2∘S^2)
             + 8 n^2 tr S^4] / n^3                         (leading order)

and for the mean-centered sample covariance B - ybar ybar' (divisor n),

  E T_1^0 = (1 - 1/n) tr S                                        (exact)
  E T_2^0 = E T_2 - (tr^2 S + 2 n tr S^2) / n^2          (leading order),

with the covariance matrix unchanged.  The exact/leading-order split is
verified in the test suite: exact values against exhaustive enumeration,
leading-order values against Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass

from .symmat import TraceSet


@dataclass(frozen=True)
class MomentSet:
    """Means and 2x2 covariance of (T_1, T_2) for one (model, n, nu4)."""

    e_t1: float
    e_t2: float
    psi11: float
    psi12: float
    psi22: float
    n: int
    nu4: float
    e_t1_centered: float | None = None
    e_t2_centered: float | None = None
    # cancellation scales: the absolute-term magnitude behind psi11/psi22,
    # used to tell a truly zero variance from rounding noise (e.g. a sign
    # innovation with a diagonal spectrum makes T1 constant, but the float
    # cancellation nu4 tr(S∘S) + 2 tr S^2 rarely lands on exactly 0.0)
    psi11_scale: float = 0.0
    psi22_scale: float = 0.0

    @property
    def det_psi(self) -> float:
        return self.psi11 * self.psi22 - self.psi12 * self.psi12

    def centered_view(self) -> "MomentSet":
        """The same covariance around the centered means (for whitening T^0)."""
        if self.e_t1_centered is None or self.e_t2_centered is None:
            raise ValueError("centered expectations were not computed for this MomentSet")
        return MomentSet(
            e_t1=self.e_t1_centered,
            e_t2=self.e_t2_centered,
            psi11=self.psi11,
            psi12=self.psi12,
            psi22=self.psi22,
            n=self.n,
            nu4=self.nu4,
            psi11_scale=self.psi11_scale,
            psi22_scale=self.psi22_scale,
        )

    def as_dict(self) -> dict:
        return {
            "e_t1": self.e_t1,
            "e_t2": self.e_t2,
            "psi11": self.psi11,
            "psi12": self.psi12,
            "psi22": self.psi22,
            "n": self.n,
            "nu4": self.nu4,
            "e_t1_centered": self.e_t1_centered,
            "e_t2_centered": self.e_t2_centered,
        }


def expected_values(traces: TraceSet, n: int, nu4: float) -> tuple[float, float]:
    """(E T_1, E T_2); both are exact at finite n."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    e_t1 = traces.tr1
    e_t2 = (nu4 * traces.trH11 + traces.tr1**2 + (n + 1) * traces.tr2) / n
    return e_t1, e_t2


def psi_matrix(traces: TraceSet, n: int, nu4: float) -> tuple[float, float, float]:
    """(psi11, psi12, psi22); psi11 is exact, the others leading order."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    psi11 = (nu4 * traces.trH11 + 2.0 * traces.tr2) / n
    psi12 = (
        4.0 * traces.tr2 * traces.tr1
        + 2.0 * nu4 * traces.trH11 * traces.tr1
        + 2.0 * nu4 * n * traces.trH12
        + 4.0 * n * traces.tr3
    ) / n**2
    psi22 = (
        8.0 * traces.tr2 * traces.tr1**2
        + 4.0 * nu4 * traces.tr1**2 * traces.trH11
        + 16.0 * n * traces.tr1 * traces.tr3
        + 4.0 * n * traces.tr2**2
        + 8.0 * nu4 * n * traces.trH12 * traces.tr1
        + 4.0 * nu4 * n**2 * traces.trH22
        + 8.0 * n**2 * traces.tr4
    ) / n**3
    return psi11, psi12, psi22


def centered_expected_values(traces: TraceSet, n: int, nu4: float) -> tuple[float, float]:
    """(E T_1^0, E T_2^0) for the divisor-n centered sample covariance.

    E T_1^0 = (1 - 1/n) tr S follows from E ybar'ybar = tr S / n and is
    exact; the enumeration engine confirms it.  E T_2^0 subtracts the
    leading-order shift (tr^2 S + 2 n tr S^2) / n^2.
    """
    if n < 2:
        raise ValueError("centered statistics need n >= 2")
    e_t1, e_t2 = expected_values(traces, n, nu4)
    e_t1_centered = traces.tr1 * (1.0 - 1.0 / n)
    e_t2_centered = e_t2 - (traces.tr1**2 + 2.0 * n * traces.tr2) / n**2
    return e_t1_centered, e_t2_centered


def moment_set(traces: TraceSet, n: int, nu4: float, centered: bool = False) -> MomentSet:
    e_t1, e_t2 = expected_values(traces, n, nu4)
    psi11, psi12, psi22 = psi_matrix(traces, n, nu4)
    scale11 = (abs(nu4) * traces.trH11 + 2.0 * traces.tr2) / n
    scale22 = (
        8.0 * traces.tr2 * traces.tr1**2
        + 4.0 * abs(nu4) * traces.tr1**2 * traces.trH11
        + 16.0 * n * abs(traces.tr1 * traces.tr3)
        + 4.0 * n * traces.tr2**2
        + 8.0 * abs(nu4) * n * abs(traces.trH12 * traces.tr1)
        + 4.0 * abs(nu4) * n**2 * traces.trH22
        + 8.0 * n**2 * traces.tr4
    ) / n**3
    e_t1c = e_t2c = None
    if centered:
        e_t1c, e_t2c = centered_expected_values(traces, n, nu4)
    return MomentSet(
        e_t1=e_t1,
        e_t2=e_t2,
        psi11=psi11,
        psi12=psi12,
        psi22=psi22,
        n=n,
        nu4=nu4,
        e_t1_centered=e_t1c,
        e_t2_centered=e_t2c,
        psi11_scale=scale11,
        psi22_scale=scale22,
    )


@dataclass(frozen=True)
class SpikeCaseResult:
    """Asymptotic variance of T_2 under a single spiked eigenvalue tau1.

    case 1: tau1 bounded; no spike contribution, no renormalization.
    case 2: tau1 ~ delta * p^{1/4}; the spike adds delta^4 c (8 + 4 nu4).
    case 3: tau1^4 / p -> infinity; the spike dominates and the statistic
            is rescaled by sqrt(n) / tau1^2.
    """

    case_id: int
    variance: float
    scaling: str


def single_spike_variance(
    case_id: int, c: float, nu4: float, delta: float = 0.0
) -> SpikeCaseResult:
    if c <= 0:
        raise ValueError("the dimension ratio c must be positive")
    base = 4.0 * c * (2.0 + 5.0 * c + 2.0 * c**2) + 4.0 * c * (1.0 + 2.0 * c + c**2) * nu4
    if case_id == 1:
        return SpikeCaseResult(case_id=1, variance=base, scaling="identity")
    if case_id == 2:
        return SpikeCaseResult(
            case_id=2,
            variance=base + delta**4 * c * (8.0 + 4.0 * nu4),
            scaling="identity",
        )
    if case_id == 3:
        return SpikeCaseResult(
            case_id=3, variance=8.0 + 4.0 * nu4, scaling="sqrt(n)/tau1^2"
        )
    raise ValueError(f"case_id must be 1, 2 or 3, got {case_id}")
