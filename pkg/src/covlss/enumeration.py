"""Exhaustive-expectation engine over finite-support innovations.

For a statistic s(x_1, ..., x_m) of i.i.d. finite-support variables the
expectation is the weighted sum over all |support|^m assignments, summed
with compensated (exact) accumulation.  Scale is deliberately tiny: the
point is bit-level verification of the quadratic-form moment identities
and of the exact finite-n moment formulas, not throughput.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .innovations import InnovationDist, NotEnumerableError
from .moments import centered_expected_values, expected_values, psi_matrix
from .population import PopulationModel
from .symmat import (
    SymMatrix,
    trace_hadamard,
    trace_power,
    trace_product,
    triple_product_terms,
)

STATE_GUARD = 10**8
MAX_IDENTITY_DIM = 4


class EnumerationGuardError(RuntimeError):
    """The assignment space is too large to enumerate."""


def falling_factorial(n: int, k: int) -> int:
    """n (n-1) ... (n-k+1), the number of ordered k-tuples without repeats."""
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    out = 1
    for i in range(k):
        out *= n - i
    return out


@dataclass(frozen=True, eq=False)
class EnumerationTask:
    """A pure statistic of ``num_vars`` i.i.d. finite-support variables."""

    num_vars: int
    dist: InnovationDist
    statistic: Callable[[np.ndarray], float]

    def __post_init__(self) -> None:
        if not self.dist.enumerable:
            raise NotEnumerableError(f"{self.dist.selector} has continuous support")
        states = len(self.dist.support) ** self.num_vars
        if states > STATE_GUARD:
            raise EnumerationGuardError(
                f"{states} assignments exceed the enumeration guard of {STATE_GUARD}"
            )


def _assignments(task: EnumerationTask):
    support = np.asarray(task.dist.support, dtype=float)
    probs = np.asarray(task.dist.probabilities, dtype=float)
    for idx in itertools.product(range(len(support)), repeat=task.num_vars):
        x = support[list(idx)]
        weight = float(np.prod(probs[list(idx)]))
        yield weight, x


def exact_expectation(task: EnumerationTask) -> float:
    """E s(x) as an exactly-accumulated weighted sum over all assignments."""
    return math.fsum(w * task.statistic(x) for w, x in _assignments(task))


def exact_variance(task: EnumerationTask) -> float:
    """Var s(x), two-pass so the centered second moment does not cancel."""
    mean = exact_expectation(task)
    return math.fsum(w * (task.statistic(x) - mean) ** 2 for w, x in _assignments(task))


@dataclass(frozen=True)
class IdentityReport:
    """Enumerated LHS vs closed-form RHS of one moment identity."""

    identity: str
    dims: int
    dist: str
    lhs: float
    rhs: float

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)

    def as_dict(self) -> dict:
        return {
            "lemma": self.identity,
            "dims": self.dims,
            "dist": self.dist,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_err": self.abs_err,
        }


def _check_identity_dims(*mats: SymMatrix) -> int:
    dims = {m.dim for m in mats}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    (dim,) = dims
    if dim > MAX_IDENTITY_DIM:
        raise EnumerationGuardError(
            f"identity checks are capped at dimension {MAX_IDENTITY_DIM}, got {dim}"
        )
    return dim


def verify_quadratic_covariance(
    a: SymMatrix, b: SymMatrix, dist: InnovationDist
) -> IdentityReport:
    """E[(x'Ax - trA)(x'Bx - trB)] == nu4 tr(A∘B) + tr(AB') + tr(AB).

    The fourth-moment coefficient multiplies tr(A∘B): the mixed diagonal
    product, symmetric in the two operands, is what enumeration confirms.
    """
    dim = _check_identity_dims(a, b)
    tr_a, tr_b = trace_power(a, 1), trace_power(b, 1)
    aa, ba = a.array, b.array

    def statistic(x: np.ndarray) -> float:
        return (x @ aa @ x - tr_a) * (x @ ba @ x - tr_b)

    lhs = exact_expectation(EnumerationTask(dim, dist, statistic))
    # tr(AB') == tr(AB) for symmetric operands
    rhs = dist.profile.nu4 * trace_hadamard(a, b) + 2.0 * trace_product(a, b)
    return IdentityReport("quadratic_covariance", dim, dist.selector, lhs, rhs)


def verify_fourth_moment(a: SymMatrix, dist: InnovationDist) -> IdentityReport:
    """E sum_i (A x)_i^4 == 3 tr(A'A ∘ A'A) + nu4 tr((A'∘A')(A∘A))."""
    dim = _check_identity_dims(a)
    aa = a.array

    def statistic(x: np.ndarray) -> float:
        return float(np.sum((aa @ x) ** 4))

    lhs = exact_expectation(EnumerationTask(dim, dist, statistic))
    a2 = aa @ aa
    rhs = 3.0 * float(np.sum(np.diagonal(a2) ** 2)) + dist.profile.nu4 * float(
        np.sum(aa**4)
    )
    return IdentityReport("fourth_moment", dim, dist.selector, lhs, rhs)


def verify_triple_product(
    t: SymMatrix, w: SymMatrix, dist: InnovationDist
) -> IdentityReport:
    """E[(x'Tx)^2 (x'Wx)] against its eleven-term closed form.

    The closed form mixes plain traces, Hadamard traces, the diagonal
    interaction scalars of :func:`triple_product_terms`, and the moments
    mu3, mu4, mu6 of the innovation law.
    """
    dim = _check_identity_dims(t, w)
    ta, wa = t.array, w.array

    def statistic(x: np.ndarray) -> float:
        qt = x @ ta @ x
        return qt * qt * (x @ wa @ x)

    lhs = exact_expectation(EnumerationTask(dim, dist, statistic))

    prof = dist.profile
    nu4 = prof.nu4
    aux = triple_product_terms(t, w)
    tr_t = trace_power(t, 1)
    tr_t2 = trace_power(t, 2)
    tr_w = trace_power(w, 1)
    tr_tw = trace_product(t, w)
    tr_ttw = float(np.sum((ta @ ta) * wa))
    # The diagonal-interaction terms carry pure fourth-cumulant coefficients
    # (4 nu4 and 8 nu4): for Gaussian innovations every basis-dependent term
    # must drop out, leaving only the Wick pairings on the first line.
    rhs = (
        tr_t**2 * tr_w
        + 2.0 * tr_t2 * tr_w
        + 4.0 * tr_t * tr_tw
        + 8.0 * tr_ttw
        + nu4 * (2.0 * trace_hadamard(t, w) * tr_t + trace_hadamard(t, t) * tr_w)
        + 4.0 * nu4 * aux.tr_t_dw_t
        + 8.0 * nu4 * aux.tr_w_dt_t
        + prof.mu3**2 * (4.0 * aux.dt_t_dw + 2.0 * aux.dt_w_dt + 4.0 * aux.ones_ttw)
        + (prof.mu6 - 15.0 * prof.mu4 - 10.0 * prof.mu3**2 + 30.0) * aux.tr_ttw_diag
    )
    return IdentityReport("triple_product", dim, dist.selector, lhs, rhs)


@dataclass(frozen=True)
class FiniteMomentReport:
    """Enumerated vs closed-form moments of (T_1, T_2) at tiny (p, n).

    e_t1, var_t1 and e_t2 are exact identities and must agree to
    floating-point accuracy; the centered rows carry the enumerated truth
    next to the divisor-n formula values so the residual of the
    leading-order E T_2^0 shift is visible rather than hidden.
    """

    p: int
    n: int
    dist: str
    e_t1: tuple[float, float]
    var_t1: tuple[float, float]
    e_t2: tuple[float, float]
    e_t1_centered: tuple[float, float]
    e_t2_centered: tuple[float, float]

    @property
    def exact_abs_err(self) -> float:
        return max(
            abs(self.e_t1[0] - self.e_t1[1]),
            abs(self.var_t1[0] - self.var_t1[1]),
            abs(self.e_t2[0] - self.e_t2[1]),
            abs(self.e_t1_centered[0] - self.e_t1_centered[1]),
        )

    def as_dict(self) -> dict:
        return {
            "lemma": "finite_n_moments",
            "dims": [self.p, self.n],
            "dist": self.dist,
            "e_t1": list(self.e_t1),
            "var_t1": list(self.var_t1),
            "e_t2": list(self.e_t2),
            "e_t1_centered": list(self.e_t1_centered),
            "e_t2_centered": list(self.e_t2_centered),
            "abs_err": self.exact_abs_err,
        }


def verify_finite_n_moments(
    model: PopulationModel, n: int, dist: InnovationDist
) -> FiniteMomentReport:
    """Compare enumerated E T_1, Var T_1, E T_2 (exact) and the centered
    means against the closed-form module, building B the direct p x p way."""
    p = model.p
    if p > 4 or n > 4:
        raise EnumerationGuardError("finite-n enumeration is capped at p, n <= 4")
    half = model.sigma_half.array

    def traces(x: np.ndarray) -> tuple[float, float, float, float]:
        y = half @ x.reshape(p, n)
        b = (y @ y.T) / n
        t1 = float(np.trace(b))
        t2 = float(np.sum(b * b))
        ybar = y.mean(axis=1)
        b0 = b - np.outer(ybar, ybar)
        return t1, t2, float(np.trace(b0)), float(np.sum(b0 * b0))

    num_vars = p * n
    e_t1 = exact_expectation(EnumerationTask(num_vars, dist, lambda x: traces(x)[0]))
    var_t1 = exact_variance(EnumerationTask(num_vars, dist, lambda x: traces(x)[0]))
    e_t2 = exact_expectation(EnumerationTask(num_vars, dist, lambda x: traces(x)[1]))
    e_t1c = exact_expectation(EnumerationTask(num_vars, dist, lambda x: traces(x)[2]))
    e_t2c = exact_expectation(EnumerationTask(num_vars, dist, lambda x: traces(x)[3]))

    nu4 = dist.profile.nu4
    f_e_t1, f_e_t2 = expected_values(model.traces, n, nu4)
    f_var_t1 = psi_matrix(model.traces, n, nu4)[0]
    f_e_t1c, f_e_t2c = centered_expected_values(model.traces, n, nu4)
    return FiniteMomentReport(
        p=p,
        n=n,
        dist=dist.selector,
        e_t1=(e_t1, f_e_t1),
        var_t1=(var_t1, f_var_t1),
        e_t2=(e_t2, f_e_t2),
        e_t1_centered=(e_t1c, f_e_t1c),
        e_t2_centered=(e_t2c, f_e_t2c),
    )
