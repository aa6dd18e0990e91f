"""Optimal bandwidth split for a fixed binary offloading vector.

With ``x`` fixed, the offloading cost separates into an allocation-free part
plus one ``c_j / alpha_j`` term per active link ``j``::

    F(alpha) = const + sum_{j in A} c_j / alpha_j,   sum_j alpha_j <= 1

Every term decreases in its own ``alpha_j``, so the budget binds at the
optimum and the inequality may be replaced by equality. Stationarity of the
Lagrangian gives ``c_j / alpha_j**2 = mu`` for all active ``j``, hence::

    alpha_j* = sqrt(c_j) / sum_i sqrt(c_i),   F* = const + (sum_i sqrt(c_i))**2

(the same bound follows from Cauchy-Schwarz). ``solve_closed_form`` is the
production path; ``solve_numeric_oracle`` is an independent projected
gradient solver used for verification only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .system import ChannelState, OffloadDecision, SystemParams

__all__ = [
    "AllocProblem",
    "DegenerateProblemError",
    "OracleConvergenceError",
    "build_problem",
    "solve_closed_form",
    "solve_numeric_oracle",
    "project_simplex",
    "allocate",
    "FrameAllocator",
    "INFEASIBLE_COST",
]

# sentinel for candidates that cannot be evaluated
INFEASIBLE_COST = math.inf


class DegenerateProblemError(ValueError):
    pass


class OracleConvergenceError(RuntimeError):
    def __init__(self, message: str, trace: list[float]):
        super().__init__(f"{message} (last costs: {trace[-5:]})")
        self.trace = trace


@dataclass(frozen=True)
class AllocProblem:
    """``const + sum(coeffs / alpha[active])`` over a subset of the 2N links.

    ``active`` holds 0-based link indices into the length-``2N`` alpha vector.
    """

    n_st: int
    active: np.ndarray
    coeffs: np.ndarray
    const_term: float

    def __post_init__(self):
        active = np.asarray(self.active, dtype=np.intp)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if active.shape != coeffs.shape:
            raise ValueError("active and coeffs must have the same shape")
        if coeffs.size and not (coeffs.min() > 0 and math.isfinite(coeffs.sum())):
            raise ValueError(f"coefficients must be positive and finite, got {coeffs}")
        if self.const_term < 0:
            raise ValueError("const_term must be nonnegative")
        object.__setattr__(self, "active", active)
        object.__setattr__(self, "coeffs", coeffs)

    def cost(self, alpha_active) -> float:
        """Objective at an allocation given over the active links only."""
        alpha_active = np.asarray(alpha_active, dtype=float)
        if np.any(alpha_active <= 0):
            return INFEASIBLE_COST
        return float(self.const_term + np.sum(self.coeffs / alpha_active))

    def expand(self, alpha_active) -> np.ndarray:
        full = np.zeros(2 * self.n_st)
        full[self.active] = alpha_active
        return full


def link_coefficients(params: SystemParams, channel: ChannelState) -> tuple[np.ndarray, float]:
    """Per-link inverse-share cost coefficients: (1st hop per ST, shared 2nd hop)."""
    lam = params.lam
    p_st = params.p_st_array
    spectral_up = np.log2(1.0 + p_st * channel.h_st / params.noise)
    spectral_fwd = math.log2(1.0 + params.p_sat * channel.h_tc / params.noise)
    scale = params.task_bits / params.bandwidth_total
    c_up = (lam + (1.0 - lam) * p_st) * scale / spectral_up
    c_fwd = (lam + (1.0 - lam) * params.p_sat) * scale / spectral_fwd
    return c_up, c_fwd


class FrameAllocator:
    """Link coefficients of one channel state, reused across many location vectors.

    Every algorithm evaluating several candidates on the same frame goes
    through this class, so per-candidate work is the closed form only.
    """

    def __init__(self, params: SystemParams, channel: ChannelState):
        self.params = params
        self.channel = channel
        self.n = params.n_st
        self.c_up, self.c_fwd = link_coefficients(params, channel)
        self._root_up = np.sqrt(self.c_up)
        self._root_up_sum = float(self._root_up.sum())
        self._root_fwd = math.sqrt(self.c_fwd)
        lam = params.lam
        self._sat_unit = (lam + (1.0 - lam) * params.p_compute_sat) * params.sat_compute_time
        self._tc_unit = lam * params.tc_compute_time

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise ValueError(f"x must have length {self.n}, got shape {x.shape}")
        return x

    def problem(self, x) -> AllocProblem:
        x = self._check(x)
        if not np.all((x == 0) | (x == 1)):
            raise ValueError(f"x must be binary, got {x}")
        n = self.n
        to_tc = np.flatnonzero(x == 0)
        n_tc = to_tc.size
        active = np.concatenate((np.arange(n), to_tc + n))
        coeffs = np.concatenate((self.c_up, np.full(n_tc, self.c_fwd)))
        const = (n - n_tc) * self._sat_unit + n_tc * self._tc_unit
        return AllocProblem(n, active, coeffs, const)

    def solve(self, x) -> OffloadDecision:
        """Closed-form optimum for ``x``; equals ``solve_closed_form(self.problem(x))``."""
        x = self._check(x).astype(np.int8, copy=False)
        n = self.n
        n_tc = n - int(x.sum())
        total = self._root_up_sum + n_tc * self._root_fwd
        alpha = np.concatenate((self._root_up, self._root_fwd * (1 - x))) / total
        cost = (n - n_tc) * self._sat_unit + n_tc * self._tc_unit + total * total
        return OffloadDecision._trusted(x, alpha, cost)


def build_problem(params: SystemParams, channel: ChannelState, x) -> AllocProblem:
    return FrameAllocator(params, channel).problem(x)


def solve_closed_form(prob: AllocProblem) -> tuple[np.ndarray, float]:
    """Return ``(alpha, cost)`` with ``alpha`` of length ``2N``."""
    if prob.coeffs.size == 0:
        raise DegenerateProblemError("no active links to allocate")
    roots = np.sqrt(prob.coeffs)
    total = roots.sum()
    alpha = np.zeros(2 * prob.n_st)
    alpha[prob.active] = roots / total
    return alpha, prob.const_term + total * total


def project_simplex(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{w >= 0, sum(w) = radius}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _kkt_spread(c: np.ndarray, alpha: np.ndarray) -> float:
    ratio = c / alpha**2
    return float((ratio.max() - ratio.min()) / ratio.mean())


def solve_numeric_oracle(prob: AllocProblem, tol: float = 1e-12,
                         max_iter: int = 100_000, floor: float = 1e-12
                         ) -> tuple[np.ndarray, float]:
    """Projected gradient descent with Armijo backtracking on the budget simplex.

    Iterates stay in ``{alpha >= floor, sum(alpha) = 1}``. Stops once the
    relative cost change of an accepted step falls below ``tol`` and the
    projected-gradient step is negligible.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = prob.coeffs.size
    if m == 0:
        raise DegenerateProblemError("no active links to allocate")
    if m == 1:
        alpha = np.ones(1)
        return prob.expand(alpha), prob.cost(alpha)

    c = prob.coeffs
    radius = 1.0 - m * floor

    def project(v):
        return floor + project_simplex(v - floor, radius)

    def f(a):
        return float(np.sum(c / a))

    alpha = np.full(m, 1.0 / m)
    cost = f(alpha)
    grad = -c / alpha**2
    step = 1.0 / float(np.max(2 * c / alpha**3))
    trace = [cost]
    for _ in range(max_iter):
        while True:
            cand = project(alpha - step * grad)
            cand_cost = f(cand)
            # Armijo condition along the projection arc
            if cand_cost <= cost + 1e-4 * float(grad @ (cand - alpha)):
                break
            step *= 0.5
            if step < 1e-300 or cand_cost >= cost and step * np.max(np.abs(grad)) < 1e-15:
                # no representable descent left; accept only a stationary point
                if _kkt_spread(c, alpha) < 1e-6:
                    return prob.expand(alpha), prob.const_term + cost
                raise OracleConvergenceError("line search collapsed", trace)
        cand_grad = -c / cand**2
        # Barzilai-Borwein trial step for the next iteration
        s = cand - alpha
        y = cand_grad - grad
        sy = float(s @ y)
        rel_change = (cost - cand_cost) / max(cost, 1e-300)
        alpha, cost, grad = cand, cand_cost, cand_grad
        trace.append(cost)
        if rel_change < tol and float(np.max(np.abs(s))) < 1e-9:
            return prob.expand(alpha), prob.const_term + cost
        step = float(s @ s) / sy if sy > 0 else step * 2.0
    raise OracleConvergenceError(f"no convergence after {max_iter} iterations", trace)


def allocate(params: SystemParams, channel: ChannelState, x) -> OffloadDecision:
    """Optimal allocation and cost for location vector ``x``."""
    fa = FrameAllocator(params, channel)
    fa.problem(x)  # shape and binary checks
    return fa.solve(x)
