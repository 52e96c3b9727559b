"""Complex Dantzig selector, mu selection and coarse-to-fine grid refinement."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..sensing import AngleDopplerGrid, SensingProblem
from .socp import INFEASIBLE, MAX_ITER, OPTIMAL, solve_socp

log = logging.getLogger(__name__)

EXPLICIT = "explicit"
LOWER_BOUND_SCALED = "lower_bound_scaled"


@dataclass(frozen=True)
class DantzigConfig:
    """Dantzig selector settings.

    ``mu_policy`` is ``explicit`` (use ``mu``) or ``lower_bound_scaled``, which
    takes (1 + 1/t) times the noise lower bound computed from
    ``noise_variance`` (the effective compressed noise variance).
    """

    mu: float | None = None
    mu_policy: str = EXPLICIT
    t_scalar: float = 3.0
    noise_variance: float = 0.0
    feasibility_tol: float = 1e-7
    duality_gap_tol: float = 1e-7
    max_iterations: int = 200

    def __post_init__(self):
        if self.mu_policy not in (EXPLICIT, LOWER_BOUND_SCALED):
            raise ValueError(f"unknown mu policy {self.mu_policy!r}")
        if self.mu_policy == EXPLICIT and (self.mu is None or not self.mu > 0):
            raise ValueError("explicit mu must be positive")
        if not self.t_scalar > 0:
            raise ValueError("t_scalar must be positive")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")

    def resolve_mu(self, problem: SensingProblem) -> float:
        if self.mu_policy == EXPLICIT:
            return float(self.mu)
        lower, _ = mu_bounds(problem, self.noise_variance)
        return (1.0 + 1.0 / self.t_scalar) * lower


@dataclass
class RecoveryResult:
    estimate: np.ndarray
    objective: float
    residual_inf_norm: float
    iterations: int
    status: str
    mu: float = np.nan
    grid: AngleDopplerGrid | None = None

    @property
    def detected(self) -> bool:
        return bool(np.any(self.estimate != 0))


def effective_noise_variance(problem: SensingProblem, per_sample_variance: float) -> float:
    """Compressed noise variance: sigma^2 scaled by the mean row energy of Phi."""
    return per_sample_variance * problem.noise_row_energy()


def mu_bounds(problem: SensingProblem, noise_variance_effective: float):
    """(lower, upper) bracket for mu; lower may exceed upper at extreme noise."""
    if noise_variance_effective < 0:
        raise ValueError("noise variance must be nonnegative")
    n = problem.theta.shape[1]
    lower = np.sqrt(2.0 * np.log(n) * noise_variance_effective) * problem.sigma_max
    upper = float(np.max(np.abs(problem.theta.conj().T @ problem.observations)))
    return float(lower), upper


def _real_form(a: np.ndarray) -> np.ndarray:
    """2N x 2N real matrix acting on interleaved (Re, Im) pairs like the complex a."""
    n = a.shape[0]
    out = np.empty((2 * n, 2 * n))
    out[0::2, 0::2] = a.real
    out[0::2, 1::2] = -a.imag
    out[1::2, 0::2] = a.imag
    out[1::2, 1::2] = a.real
    return out


class DantzigKKT:
    """Structured G for the Dantzig cone program.

    Variables are x = (p, u) with p the interleaved real and imaginary parts of
    s (length 2N) and u the modulus epigraph variables (length N). The first N
    cones hold (u_n, p_n) and the last N hold (mu, c_n - (A p)_n).
    """

    def __init__(self, abar: np.ndarray):
        self.abar = abar
        self.n = abar.shape[0] // 2

    @property
    def shape(self):
        return (6 * self.n, 3 * self.n)

    def matvec(self, x):
        n = self.n
        p, u = x[:2 * n], x[2 * n:]
        out = np.zeros((2 * n, 3))
        out[:n, 0] = -u
        out[:n, 1:] = -p.reshape(n, 2)
        out[n:, 1:] = (self.abar @ p).reshape(n, 2)
        return out.ravel()

    def rmatvec(self, z):
        n = self.n
        z = z.reshape(2 * n, 3)
        gp = -z[:n, 1:].ravel() + self.abar.T @ z[n:, 1:].ravel()
        return np.concatenate([gp, -z[:n, 0]])

    def factor(self, scaling):
        n = self.n
        winv2 = scaling.inverse_squared()
        be, br = winv2[:n], winv2[n:]
        huu = be[:, 0, 0]
        hup = be[:, 0, 1:]                      # (n, 2)
        dblk = br[:, 1:, 1:]                    # (n, 2, 2)
        da = np.einsum("nij,njk->nik", dblk, self.abar.reshape(n, 2, -1)).reshape(2 * n, -1)
        hpp = self.abar.T @ da
        # eliminating u leaves inv(W^2 restricted to p); the closed form avoids
        # the cancellation in be_pp - hup hup^T / huu when W^-2 is large
        eta, w1 = scaling.eta[:n], scaling.w[:n, 1:]
        outer = w1[:, :, None] * w1[:, None, :]
        denom = 1.0 + 2.0 * np.sum(w1 * w1, axis=1)
        schur = (np.eye(2)[None] - 2.0 * outer / denom[:, None, None]) / (eta ** 2)[:, None, None]
        idx = np.arange(n)
        for i in range(2):
            for j in range(2):
                hpp[2 * idx + i, 2 * idx + j] += schur[:, i, j]
        cho = linalg.cho_factor(hpp, lower=True, check_finite=False)

        def solve(rhs):
            rp, ru = rhs[:2 * n], rhs[2 * n:]
            t = rp - (hup * (ru / huu)[:, None]).ravel()
            dp = linalg.cho_solve(cho, t, check_finite=False)
            du = (ru - np.sum(hup * dp.reshape(n, 2), axis=1)) / huu
            return np.concatenate([dp, du])

        return solve


def _objective(s):
    return float(np.sum(np.abs(s)))


def solve_dantzig(problem: SensingProblem, config: DantzigConfig) -> RecoveryResult:
    """min ||s||_1 subject to ||Theta^H (r - Theta s)||_inf <= mu, as a cone program.

    The problem is rescaled so that the largest column norm and the largest
    entry of Theta^H r are both one before the interior-point solve.
    """
    mu = config.resolve_mu(problem)
    if not mu > 0:
        raise ValueError("mu must be positive")
    theta, r = problem.theta, problem.observations
    n = theta.shape[1]
    gram = theta.conj().T @ theta
    corr = theta.conj().T @ r
    upper = float(np.max(np.abs(corr)))
    if mu >= upper:
        return RecoveryResult(np.zeros(n, dtype=complex), 0.0, upper, 0, OPTIMAL, mu, problem.grid)

    scale_a = problem.sigma_max ** 2
    kappa = upper / scale_a
    a = gram / scale_a
    c = corr / (scale_a * kappa)
    mu_n = mu / (scale_a * kappa)

    cost = np.concatenate([np.zeros(2 * n), np.ones(n)])
    h = np.zeros((2 * n, 3))
    h[n:, 0] = mu_n
    h[n:, 1] = c.real
    h[n:, 2] = c.imag
    kkt = DantzigKKT(_real_form(a))
    try:
        res = solve_socp(cost, None, h.ravel(), 3, config.feasibility_tol, config.duality_gap_tol,
                         config.max_iterations, kkt=kkt)
    except linalg.LinAlgError:
        log.warning("cone solver could not start; returning the zero vector")
        return RecoveryResult(np.zeros(n, dtype=complex), 0.0, upper, 0, INFEASIBLE, mu, problem.grid)
    p = res.x[:2 * n]
    s_hat = kappa * (p[0::2] + 1j * p[1::2])
    s_hat = _polish(theta, r, gram, corr, s_hat, mu)
    resid = float(np.max(np.abs(corr - gram @ s_hat)))
    status = res.status
    if status == OPTIMAL and resid > mu * (1 + config.feasibility_tol):
        status = MAX_ITER
    return RecoveryResult(s_hat, _objective(s_hat), resid, res.iterations, status, mu, problem.grid)


def _polish(theta, r, gram, corr, s_hat, mu):
    """Blend toward a least-squares point when the iterate slightly violates the mu bound.

    The correlated residual is affine in s and vanishes at any least-squares
    solution, so (1 - w) s_hat + w s_ls shrinks the violation by (1 - w).
    s_ls is the least-squares solution closest to s_hat, which keeps the
    change in the l1 objective proportional to the violation.
    """
    worst = float(np.max(np.abs(corr - gram @ s_hat)))
    if worst <= mu:
        return s_hat
    s_ls = s_hat + np.linalg.lstsq(theta, r - theta @ s_hat, rcond=None)[0]
    w = 1.0 - mu / worst * (1.0 - 1e-12)
    for _ in range(60):
        cand = (1.0 - w) * s_hat + w * s_ls
        if np.max(np.abs(corr - gram @ cand)) <= mu:
            return cand
        w = 1.0 - (1.0 - w) * 0.5
    return s_ls


def detect_support(estimate: np.ndarray, tau: float = 0.5) -> np.ndarray:
    """Indices with |s_n| >= tau * max |s|; empty for an all-zero estimate."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    mag = np.abs(estimate)
    peak = mag.max() if mag.size else 0.0
    if peak == 0:
        return np.array([], dtype=int)
    return np.flatnonzero(mag >= tau * peak)


def top_indices(estimate: np.ndarray, count: int) -> np.ndarray:
    """Indices of the ``count`` largest |s_n|, largest first (ties by index)."""
    order = np.lexsort((np.arange(len(estimate)), -np.abs(estimate)))
    return order[:count]


@dataclass
class RefinementResult:
    result: RecoveryResult | None
    grid: AngleDopplerGrid | None

    @property
    def detected(self) -> bool:
        return self.result is not None


def refined_grid(grid: AngleDopplerGrid, indices, refinement_factor: int,
                 angle_window: float, doppler_window: float = 0.0) -> AngleDopplerGrid:
    """Union of fine rectangular patches of half-width ``window`` around the given points."""
    if grid.angle_step is None:
        raise ValueError("refinement needs a uniform coarse grid")
    da = grid.angle_step / refinement_factor
    db = grid.doppler_step / refinement_factor if grid.doppler_step else None
    na = int(round(angle_window / da))
    nb = int(round(doppler_window / db)) if db else 0
    points = set()
    for i in indices:
        a0, b0 = grid.angles_rad[i], grid.dopplers_hz[i]
        for jb in range(-nb, nb + 1):
            for ja in range(-na, na + 1):
                # snap to the fine lattice so overlapping patches share points
                ka = int(round((a0 + ja * da) / da))
                kb = int(round((b0 + jb * db) / db)) if db else 0
                points.add((kb, ka))
    ordered = sorted(points)
    angles = np.array([ka * da for _, ka in ordered])
    dopplers = np.array([kb * db if db else grid.dopplers_hz[indices[0]] for kb, _ in ordered])
    return AngleDopplerGrid(angles, dopplers, da, db)


def refine_grid(build_problem, initial_grid: AngleDopplerGrid, estimate: np.ndarray,
                config: DantzigConfig, refinement_factor: int = 4, window: float | None = None,
                doppler_window: float | None = None, fraction: float = 0.1) -> RefinementResult:
    """Re-solve on a finer grid around the significant entries of a coarse estimate.

    ``build_problem(grid)`` must return a SensingProblem for that grid. The
    default window is one coarse step in each axis.
    """
    if int(refinement_factor) != refinement_factor or refinement_factor < 2:
        raise ValueError("refinement_factor must be an integer >= 2")
    mag = np.abs(np.asarray(estimate))
    if mag.size == 0 or mag.max() == 0:
        return RefinementResult(None, None)
    picks = np.flatnonzero(mag >= fraction * mag.max())
    if window is None:
        window = initial_grid.angle_step
    if doppler_window is None:
        doppler_window = initial_grid.doppler_step or 0.0
    grid = refined_grid(initial_grid, picks, int(refinement_factor), window, doppler_window)
    problem = build_problem(grid)
    return RefinementResult(solve_dantzig(problem, config), grid)
