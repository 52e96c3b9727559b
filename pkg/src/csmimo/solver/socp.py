"""Primal-dual interior-point method for second-order cone programs.

Solves

    minimize    c^T x
    subject to  G x + s = h,   s in K

where K is a product of second-order cones that all share one dimension q,
``{(s0, s1): s0 >= ||s1||}``. The dual is ``maximize -h^T z`` subject to
``G^T z + c = 0, z in K``. Steps use Nesterov-Todd scaling and a Mehrotra
predictor-corrector.

The reduced Newton system ``G^T W^-2 G dx = rhs`` is factored by a KKT
object so that callers with structured G can supply a fast factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import logging

import numpy as np
from scipy import linalg

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"

STEP_FRACTION = 0.99
REFINEMENT_STEPS = 2


@dataclass
class SocpResult:
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    status: str
    iterations: int
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float


class DenseKKT:
    """Dense operator G with a Cholesky factorization of G^T W^-2 G."""

    def __init__(self, G):
        self.G = np.asarray(G, dtype=float)

    @property
    def shape(self):
        return self.G.shape

    def matvec(self, x):
        return self.G @ x

    def rmatvec(self, z):
        return self.G.T @ z

    def factor(self, scaling):
        """Return a solver for (G^T W^-2 G) dx = rhs."""
        winv2 = scaling.inverse_squared()
        k, q, _ = winv2.shape
        gb = self.G.reshape(k, q, -1)
        scaled = np.einsum("kij,kjn->kin", winv2, gb).reshape(k * q, -1)
        h = self.G.T @ scaled
        cho = linalg.cho_factor(h, lower=True, check_finite=False)
        return lambda rhs: linalg.cho_solve(cho, rhs, check_finite=False)


# Jordan-algebra helpers on arrays of shape (K, q)

def jdot(x, y):
    """x^T J y per cone with J = diag(1, -1, ..., -1)."""
    return x[:, 0] * y[:, 0] - np.sum(x[:, 1:] * y[:, 1:], axis=1)


def jnorm(x):
    """sqrt(x0^2 - ||x1||^2), computed as a product to limit cancellation."""
    n1 = np.linalg.norm(x[:, 1:], axis=1)
    return np.sqrt(np.maximum((x[:, 0] - n1) * (x[:, 0] + n1), 0.0))


def jprod(x, y):
    """Arrow product x o y = (x^T y, x0 y1 + y0 x1)."""
    out = np.empty_like(x)
    out[:, 0] = np.sum(x * y, axis=1)
    out[:, 1:] = x[:, :1] * y[:, 1:] + y[:, :1] * x[:, 1:]
    return out


def jdiv(lam, r):
    """Solve lam o x = r for x."""
    x = np.empty_like(r)
    det = lam[:, 0] ** 2 - np.sum(lam[:, 1:] ** 2, axis=1)
    x[:, 0] = (lam[:, 0] * r[:, 0] - np.sum(lam[:, 1:] * r[:, 1:], axis=1)) / det
    x[:, 1:] = (r[:, 1:] - x[:, :1] * lam[:, 1:]) / lam[:, :1]
    return x


@dataclass
class NTScaling:
    """Nesterov-Todd scaling W = eta * Wbar per cone; W z = W^-1 s = lambda."""

    eta: np.ndarray   # (K,)
    w: np.ndarray     # (K, q), hyperbolic unit vector

    @classmethod
    def identity(cls, k, q):
        w = np.zeros((k, q))
        w[:, 0] = 1.0
        return cls(np.ones(k), w)

    @classmethod
    def from_pair(cls, s, z):
        ns, nz = jnorm(s), jnorm(z)
        sb, zb = s / ns[:, None], z / nz[:, None]
        gamma = np.sqrt((1.0 + np.sum(sb * zb, axis=1)) / 2.0)
        jz = zb.copy()
        jz[:, 1:] *= -1
        w = (sb + jz) / (2.0 * gamma[:, None])
        return cls(np.sqrt(ns / nz), w)

    def update(self, st, zt):
        """NT scaling of (W st, W^-1 zt) and its lambda, from the scaled pair (st, zt).

        J-norms are taken in the scaled space, where both points sit near the
        central path, instead of on the raw iterates.
        """
        ns, nz = jnorm(st), jnorm(zt)
        sb = self._apply(st / ns[:, None], inverse=False) / self.eta[:, None]
        zb = self._apply(zt / nz[:, None], inverse=True) * self.eta[:, None]
        gamma = np.sqrt((1.0 + np.sum(st * zt, axis=1) / (ns * nz)) / 2.0)
        inner = NTScaling.from_pair(st, zt)
        w = self._apply(inner.w, inverse=False) / self.eta[:, None]
        w /= jnorm(w)[:, None]
        lam = np.empty_like(st)
        lam[:, 0] = gamma
        lam[:, 1:] = ((gamma + zb[:, 0])[:, None] * sb[:, 1:] + (gamma + sb[:, 0])[:, None] * zb[:, 1:]) \
            / (sb[:, 0] + zb[:, 0] + 2.0 * gamma)[:, None]
        lam *= np.sqrt(ns * nz)[:, None]
        return NTScaling(self.eta * inner.eta, w), lam

    def _apply(self, v, inverse):
        w0, w1 = self.w[:, :1], self.w[:, 1:]
        v0, v1 = v[:, :1], v[:, 1:]
        sign = -1.0 if inverse else 1.0
        d = np.sum(w1 * v1, axis=1, keepdims=True)
        out = np.empty_like(v)
        out[:, :1] = w0 * v0 + sign * d
        out[:, 1:] = v1 + sign * v0 * w1 + d / (1.0 + w0) * w1
        scale = 1.0 / self.eta if inverse else self.eta
        return out * scale[:, None]

    def apply(self, v):
        return self._apply(v, inverse=False)

    def apply_inverse(self, v):
        return self._apply(v, inverse=True)

    def inverse_squared(self):
        """W^-2 per cone, (1/eta^2) (2 (Jw)(Jw)^T - J), shape (K, q, q)."""
        jw = self.w.copy()
        jw[:, 1:] *= -1
        q = self.w.shape[1]
        jmat = np.diag(np.r_[1.0, -np.ones(q - 1)])
        m = 2.0 * jw[:, :, None] * jw[:, None, :] - jmat[None]
        return m / (self.eta ** 2)[:, None, None]


def max_step(x, d):
    """Largest alpha >= 0 keeping x + alpha d in every cone (inf if unbounded)."""
    a = d[:, 0] ** 2 - np.sum(d[:, 1:] ** 2, axis=1)
    b = 2.0 * (x[:, 0] * d[:, 0] - np.sum(x[:, 1:] * d[:, 1:], axis=1))
    c = jnorm(x) ** 2
    alpha = np.full(len(x), np.inf)
    tiny = 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = np.maximum(b * b - 4 * a * c, 0.0)
        sq = np.sqrt(disc)
        qv = -0.5 * (b + np.where(b >= 0, sq, -sq))
        r1 = np.where(np.abs(a) > tiny, qv / a, np.inf)
        r2 = np.where(np.abs(qv) > tiny, c / qv, np.inf)
        roots = np.stack([r1, r2])
        roots = np.where(roots > 0, roots, np.inf)
        smallest = roots.min(axis=0)
        # a < 0: the line leaves the cone at the single positive root
        alpha = np.where(a < 0, smallest, alpha)
        # a >= 0 with d0 < 0: the negated direction is in the cone; exit at the first root
        alpha = np.where((a >= 0) & (d[:, 0] < 0), smallest, alpha)
        # the root must not lie on the negative half (x0 + alpha d0 < 0)
        lin = np.where(d[:, 0] < 0, -x[:, 0] / d[:, 0], np.inf)
    return float(np.min(np.minimum(alpha, lin)))


def _interior(v):
    return bool(np.all(v[:, 0] - np.linalg.norm(v[:, 1:], axis=1) > 0))


def _shift_interior(v):
    """Push v into the cone interior by adding a multiple of e if needed."""
    slack = np.linalg.norm(v[:, 1:], axis=1) - v[:, 0]
    a = float(np.max(slack))
    if a >= -1e-8 * max(1.0, float(np.max(np.abs(v)))):
        v = v.copy()
        v[:, 0] += 1.0 + a
    return v


def solve_socp(c, G, h, cone_dim: int, feasibility_tol: float = 1e-7, gap_tol: float = 1e-7,
               max_iterations: int = 200, kkt=None) -> SocpResult:
    """Solve the cone program with all cones of dimension ``cone_dim``."""
    c = np.asarray(c, dtype=float)
    h = np.asarray(h, dtype=float)
    kkt = DenseKKT(G) if kkt is None else kkt
    m = h.size
    if m % cone_dim:
        raise ValueError("row count is not a multiple of the cone dimension")
    k = m // cone_dim
    hnorm = max(1.0, float(np.linalg.norm(h)))
    cnorm = max(1.0, float(np.linalg.norm(c)))

    # least-squares start with identity scaling, then shift into the cone interior
    try:
        solve = kkt.factor(NTScaling.identity(k, cone_dim))
    except (linalg.LinAlgError, ValueError) as exc:
        raise linalg.LinAlgError("G^T G is singular; cone program has no interior start") from exc
    x = solve(kkt.rmatvec(h))
    s = _shift_interior((h - kkt.matvec(x)).reshape(k, cone_dim))
    z = _shift_interior((-kkt.matvec(solve(c))).reshape(k, cone_dim))

    status = MAX_ITER
    it = 0
    pres = dres = gap = np.inf
    pcost = dcost = np.nan
    scaling = NTScaling.from_pair(s, z)
    lam = scaling.apply(z)
    e = np.zeros((k, cone_dim))
    e[:, 0] = 1.0
    for it in range(max_iterations + 1):
        sf, zf = s.ravel(), z.ravel()
        rp = kkt.matvec(x) + sf - h
        rd = kkt.rmatvec(zf) + c
        gap = float(np.sum(lam * lam))
        pcost = float(c @ x)
        dcost = float(-h @ zf)
        pres = float(np.linalg.norm(rp)) / hnorm
        dres = float(np.linalg.norm(rd)) / cnorm
        if pcost < 0:
            relgap = gap / -pcost
        elif dcost > 0:
            relgap = gap / dcost
        else:
            relgap = np.inf
        if pres <= feasibility_tol and dres <= feasibility_tol and (gap <= gap_tol or relgap <= gap_tol):
            status = OPTIMAL
            break
        log.debug("it %d pres %.2e dres %.2e gap %.2e relgap %.2e", it, pres, dres, gap, relgap)
        if it == max_iterations:
            break

        try:
            solve = kkt.factor(scaling)
        except (linalg.LinAlgError, FloatingPointError, ValueError):
            status = INFEASIBLE
            break
        rpk = rp.reshape(k, cone_dim)

        def hmul(v):
            gv = kkt.matvec(v).reshape(k, cone_dim)
            return kkt.rmatvec(scaling.apply_inverse(scaling.apply_inverse(gv)).ravel())

        def newton(rc):
            # directions in scaled space: ds~ = W^-1 ds, dz~ = W dz
            q = jdiv(lam, rc)
            rhs = -rd - kkt.rmatvec(scaling.apply_inverse(scaling.apply_inverse(rpk) + q).ravel())
            dx = solve(rhs)
            for _ in range(REFINEMENT_STEPS):
                dx = dx + solve(rhs - hmul(dx))
            gdx = kkt.matvec(dx).reshape(k, cone_dim)
            dzs = scaling.apply_inverse(gdx + rpk) + q
            return dx, q - dzs, dzs, -(gdx + rpk)

        mu = gap / k
        lamsq = jprod(lam, lam)
        dxa, dsa, dza, _ = newton(-lamsq)
        alpha_aff = min(1.0, max_step(lam, dsa), max_step(lam, dza))
        sigma = max(0.0, min(1.0, 1.0 - alpha_aff)) ** 3
        dx, dss, dzs, ds = newton(-lamsq - jprod(dsa, dza) + sigma * mu * e)
        if not (np.all(np.isfinite(dx)) and np.all(np.isfinite(dss)) and np.all(np.isfinite(dzs))):
            status = INFEASIBLE
            break
        alpha = min(1.0, STEP_FRACTION * min(max_step(lam, dss), max_step(lam, dzs)))
        # rounding in the step-length roots can land a cone on its boundary; back off
        for _ in range(30):
            st, zt = lam + alpha * dss, lam + alpha * dzs
            if _interior(st) and _interior(zt):
                break
            alpha *= 0.5
        else:
            status = INFEASIBLE
            break
        x = x + alpha * dx
        # x, s, z move additively so that the primal residual contracts exactly;
        # the scaling and lambda are carried forward in scaled coordinates
        s = s + alpha * ds
        z = z + alpha * scaling.apply_inverse(dzs)
        scaling, lam = scaling.update(st, zt)

    return SocpResult(x, s.ravel(), z.ravel(), status, it, pcost, dcost, gap, pres, dres)
