"""Dense primal-dual interior-point solver for single-block SDPs.

The problem ``maximize c.z s.t. G0 + sum_k z_k G_k >= 0`` is the dual of
``minimize <G0, X> s.t. <G_k, X> = -c_k, X >= 0``.  We run an infeasible
path-following method with the HKM search direction and Mehrotra's
predictor-corrector step.  The Schur complement
``M_ij = tr(G_i X G_j S^-1)`` is formed densely, exploiting that every
``G_k`` has few nonzeros.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .moments import SdpProblem

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    def __init__(self, message: str, result: "SdpResult | None" = None):
        super().__init__(message)
        self.result = result


@dataclass
class SdpResult:
    upper: float          # <G0, X> + offset: bounds the maximum from above
    lower: float          # c.z + offset: attained by the dual-feasible moments
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int
    converged: bool
    status: str
    z: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    seconds: float = 0.0

    @property
    def value(self) -> float:
        return self.upper

    @property
    def relative_gap(self) -> float:
        return self.gap / (1 + abs(self.upper) + abs(self.lower))


def _max_step(M: np.ndarray, dM: np.ndarray) -> float:
    """Largest ``a`` with ``M + a dM >= 0`` (``M`` positive definite)."""
    L = np.linalg.cholesky(M)
    Li = scipy.linalg.solve_triangular(L, np.eye(len(M)), lower=True)
    lam = np.linalg.eigvalsh(Li @ dM @ Li.T)[0]
    return np.inf if lam >= 0 else -1.0 / lam


class _Operator:
    """The maps ``z -> sum z_k G_k`` and ``X -> (<G_k, X>)_k`` plus Schur complements."""

    def __init__(self, G: sp.csr_matrix, n: int):
        self.n = n
        self.G = G.tocsr()
        self.GT = self.G.T.tocsr()
        self.rows = []
        for k in range(G.shape[0]):
            lo, hi = G.indptr[k], G.indptr[k + 1]
            idx = G.indices[lo:hi]
            self.rows.append((idx // n, idx % n, G.data[lo:hi]))

    def adjoint(self, z: np.ndarray) -> np.ndarray:
        return (self.GT @ z).reshape(self.n, self.n)

    def forward(self, X: np.ndarray) -> np.ndarray:
        return self.G @ X.reshape(-1)

    def schur(self, X: np.ndarray, Sinv: np.ndarray) -> np.ndarray:
        m, n = len(self.rows), self.n
        M = np.empty((m, m))
        chunk = max(1, min(m, 4_000_000 // (n * n)))
        for start in range(0, m, chunk):
            stop = min(m, start + chunk)
            W = np.empty((stop - start, n * n))
            for r, k in enumerate(range(start, stop)):
                p, q, v = self.rows[k]
                W[r] = ((X[:, p] * v) @ Sinv[q, :]).reshape(-1)
            M[:, start:stop] = (self.G @ W.T)
        return (M + M.T) / 2


def solve_sdp(problem: SdpProblem, tol: float = 1e-7, max_iter: int = 200,
              step_fraction: float = 0.95, verbose: bool = False,
              time_limit: float | None = None) -> SdpResult:
    """Maximize ``c.z + offset`` subject to ``G0 + sum z_k G_k >= 0``.

    Stops with status ``"time limit"`` once ``time_limit`` seconds have passed.
    """
    t0 = time.perf_counter()
    n, m = problem.size, problem.n_variables
    C = (problem.G0 + problem.G0.T) / 2
    op = _Operator(problem.G, n)
    b = np.asarray(problem.c, dtype=float)  # primal constraints <A_k, X> = b_k with A_k = -G_k

    norm_b = np.linalg.norm(b)
    norm_C = np.linalg.norm(C)
    row_norms = np.sqrt(np.asarray(problem.G.multiply(problem.G).sum(axis=1)).ravel())
    xi = max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + row_norms), initial=1.0))
    eta = max(10.0, np.sqrt(n), norm_C, np.max(row_norms, initial=0.0))
    X = xi * np.eye(n)
    S = eta * np.eye(n)
    z = np.zeros(m)
    I = np.eye(n)

    status, converged, it = "iteration limit", False, 0
    best_gap_hist: list[float] = []
    for it in range(1, max_iter + 1):
        GX = op.forward(X)
        rp = b + GX                       # b - <A_k, X>
        Rd = C + op.adjoint(z) - S        # C - sum z_k A_k - S
        Rd = (Rd + Rd.T) / 2
        pobj = float(np.sum(C * X))
        dobj = float(b @ z)
        gap = float(np.sum(X * S))
        pinf = np.linalg.norm(rp) / (1 + norm_b)
        dinf = np.linalg.norm(Rd) / (1 + norm_C)
        rel_gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        if verbose:
            log.info("it %3d pobj %.10f dobj %.10f gap %.2e pinf %.2e dinf %.2e",
                     it, pobj, dobj, rel_gap, pinf, dinf)
        if max(rel_gap, gap / (1 + abs(pobj) + abs(dobj))) < tol and pinf < tol and dinf < tol:
            status, converged = "optimal", True
            break
        best_gap_hist.append(rel_gap + pinf + dinf)
        if len(best_gap_hist) > 30 and min(best_gap_hist[-15:]) > 0.5 * min(best_gap_hist[:-15]):
            status = "stalled"
            break
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            status = "time limit"
            break
        mu = gap / n

        Ls = np.linalg.cholesky(S)
        Ls_inv = scipy.linalg.solve_triangular(Ls, I, lower=True)
        Sinv = Ls_inv.T @ Ls_inv
        M = op.schur(X, Sinv)
        try:
            factor = scipy.linalg.cho_factor(M, check_finite=False)
            solve = lambda r: scipy.linalg.cho_solve(factor, r, check_finite=False)
        except np.linalg.LinAlgError:
            reg = 1e-12 * np.trace(M) / m
            factor = scipy.linalg.cho_factor(M + reg * np.eye(m), check_finite=False)
            solve = lambda r: scipy.linalg.cho_solve(factor, r, check_finite=False)

        XRdSinv = X @ Rd @ Sinv

        def direction(sigma_mu: float, corr: np.ndarray | None):
            # dX = (sigma mu I - X S - corr - X dS) S^-1 with dS = Rd - sum dz_k A_k
            T = sigma_mu * Sinv - X - XRdSinv
            if corr is not None:
                T = T - corr @ Sinv
            # M dz = rp + <G_k, T>, the primal equation after eliminating dX and dS
            dz_ = solve(rp + op.forward(T))
            dS_ = Rd + op.adjoint(dz_)
            dS_ = (dS_ + dS_.T) / 2
            dX_ = sigma_mu * Sinv - X - (corr @ Sinv if corr is not None else 0) - X @ dS_ @ Sinv
            dX_ = (dX_ + dX_.T) / 2
            return dX_, dz_, dS_

        dXa, dza, dSa = direction(0.0, None)
        ap = min(1.0, _max_step(X, dXa))
        ad = min(1.0, _max_step(S, dSa))
        mu_aff = float(np.sum((X + ap * dXa) * (S + ad * dSa))) / n
        sigma = min(1.0, (mu_aff / mu) ** 3)
        dX, dz, dS = direction(sigma * mu, dXa @ dSa)
        ap = min(1.0, step_fraction * _max_step(X, dX))
        ad = min(1.0, step_fraction * _max_step(S, dS))
        X = X + ap * dX
        z = z + ad * dz
        S = S + ad * dS
        X = (X + X.T) / 2
        S = (S + S.T) / 2

    upper = float(np.sum(C * X)) + problem.offset
    lower = float(problem.c @ z) + problem.offset
    res = SdpResult(upper, lower, float(np.sum(X * S)), float(pinf), float(dinf), it, converged,
                    status, z, X, time.perf_counter() - t0)
    return res
