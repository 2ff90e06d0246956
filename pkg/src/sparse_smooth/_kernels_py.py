"""Pure-Python versions of the inner loops (fallback for the compiled module)."""

import numpy as np

OPTIMAL, UNBOUNDED, MAX_PIVOTS = 0, 1, 2


def admm_l1_loop(W, v0, Lt, mu, lam, alpha, tol_abs, tol_rel, max_iter, z, u):
    """Iterate scaled ADMM for the split ``z = L c`` until the residuals are small.

    The x-update is folded into ``L c = v0 + W (z - u)``. ``z`` and ``u`` are
    updated in place. Returns ``(iterations, r_norm, s_norm, converged)``.
    """
    p = z.shape[0]
    n = Lt.shape[0]
    thresh = lam / mu
    sqrt_p, sqrt_n = np.sqrt(p), np.sqrt(n)
    r_norm = s_norm = np.inf
    for it in range(1, max_iter + 1):
        Lc = v0 + W @ (z - u)
        xh = alpha * Lc + (1.0 - alpha) * z
        v = xh + u
        z_new = np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)
        u += xh - z_new
        dz = z_new - z
        z[:] = z_new
        r_norm = np.linalg.norm(Lc - z)
        eps_pri = sqrt_p * tol_abs + tol_rel * max(np.linalg.norm(Lc), np.linalg.norm(z))
        if r_norm > eps_pri:
            continue
        s_norm = mu * np.linalg.norm(Lt @ dz)
        eps_dual = sqrt_n * tol_abs + tol_rel * mu * np.linalg.norm(Lt @ u)
        if s_norm <= eps_dual:
            return it, r_norm, s_norm, True
    s_norm = mu * np.linalg.norm(Lt @ dz) if max_iter > 0 else np.inf
    return max_iter, r_norm, s_norm, False


def simplex_iterate(T, basis, allowed, tol, max_pivots):
    """Primal simplex pivots on a dense tableau with Bland's rule.

    ``T`` has the constraint rows ``[B^-1 A | B^-1 b]`` followed by the
    reduced-cost row; it and ``basis`` are modified in place.
    Returns ``(status, pivots)``.
    """
    m = T.shape[0] - 1
    ncols = T.shape[1] - 1
    allowed = np.asarray(allowed, dtype=bool)
    pivots = 0
    while pivots < max_pivots:
        candidates = np.flatnonzero(allowed & (T[m, :ncols] < -tol))
        if candidates.size == 0:
            return OPTIMAL, pivots
        entering = candidates[0]
        col = T[:m, entering]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return UNBOUNDED, pivots
        ratios = T[rows, ncols] / col[rows]
        # ties within the slack go to the smallest basic index
        best = ratios.min()
        slack = 1e-12 * (1.0 + abs(best))
        ties = rows[np.abs(ratios - best) <= slack]
        leave = int(ties[np.argmin(basis[ties])])
        T[leave] /= T[leave, entering]
        factors = T[:, entering].copy()
        factors[leave] = 0.0
        T -= np.outer(factors, T[leave])
        basis[leave] = entering
        pivots += 1
    return MAX_PIVOTS, pivots
