"""Hot numeric kernels: box-constrained equality feasibility.

Membership of a point in a zonotope or constrained zonotope reduces to

    exists beta in [-1, 1]^m :  M beta = q

and the containment audits solve tens of millions of these tiny problems.
The solver below is a bounded-variable phase-1 simplex (Bland's rule, dense
re-factorization each pivot; basis sizes here are <= ~10 so that is cheap).

Every kernel is built twice: a numba @njit version and the identical pure
NumPy/Python version. Selection is by the REACHSTL_NUMBA environment
variable ("0" forces the fallback); without numba installed the fallback is
used automatically. `benchmarks/bench_kernels.py` compares the two paths.
"""

import os

import numpy as np

FEASIBLE = 0
INFEASIBLE = 1
SOLVER_FAILED = 2

_env = os.environ.get("REACHSTL_NUMBA", "1").strip()
if _env == "0":
    NUMBA_ENABLED = False
else:
    try:
        import numba

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        NUMBA_ENABLED = False


def _build_kernels(jit):
    """Construct the kernel pair; jit toggles numba compilation."""
    if jit:
        wrap = numba.njit(cache=True)
    else:
        def wrap(f):
            return f

    @wrap
    def _box_feasible(M, q, tol, max_iter):
        """Decide feasibility of {beta in [-1,1]^m : M beta = q}.

        Returns (status, beta) with status FEASIBLE / INFEASIBLE /
        SOLVER_FAILED; beta is a witness when FEASIBLE, else undefined.
        Feasibility means the witness satisfies max|M beta - q| <= tol.
        """
        r = M.shape[0]
        m = M.shape[1]
        beta = np.zeros(m)
        if r == 0:
            return FEASIBLE, beta
        if m == 0:
            ok = True
            for i in range(r):
                if abs(q[i]) > tol:
                    ok = False
            if ok:
                return FEASIBLE, beta
            return INFEASIBLE, beta

        # Substitute u = beta + 1 in [0, 2]:  M u = q + M 1.
        p = q.copy()
        for i in range(r):
            for j in range(m):
                p[i] += M[i, j]

        # Row interval pre-check: range of (M u)_i over the box.
        for i in range(r):
            lo = 0.0
            hi = 0.0
            scale = 1.0
            for j in range(m):
                v = M[i, j]
                if v > 0.0:
                    hi += 2.0 * v
                else:
                    lo += 2.0 * v
                if abs(v) > scale:
                    scale = abs(v)
            slack = tol + 1e-12 * scale
            if p[i] < lo - slack or p[i] > hi + slack:
                return INFEASIBLE, beta

        # Row scaling, then sign rows so the rhs is nonnegative.
        Ms = np.empty((r, m))
        ps = np.empty(r)
        for i in range(r):
            s = 0.0
            for j in range(m):
                if abs(M[i, j]) > s:
                    s = abs(M[i, j])
            if abs(p[i]) > s:
                s = abs(p[i])
            if s < 1e-300:
                s = 1.0
            sign = 1.0
            if p[i] < 0.0:
                sign = -1.0
            for j in range(m):
                Ms[i, j] = sign * M[i, j] / s
            ps[i] = sign * p[i] / s

        n_var = m + r                 # u variables then one artificial per row
        vstat = np.zeros(n_var, dtype=np.int8)   # 0 at-lower, 1 at-upper, 2 basic
        basis = np.empty(r, dtype=np.int64)
        for i in range(r):
            basis[i] = m + i
            vstat[m + i] = 2

        B = np.empty((r, r))
        rhs_eff = np.empty(r)
        xb = np.empty(r)
        y = np.empty(r)
        w = np.empty(r)
        cb = np.empty(r)
        eps = 1e-11

        it = 0
        while it < max_iter:
            it += 1

            # Assemble basis matrix and effective rhs (upper-bound nonbasics).
            for i in range(r):
                for kk in range(r):
                    v = basis[kk]
                    if v < m:
                        B[i, kk] = Ms[i, v]
                    else:
                        B[i, kk] = 1.0 if i == v - m else 0.0
                rhs = ps[i]
                for j in range(m):
                    if vstat[j] == 1:
                        rhs -= 2.0 * Ms[i, j]
                rhs_eff[i] = rhs
                cb[i] = 1.0 if basis[i] >= m else 0.0

            # LU via Gaussian elimination with partial pivoting on a copy.
            LU = B.copy()
            piv = np.empty(r, dtype=np.int64)
            singular = False
            for col in range(r):
                pbest = col
                vbest = abs(LU[col, col])
                for i in range(col + 1, r):
                    if abs(LU[i, col]) > vbest:
                        vbest = abs(LU[i, col])
                        pbest = i
                if vbest < 1e-13:
                    singular = True
                    break
                piv[col] = pbest
                if pbest != col:
                    for j in range(r):
                        tmp = LU[col, j]
                        LU[col, j] = LU[pbest, j]
                        LU[pbest, j] = tmp
                for i in range(col + 1, r):
                    f = LU[i, col] / LU[col, col]
                    LU[i, col] = f
                    for j in range(col + 1, r):
                        LU[i, j] -= f * LU[col, j]
            if singular:
                return SOLVER_FAILED, beta

            # xb = B^-1 rhs_eff (rows of LU are fully permuted: swap rhs first)
            for i in range(r):
                xb[i] = rhs_eff[i]
            for col in range(r):
                pbest = piv[col]
                if pbest != col:
                    tmp = xb[col]
                    xb[col] = xb[pbest]
                    xb[pbest] = tmp
            for col in range(r):
                for i in range(col + 1, r):
                    xb[i] -= LU[i, col] * xb[col]
            for i in range(r - 1, -1, -1):
                s = xb[i]
                for j in range(i + 1, r):
                    s -= LU[i, j] * xb[j]
                xb[i] = s / LU[i, i]

            # y solves B^T y = cb: forward/back on the transpose of LU.
            for i in range(r):
                y[i] = cb[i]
            for i in range(r):
                s = y[i]
                for j in range(i):
                    s -= LU[j, i] * y[j]
                y[i] = s / LU[i, i]
            for i in range(r - 1, -1, -1):
                s = y[i]
                for j in range(i + 1, r):
                    s -= LU[j, i] * y[j]
                y[i] = s
            for col in range(r - 1, -1, -1):
                pbest = piv[col]
                if pbest != col:
                    tmp = y[col]
                    y[col] = y[pbest]
                    y[pbest] = tmp

            # Entering variable (Bland: first eligible u variable).
            enter = -1
            direction = 1.0
            for j in range(m):
                if vstat[j] == 2:
                    continue
                d = 0.0
                for i in range(r):
                    d -= y[i] * Ms[i, j]
                if vstat[j] == 0 and d < -eps:
                    enter = j
                    direction = 1.0
                    break
                if vstat[j] == 1 and d > eps:
                    enter = j
                    direction = -1.0
                    break

            if enter == -1:
                # Optimal: reconstruct u, check the original residual.
                obj = 0.0
                for i in range(r):
                    if basis[i] >= m:
                        obj += xb[i]
                for j in range(m):
                    if vstat[j] == 0:
                        beta[j] = -1.0
                    elif vstat[j] == 1:
                        beta[j] = 1.0
                for i in range(r):
                    v = basis[i]
                    if v < m:
                        u = xb[i]
                        if u < 0.0:
                            u = 0.0
                        elif u > 2.0:
                            u = 2.0
                        beta[v] = u - 1.0
                worst = 0.0
                for i in range(r):
                    res = -q[i]
                    for j in range(m):
                        res += M[i, j] * beta[j]
                    if abs(res) > worst:
                        worst = abs(res)
                if worst <= tol:
                    return FEASIBLE, beta
                return INFEASIBLE, beta

            # Direction through the basis: w = B^-1 Ms[:, enter]
            for i in range(r):
                w[i] = Ms[i, enter]
            for col in range(r):
                pbest = piv[col]
                if pbest != col:
                    tmp = w[col]
                    w[col] = w[pbest]
                    w[pbest] = tmp
            for col in range(r):
                for i in range(col + 1, r):
                    w[i] -= LU[i, col] * w[col]
            for i in range(r - 1, -1, -1):
                s = w[i]
                for j in range(i + 1, r):
                    s -= LU[i, j] * w[j]
                w[i] = s / LU[i, i]

            # Ratio test: entering moves by t >= 0 toward its other bound.
            t_best = 2.0          # u variables have range 2
            leave = -1
            leave_to_upper = False
            for i in range(r):
                delta = direction * w[i]
                v = basis[i]
                if delta > eps:
                    lim = xb[i] / delta
                    if lim < 0.0:
                        lim = 0.0
                    if lim < t_best - 1e-13 or (
                        lim < t_best + 1e-13 and (leave == -1 or v < basis[leave])
                    ):
                        t_best = lim
                        leave = i
                        leave_to_upper = False
                elif delta < -eps and v < m:
                    lim = (2.0 - xb[i]) / (-delta)
                    if lim < 0.0:
                        lim = 0.0
                    if lim < t_best - 1e-13 or (
                        lim < t_best + 1e-13 and (leave == -1 or v < basis[leave])
                    ):
                        t_best = lim
                        leave = i
                        leave_to_upper = True

            if leave == -1:
                # Entering variable flips to its other bound.
                vstat[enter] = 1 - vstat[enter]
                continue

            out = basis[leave]
            vstat[out] = 1 if leave_to_upper else 0
            basis[leave] = enter
            vstat[enter] = 2

        return SOLVER_FAILED, beta

    @wrap
    def _box_feasible_batch(M, Q, tol, max_iter):
        """Feasibility status for each rhs row of Q against a shared M."""
        n = Q.shape[0]
        out = np.empty(n, dtype=np.uint8)
        for k in range(n):
            status, _ = _box_feasible(M, Q[k], tol, max_iter)
            out[k] = status
        return out

    return _box_feasible, _box_feasible_batch


box_feasible_py, box_feasible_batch_py = _build_kernels(False)

if NUMBA_ENABLED:
    box_feasible, box_feasible_batch = _build_kernels(True)
else:
    box_feasible, box_feasible_batch = box_feasible_py, box_feasible_batch_py


def max_iterations(n_rows, n_cols):
    """Pivot budget before the solver reports failure."""
    return 200 + 40 * (n_rows + n_cols)
