"""Data-driven reachability for Lipschitz nonlinear systems.

From recorded input-state trajectories this module fits a least-squares
matrix model around a linearization point, bounds the model mismatch with
an interval zonotope, adds a Lipschitz cover term for unsampled behavior,
and runs the one-step reachability recursion

    Z_k = M (1 x (Z_{k-1} - x*) x (U_k - u*)) + Z_L + Z_eps + Z_w

followed by order reduction. The factor blocks are centered at the
linearization point to match the fitted regressor.
"""

import csv

import numpy as np

from .errors import DataError, DimensionError
from .setalg import (
    MatrixZonotope,
    Zonotope,
    cartesian_product,
    linear_map,
    minkowski_sum,
    reduce_order,
)


class TrajectoryDataset:
    """Input-state trajectories and their column-stacked data matrices."""

    def __init__(self, trajectories):
        if not trajectories:
            raise DataError("dataset needs at least one trajectory")
        self.trajectories = []
        xs, xp, xm, um = [], [], [], []
        n = None
        m = None
        for states, inputs in trajectories:
            S = np.asarray(states, dtype=float)
            U = np.asarray(inputs, dtype=float)
            if S.ndim == 1:
                S = S.reshape(-1, 1)
            if U.ndim == 1:
                U = U.reshape(-1, 1)
            if S.shape[0] != U.shape[0] + 1:
                raise DataError(
                    f"trajectory has {S.shape[0]} states for {U.shape[0]} inputs; "
                    "need exactly one more state than inputs"
                )
            if n is None:
                n, m = S.shape[1], U.shape[1]
            if S.shape[1] != n or U.shape[1] != m:
                raise DataError("trajectories disagree on state/input dimension")
            self.trajectories.append((S, U))
            xs.append(S)
            xm.append(S[:-1])
            xp.append(S[1:])
            um.append(U)
        self.state_dim = n
        self.input_dim = m
        self.X = np.vstack(xs).T          # n x (T + K)
        self.X_minus = np.vstack(xm).T    # n x T
        self.X_plus = np.vstack(xp).T     # n x T
        self.U_minus = np.vstack(um).T    # m x T
        self.n_points = self.X_minus.shape[1]

    def __repr__(self):
        return (
            f"TrajectoryDataset(K={len(self.trajectories)}, T={self.n_points}, "
            f"n={self.state_dim}, m={self.input_dim})"
        )


CSV_FLOAT_FMT = "%.17g"


def dataset_to_csv(dataset, path):
    """Write `traj,k,x1..xn,u1..um`; u fields are empty on final rows."""
    n, m = dataset.state_dim, dataset.input_dim
    header = ["traj", "k"] + [f"x{i+1}" for i in range(n)] + [
        f"u{i+1}" for i in range(m)
    ]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for j, (S, U) in enumerate(dataset.trajectories):
            for k in range(S.shape[0]):
                row = [str(j), str(k)]
                row += [CSV_FLOAT_FMT % v for v in S[k]]
                if k < U.shape[0]:
                    row += [CSV_FLOAT_FMT % v for v in U[k]]
                else:
                    row += [""] * m
                w.writerow(row)


def dataset_from_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = sum(1 for h in header if h.startswith("x"))
        m = sum(1 for h in header if h.startswith("u"))
        if n == 0 or header[:2] != ["traj", "k"]:
            raise DataError(f"unrecognized trajectory CSV header {header}")
        rows = {}
        for row in reader:
            traj = int(row[0])
            k = int(row[1])
            x = [float(v) for v in row[2:2 + n]]
            ustr = row[2 + n:2 + n + m]
            u = None if all(v == "" for v in ustr) else [float(v) for v in ustr]
            rows.setdefault(traj, []).append((k, x, u))
    trajectories = []
    for traj in sorted(rows):
        entries = sorted(rows[traj])
        states = [x for _, x, _ in entries]
        inputs = [u for _, _, u in entries if u is not None]
        if entries[-1][2] is not None or len(inputs) != len(states) - 1:
            raise DataError(
                f"trajectory {traj}: expected empty inputs exactly on the final row"
            )
        trajectories.append((states, inputs))
    return TrajectoryDataset(trajectories)


class LeastSquaresModel:
    """M = [offset | state block | input block] at linearization (x*, u*)."""

    def __init__(self, m_tilde, x_star, u_star):
        self.m_tilde = np.asarray(m_tilde, dtype=float)
        self.x_star = np.asarray(x_star, dtype=float).reshape(-1)
        self.u_star = np.asarray(u_star, dtype=float).reshape(-1)
        n = self.x_star.size
        m = self.u_star.size
        if self.m_tilde.shape != (n, 1 + n + m):
            raise DimensionError(
                f"model matrix shape {self.m_tilde.shape} != ({n}, {1 + n + m})"
            )

    @property
    def offset(self):
        return self.m_tilde[:, 0]

    @property
    def state_block(self):
        n = self.x_star.size
        return self.m_tilde[:, 1:1 + n]

    @property
    def input_block(self):
        n = self.x_star.size
        return self.m_tilde[:, 1 + n:]


def build_noise_matrix_zonotope(z_w, n_cols):
    """Noise matrix zonotope for a column-stacked noise sequence.

    One generator matrix per (noise generator, column): generator g placed
    in one column, zeros elsewhere.
    """
    if n_cols < 1:
        raise DataError("need at least one column")
    n = z_w.dim
    center = np.tile(z_w.center.reshape(n, 1), (1, n_cols))
    gens = np.zeros((z_w.order * n_cols, n, n_cols))
    idx = 0
    for g in z_w.generators.T:
        for j in range(n_cols):
            gens[idx, :, j] = g
            idx += 1
    return MatrixZonotope(center, gens)


def _regressor(dataset, x_star, u_star):
    T = dataset.n_points
    return np.vstack([
        np.ones((1, T)),
        dataset.X_minus - x_star.reshape(-1, 1),
        dataset.U_minus - u_star.reshape(-1, 1),
    ])


def fit_model(dataset, x_star, u_star, m_w):
    """Least-squares matrix model via the Moore-Penrose pseudoinverse.

    Solves M = (X+ - C_Mw) [1; X- - x*; U- - u*]^+ with a singular-value
    cutoff of 1e-10 x sigma_max.
    """
    x_star = np.asarray(x_star, dtype=float).reshape(-1)
    u_star = np.asarray(u_star, dtype=float).reshape(-1)
    if dataset.n_points < 1:
        raise DataError("empty dataset")
    if m_w.center_matrix.shape != (dataset.state_dim, dataset.n_points):
        raise DimensionError("noise matrix zonotope shape mismatch")
    R = _regressor(dataset, x_star, u_star)
    m_tilde = (dataset.X_plus - m_w.center_matrix) @ np.linalg.pinv(R, rcond=1e-10)
    return LeastSquaresModel(m_tilde, x_star, u_star)


def residual_zonotope(dataset, model, m_w, z_w):
    """Interval hull of the per-column model residuals, minus Z_w.

    The subtraction is an interval Minkowski difference: shift the center
    by -c_w and shrink each axis radius by Z_w's radius, floored at zero
    (sound because Z_w is added back in the reachability recursion).
    """
    R = _regressor(dataset, model.x_star, model.u_star)
    residuals = dataset.X_plus - model.m_tilde @ R
    hi = residuals.max(axis=1)
    lo = residuals.min(axis=1)
    center = 0.5 * (hi + lo) - z_w.center
    radius = 0.5 * (hi - lo)
    w_radius = (
        np.sum(np.abs(z_w.generators), axis=1) if z_w.order else np.zeros(z_w.dim)
    )
    radius = np.maximum(radius - w_radius, 0.0)
    return Zonotope(center, np.diag(radius))


def lipschitz_zonotope(lipschitz, covering_radius, dim):
    """<0, diag(L* delta, ..., L* delta)>."""
    if lipschitz < 0 or covering_radius < 0:
        raise ValueError("Lipschitz constant and covering radius must be >= 0")
    return Zonotope(np.zeros(dim), np.eye(dim) * (lipschitz * covering_radius))


def estimate_lipschitz_and_radius(dataset):
    """Data-based surrogates for L* and the covering radius.

    L* is the largest successor-difference over regressor-difference ratio
    across distinct data pairs; delta is the largest nearest-neighbor
    distance among regressor points, valid over the sampled region only.
    """
    if dataset.n_points < 2:
        raise DataError("need at least two data points")
    Z = np.vstack([dataset.X_minus, dataset.U_minus]).T   # T x (n+m)
    Xp = dataset.X_plus.T
    dz = np.linalg.norm(Z[:, None, :] - Z[None, :, :], axis=2)
    dxp = np.linalg.norm(Xp[:, None, :] - Xp[None, :, :], axis=2)
    distinct = dz > 0.0
    if not np.any(distinct):
        raise DataError("all data points are identical")
    lipschitz = float(np.max(dxp[distinct] / dz[distinct]))
    nn = np.where(np.eye(len(Z), dtype=bool), np.inf, dz)
    delta = float(np.max(np.min(nn, axis=1)))
    return lipschitz, delta


def reach_step(prev, u_set, model, z_l, z_eps, z_w, max_order=10.0):
    """One reachability recursion step; returns the next data-driven set."""
    n = model.x_star.size
    m = model.u_star.size
    if prev.dim != n or u_set.dim != m:
        raise DimensionError("set dimensions do not match the model")
    one = Zonotope(np.ones(1))
    centered_prev = Zonotope(prev.center - model.x_star, prev.generators)
    centered_u = Zonotope(u_set.center - model.u_star, u_set.generators)
    stacked = cartesian_product(cartesian_product(one, centered_prev), centered_u)
    out = linear_map(model.m_tilde, stacked)
    out = minkowski_sum(out, z_l)
    out = minkowski_sum(out, z_eps)
    out = minkowski_sum(out, z_w)
    return reduce_order(out, max_order)


class ReachConfig:
    """Inputs of the reachability recursion."""

    def __init__(self, noise_zonotope, input_zonotope, initial_set, horizon,
                 lipschitz="estimate", covering_radius="estimate",
                 linearization="center", max_order=10.0):
        self.noise_zonotope = noise_zonotope
        self.input_zonotope = input_zonotope
        self.initial_set = initial_set
        self.horizon = int(horizon)
        self.lipschitz = lipschitz
        self.covering_radius = covering_radius
        self.linearization = linearization
        self.max_order = float(max_order)

    def input_set(self, k):
        """Input zonotope for step k (1-based)."""
        if isinstance(self.input_zonotope, Zonotope):
            return self.input_zonotope
        return self.input_zonotope[k - 1]

    def resolve_lipschitz(self, dataset):
        if self.lipschitz == "estimate" or self.covering_radius == "estimate":
            est_l, est_d = estimate_lipschitz_and_radius(dataset)
        lip = est_l if self.lipschitz == "estimate" else float(self.lipschitz)
        rad = est_d if self.covering_radius == "estimate" else float(self.covering_radius)
        return lip, rad


def reach_sequence(config, dataset):
    """Data-driven reachable sets Z_0..Z_N for the configured horizon.

    With the default "center" linearization the model is refit each step at
    the current set's center; "fixed" mode fits once at the dataset means.
    """
    z_w = config.noise_zonotope
    lip, rad = config.resolve_lipschitz(dataset)
    z_eps = lipschitz_zonotope(lip, rad, dataset.state_dim)
    m_w = build_noise_matrix_zonotope(z_w, dataset.n_points)

    fixed_model = None
    fixed_z_l = None
    if config.linearization == "fixed":
        x_star = dataset.X_minus.mean(axis=1)
        u_star = dataset.U_minus.mean(axis=1)
        fixed_model = fit_model(dataset, x_star, u_star, m_w)
        fixed_z_l = residual_zonotope(dataset, fixed_model, m_w, z_w)
    elif config.linearization != "center":
        raise ValueError(f"unknown linearization mode {config.linearization!r}")

    sets = [config.initial_set]
    for k in range(1, config.horizon + 1):
        u_set = config.input_set(k)
        if fixed_model is not None:
            model, z_l = fixed_model, fixed_z_l
        else:
            model = fit_model(
                dataset, sets[-1].center, u_set.center, m_w
            )
            z_l = residual_zonotope(dataset, model, m_w, z_w)
        sets.append(
            reach_step(sets[-1], u_set, model, z_l, z_eps, z_w, config.max_order)
        )
    return sets
