"""Zonotope, constrained zonotope and matrix zonotope algebra.

A zonotope is <c, G> = {c + G b : b in [-1,1]^g}; a constrained zonotope
additionally restricts the factors to A b = b_c. All values are immutable
after construction and every operation is a pure function, so sets can be
shared freely across threads. Exactly-zero generator columns are dropped on
construction (for constrained zonotopes only when the matching constraint
column is zero too, since a constrained factor still shapes the feasible
set even when its generator is zero).
"""

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .errors import DimensionError, SolverError

MEMBERSHIP_TOL = 1e-9


def _as_vector(x, name="vector"):
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise DimensionError(f"{name} must be nonempty")
    return v


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


class IntervalVector:
    """Axis-aligned box [lower, upper], lower <= upper componentwise."""

    def __init__(self, lower, upper):
        lower = _as_vector(lower, "lower")
        upper = _as_vector(upper, "upper")
        if lower.shape != upper.shape:
            raise DimensionError("interval bounds must have equal length")
        if np.any(lower > upper):
            raise ValueError("interval has lower > upper")
        self.lower = _readonly(lower)
        self.upper = _readonly(upper)

    @property
    def dim(self):
        return self.lower.size

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def radius(self):
        return 0.5 * (self.upper - self.lower)

    def __repr__(self):
        return f"IntervalVector({self.lower.tolist()}, {self.upper.tolist()})"


class Zonotope:
    """<center, generators>; generators has one column per generator."""

    def __init__(self, center, generators=None):
        c = _as_vector(center, "center")
        if generators is None:
            G = np.zeros((c.size, 0))
        else:
            G = np.asarray(generators, dtype=float)
            if G.ndim == 1:
                G = G.reshape(-1, 1)
        if G.shape[0] != c.size:
            raise DimensionError(
                f"generator matrix has {G.shape[0]} rows for a {c.size}-dim center"
            )
        keep = np.any(G != 0.0, axis=0)
        self.center = _readonly(c)
        self.generators = _readonly(G[:, keep])

    @property
    def dim(self):
        return self.center.size

    @property
    def order(self):
        return self.generators.shape[1]

    def __repr__(self):
        return f"Zonotope(dim={self.dim}, generators={self.order})"


class ConstrainedZonotope:
    """<center, generators, A, b>: factors satisfy A b_factors = b."""

    def __init__(self, center, generators, constraint_a=None, constraint_b=None):
        c = _as_vector(center, "center")
        G = np.asarray(generators, dtype=float)
        if G.ndim == 1:
            G = G.reshape(-1, 1)
        if G.size == 0:
            G = G.reshape(c.size, 0)
        if G.shape[0] != c.size:
            raise DimensionError("generator matrix row count mismatch")
        ng = G.shape[1]
        if constraint_a is None:
            A = np.zeros((0, ng))
            b = np.zeros(0)
        else:
            A = np.asarray(constraint_a, dtype=float)
            if A.ndim == 1:
                A = A.reshape(1, -1)
            b = _as_vector(constraint_b, "constraint_b") if np.size(constraint_b) else np.zeros(0)
        if A.size == 0:
            A = A.reshape(0, ng)
        if A.shape[1] != ng:
            raise DimensionError(
                f"constraint matrix has {A.shape[1]} columns for {ng} generators"
            )
        if A.shape[0] != b.size:
            raise DimensionError("constraint rhs length mismatch")
        keep = np.any(G != 0.0, axis=0) | np.any(A != 0.0, axis=0)
        self.center = _readonly(c)
        self.generators = _readonly(G[:, keep])
        self.constraint_a = _readonly(A[:, keep])
        self.constraint_b = _readonly(b)

    @property
    def dim(self):
        return self.center.size

    @property
    def order(self):
        return self.generators.shape[1]

    @property
    def n_constraints(self):
        return self.constraint_a.shape[0]

    def enclosing_zonotope(self):
        """Drop the factor constraints; the result is a superset."""
        return Zonotope(self.center, self.generators)

    def __repr__(self):
        return (
            f"ConstrainedZonotope(dim={self.dim}, generators={self.order}, "
            f"constraints={self.n_constraints})"
        )


def lift(z):
    """Represent a zonotope as a constraint-free constrained zonotope."""
    if isinstance(z, ConstrainedZonotope):
        return z
    return ConstrainedZonotope(z.center, z.generators)


class MatrixZonotope:
    """Center matrix plus generator matrices of identical shape."""

    def __init__(self, center_matrix, generator_matrices):
        C = np.asarray(center_matrix, dtype=float)
        if C.ndim != 2:
            raise DimensionError("center matrix must be 2-D")
        Gs = np.asarray(generator_matrices, dtype=float)
        if Gs.size == 0:
            Gs = np.zeros((0,) + C.shape)
        if Gs.ndim != 3 or Gs.shape[1:] != C.shape:
            raise DimensionError("generator matrices must match the center's shape")
        self.center_matrix = _readonly(C)
        self.generator_matrices = _readonly(Gs)

    @property
    def n_generators(self):
        return self.generator_matrices.shape[0]

    def __repr__(self):
        return (
            f"MatrixZonotope(shape={self.center_matrix.shape}, "
            f"generators={self.n_generators})"
        )


# ---------------------------------------------------------------------------
# basic operations

def linear_map(L, z):
    """L <c, G> = <L c, L G>."""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[1] != z.dim:
        raise DimensionError(f"map expects {z.dim} columns, got shape {L.shape}")
    if isinstance(z, ConstrainedZonotope):
        return ConstrainedZonotope(L @ z.center, L @ z.generators,
                                   z.constraint_a, z.constraint_b)
    return Zonotope(L @ z.center, L @ z.generators)


def minkowski_sum(z1, z2):
    """<c1 + c2, [G1 G2]>, exact for zonotopes."""
    if z1.dim != z2.dim:
        raise DimensionError(f"dimension mismatch: {z1.dim} vs {z2.dim}")
    if isinstance(z1, ConstrainedZonotope) or isinstance(z2, ConstrainedZonotope):
        c1, c2 = lift(z1), lift(z2)
        from scipy.linalg import block_diag

        return ConstrainedZonotope(
            c1.center + c2.center,
            np.hstack([c1.generators, c2.generators]),
            block_diag(c1.constraint_a, c2.constraint_a),
            np.concatenate([c1.constraint_b, c2.constraint_b]),
        )
    return Zonotope(z1.center + z2.center, np.hstack([z1.generators, z2.generators]))


def cartesian_product(z1, z2):
    """Stack centers, block-diagonal generators."""
    g1, g2 = z1.generators, z2.generators
    top = np.hstack([g1, np.zeros((z1.dim, g2.shape[1]))])
    bottom = np.hstack([np.zeros((z2.dim, g1.shape[1])), g2])
    return Zonotope(np.concatenate([z1.center, z2.center]), np.vstack([top, bottom]))


def from_interval(iv):
    """Interval [l, u] as <(l+u)/2, diag((u-l)/2)>."""
    return Zonotope(iv.center, np.diag(iv.radius))


def interval_hull(z):
    """Tightest axis-aligned box containing the set (constraints ignored)."""
    if isinstance(z, ConstrainedZonotope):
        z = z.enclosing_zonotope()
    dev = np.sum(np.abs(z.generators), axis=1) if z.order else np.zeros(z.dim)
    return IntervalVector(z.center - dev, z.center + dev)


def reduce_order(z, max_order):
    """Superset of z with at most ceil(max_order * n) generators.

    The smallest-norm generators are collapsed into their interval hull
    (a box), which can only enlarge the set.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    n = z.dim
    budget = int(np.ceil(max_order * n))
    G = z.generators
    if G.shape[1] <= budget:
        return z
    norms = np.linalg.norm(G, axis=0)
    idx = np.argsort(norms)[::-1]
    n_keep = budget - n
    kept = G[:, idx[:n_keep]]
    boxed = np.diag(np.sum(np.abs(G[:, idx[n_keep:]]), axis=1))
    return Zonotope(z.center, np.hstack([kept, boxed]))


# ---------------------------------------------------------------------------
# membership and emptiness

def _membership_system(z, x):
    """Equality system M b = q whose box-feasibility decides x in z."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != z.dim:
        raise DimensionError(f"point has dim {x.size}, set has dim {z.dim}")
    if isinstance(z, ConstrainedZonotope):
        M = np.vstack([z.generators, z.constraint_a])
        q = np.concatenate([x - z.center, z.constraint_b])
    else:
        M = z.generators
        q = x - z.center
    return M, q


def _feasible(M, q, tol):
    status, _ = kernels.box_feasible(M, q, tol, kernels.max_iterations(*M.shape))
    if status == kernels.SOLVER_FAILED:
        res = linprog(np.zeros(M.shape[1]), A_eq=M, b_eq=q,
                      bounds=[(-1.0, 1.0)] * M.shape[1], method="highs")
        if res.status == 0:
            return True
        if res.status == 2:
            return False
        raise SolverError(f"feasibility solve failed (scipy status {res.status})")
    return status == kernels.FEASIBLE


def contains_point(z, x, tol=MEMBERSHIP_TOL):
    """True iff some factor vector in [-1,1]^g reproduces x (residual <= tol)."""
    M, q = _membership_system(z, x)
    hull = interval_hull(z)
    xv = np.asarray(x, dtype=float).reshape(-1)
    if np.any(xv < hull.lower - tol) or np.any(xv > hull.upper + tol):
        return False
    return _feasible(M, q, tol)


def _support_directions_2d(z):
    """Unit directions whose support constraints give an exact 2-D H-rep."""
    G = z.generators
    dirs = []
    for g in G.T:
        dirs.append([-g[1], g[0]])   # facet normal
        dirs.append([g[0], g[1]])    # covers degenerate (collinear) cases
    if not dirs:
        dirs = [[1.0, 0.0], [0.0, 1.0]]
    D = np.asarray(dirs)
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    return D


def contains_points(z, points, tol=MEMBERSHIP_TOL):
    """Vectorized membership for an (N, dim) array of points."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != z.dim:
        raise DimensionError("point dimension mismatch")
    if isinstance(z, Zonotope) and z.dim == 2:
        if z.order == 0:
            return np.max(np.abs(X - z.center), axis=1) <= tol
        D = _support_directions_2d(z)
        radii = np.sum(np.abs(D @ z.generators), axis=1)
        proj = np.abs((X - z.center) @ D.T)
        return np.all(proj <= radii + tol, axis=1)
    M, q0 = _membership_system(z, z.center)
    hull = interval_hull(z)
    inside_hull = np.all(
        (X >= hull.lower - tol) & (X <= hull.upper + tol), axis=1
    )
    out = np.zeros(X.shape[0], dtype=bool)
    if not np.any(inside_hull):
        return out
    idx = np.flatnonzero(inside_hull)
    n = z.dim
    Q = np.tile(q0, (idx.size, 1))
    Q[:, :n] = X[idx] - z.center
    statuses = kernels.box_feasible_batch(
        M, Q, tol, kernels.max_iterations(*M.shape)
    )
    if np.any(statuses == kernels.SOLVER_FAILED):
        for k in np.flatnonzero(statuses == kernels.SOLVER_FAILED):
            statuses[k] = (
                kernels.FEASIBLE if _feasible(M, Q[k], tol) else kernels.INFEASIBLE
            )
    out[idx] = statuses == kernels.FEASIBLE
    return out


def is_empty(cz, tol=MEMBERSHIP_TOL):
    """True iff no factor vector in the box satisfies the constraints."""
    if not isinstance(cz, ConstrainedZonotope) or cz.n_constraints == 0:
        return False
    return not _feasible(cz.constraint_a, cz.constraint_b, tol)


# ---------------------------------------------------------------------------
# polygons and volume (2-D)

def zonotope_polygon(z):
    """Exact vertices of a 2-D zonotope, counterclockwise."""
    if z.dim != 2:
        raise DimensionError("polygon construction requires dim 2")
    c = z.center
    G = z.generators.copy()
    if G.shape[1] == 0:
        return c.reshape(1, 2)
    flip = (G[1] < 0) | ((G[1] == 0) & (G[0] < 0))
    G[:, flip] *= -1.0
    order = np.argsort(np.arctan2(G[1], G[0]), kind="stable")
    G = G[:, order]
    start = c - G.sum(axis=1)
    chain = [start]
    v = start.copy()
    for j in range(G.shape[1]):
        v = v + 2.0 * G[:, j]
        chain.append(v.copy())
    chain = np.asarray(chain)
    mirrored = 2.0 * c - chain[1:-1]
    return np.vstack([chain, mirrored])


def polygon_area(vertices):
    """Shoelace area of a closed polygon given as an (k, 2) vertex array."""
    V = np.asarray(vertices, dtype=float)
    if V.shape[0] < 3:
        return 0.0
    x, y = V[:, 0], V[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _support(cz, d):
    """Support value/point of a constrained zonotope in direction d via LP."""
    G, A, b = cz.generators, cz.constraint_a, cz.constraint_b
    ng = G.shape[1]
    if ng == 0:
        if A.shape[0] and np.max(np.abs(b)) > MEMBERSHIP_TOL:
            return None
        return float(d @ cz.center), cz.center.copy()
    res = linprog(
        -(d @ G),
        A_eq=A if A.shape[0] else None,
        b_eq=b if A.shape[0] else None,
        bounds=[(-1.0, 1.0)] * ng,
        method="highs",
    )
    if res.status == 2:
        return None
    if res.status != 0:
        raise SolverError(f"support LP failed (scipy status {res.status})")
    point = cz.center + G @ res.x
    return float(d @ point), point


def constrained_polygon(cz, tol=1e-9, max_support=512):
    """Vertices of a 2-D constrained zonotope, or None when empty.

    Adaptive support-direction refinement: the returned polygon is the hull
    of exact boundary points, refined until every unresolved edge's outward
    support gap is below tol (so the area deficit is negligible and the
    polygon is always an inner approximation).
    """
    if cz.dim != 2:
        raise DimensionError("polygon construction requires dim 2")
    if cz.n_constraints == 0:
        return zonotope_polygon(cz.enclosing_zonotope())
    first = _support(cz, np.array([1.0, 0.0]))
    if first is None:
        return None
    seeds = [np.array([1.0, 0.0]), np.array([0.0, 1.0]),
             np.array([-1.0, 0.0]), np.array([0.0, -1.0])]
    pts = [first[1]]
    for d in seeds[1:]:
        pts.append(_support(cz, d)[1])
    segments = [(seeds[i], pts[i], seeds[(i + 1) % 4], pts[(i + 1) % 4])
                for i in range(4)]
    vertices = list(pts)
    n_solved = 4
    while segments and n_solved < max_support:
        d1, p1, d2, p2 = segments.pop()
        edge = p2 - p1
        if np.hypot(edge[0], edge[1]) < tol:
            continue
        normal = np.array([edge[1], -edge[0]])
        nn = np.hypot(normal[0], normal[1])
        if nn == 0.0:
            continue
        normal /= nn
        if normal @ (d1 + d2) < 0:
            normal = -normal
        sup = _support(cz, normal)
        n_solved += 1
        value, pm = sup
        if value <= max(normal @ p1, normal @ p2) + tol:
            continue  # p1-p2 already lies on the boundary
        vertices.append(pm)
        segments.append((d1, p1, normal, pm))
        segments.append((normal, pm, d2, p2))
    V = np.asarray(vertices)
    # order by angle around the centroid; duplicates are harmless for area
    centroid = V.mean(axis=0)
    ang = np.arctan2(V[:, 1] - centroid[1], V[:, 0] - centroid[0])
    return V[np.argsort(ang, kind="stable")]


def volume(s, method="exact2d", samples=100_000, seed=0):
    """Volume of a zonotope or constrained zonotope.

    exact2d (n = 2 only): zonotopes via 4 * sum of |det| over generator
    pairs; constrained zonotopes via the feasible polygon's area.
    monte_carlo: hit ratio over the interval hull, deterministic per seed.
    """
    if method == "exact2d":
        if s.dim != 2:
            raise DimensionError("exact2d requires a 2-dimensional set")
        if isinstance(s, ConstrainedZonotope) and s.n_constraints > 0:
            if is_empty(s):
                return 0.0
            poly = constrained_polygon(s)
            return 0.0 if poly is None else polygon_area(poly)
        G = s.generators
        if G.shape[1] < 2:
            return 0.0
        cross = np.abs(np.outer(G[0], G[1]) - np.outer(G[1], G[0]))
        return 2.0 ** s.dim * float(np.triu(cross, 1).sum())
    if method == "monte_carlo":
        if isinstance(s, ConstrainedZonotope) and is_empty(s):
            return 0.0
        hull = interval_hull(s)
        widths = hull.upper - hull.lower
        box_vol = float(np.prod(widths))
        if box_vol == 0.0:
            return 0.0
        rng = np.random.default_rng(seed)
        hits = 0
        chunk = 200_000
        done = 0
        while done < samples:
            k = min(chunk, samples - done)
            pts = hull.lower + rng.random((k, s.dim)) * widths
            hits += int(np.count_nonzero(contains_points(s, pts)))
            done += k
        return box_vol * hits / samples
    raise ValueError(f"unknown volume method {method!r}")


# ---------------------------------------------------------------------------
# sampling (audits and tests)

def sample_zonotope(z, n, rng):
    """n points of z with factors uniform in [-1,1]^g."""
    B = rng.uniform(-1.0, 1.0, size=(n, z.order))
    return z.center + B @ z.generators.T


def feasible_center(cz):
    """A max-margin feasible factor vector, or None when empty."""
    ng = cz.order
    if ng == 0:
        if cz.n_constraints and np.max(np.abs(cz.constraint_b)) > MEMBERSHIP_TOL:
            return None
        return np.zeros(0)
    if cz.n_constraints == 0:
        return np.zeros(ng)
    # maximize s subject to A beta = b, -1 + s <= beta <= 1 - s
    cost = np.zeros(ng + 1)
    cost[-1] = -1.0
    A_eq = np.hstack([cz.constraint_a, np.zeros((cz.n_constraints, 1))])
    A_ub = np.vstack([
        np.hstack([np.eye(ng), np.ones((ng, 1))]),
        np.hstack([-np.eye(ng), np.ones((ng, 1))]),
    ])
    b_ub = np.ones(2 * ng)
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=cz.constraint_b,
                  bounds=[(None, None)] * ng + [(0.0, None)], method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise SolverError(f"margin LP failed (scipy status {res.status})")
    return res.x[:ng]


def sample_constrained(cz, n, rng):
    """Up to n member points of a constrained zonotope (>= 1 when nonempty).

    Draws factor vectors on the constraint null space around a max-margin
    feasible point, rejecting draws that leave the factor box. Coverage is
    not uniform; it only needs to produce genuine members.
    """
    from scipy.linalg import null_space

    beta_c = feasible_center(cz)
    if beta_c is None:
        return None
    if cz.order == 0:
        return np.tile(cz.center, (1, 1))
    if cz.n_constraints == 0:
        return sample_zonotope(cz, n, rng)
    N = null_space(cz.constraint_a)
    if N.size == 0:
        return cz.center + np.tile(cz.generators @ beta_c, (1, 1))
    kept = [beta_c]
    scale = 2.0
    attempts = 0
    while len(kept) < n and attempts < 60:
        attempts += 1
        t = rng.uniform(-scale, scale, size=(max(4 * n, 64), N.shape[1]))
        cand = beta_c + t @ N.T
        ok = np.all(np.abs(cand) <= 1.0, axis=1)
        if np.count_nonzero(ok) < 0.05 * cand.shape[0]:
            scale *= 0.7
        kept.extend(cand[ok][: n - len(kept)])
    B = np.asarray(kept[:n])
    return cz.center + B @ cz.generators.T


# ---------------------------------------------------------------------------
# serialization

def to_dict(s):
    """JSON-ready dict; A and b appear only for constrained zonotopes."""
    d = {
        "center": s.center.tolist(),
        "generators": s.generators.tolist(),
    }
    if isinstance(s, ConstrainedZonotope):
        d["A"] = s.constraint_a.tolist()
        d["b"] = s.constraint_b.tolist()
    return d


def from_dict(d):
    if "A" in d or "b" in d:
        return ConstrainedZonotope(d["center"], d["generators"], d["A"], d["b"])
    return Zonotope(d["center"], d["generators"])
