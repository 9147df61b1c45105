"""Strip intersections with guaranteed over-approximation.

Implements the measurement-update style intersection of a reachable set
with linear strips |Hx - y| <= r and nonlinear strips |h(x)| <= r. The
nonlinear case linearizes h at the set center and soundly encloses the
linearization error with a Lagrange remainder computed from interval
Hessian bounds over the set's interval hull. Containment of the true
intersection holds for every gain matrix; the "auto" gain minimizes the
Frobenius norm of the resulting generator matrix.
"""

import numpy as np

from . import expr as ex
from . import reach as rc
from .errors import DimensionError, ReachStlError
from .setalg import (
    ConstrainedZonotope,
    Zonotope,
    interval_hull,
    lift,
)


class LagrangeRemainder:
    """Interval enclosure (center/generator form) of the Taylor remainder."""

    def __init__(self, center, generators):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.generators = np.asarray(generators, dtype=float)
        if self.generators.ndim == 1:
            self.generators = self.generators.reshape(-1, 1)
        if self.generators.shape[0] != self.center.size:
            raise DimensionError("remainder generator row mismatch")


def _tag_predicate(name, err):
    raise type(err)(f"predicate {name}: {err}") from err


def _imul(a, b):
    c = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(c), max(c)


def _isquare(a):
    lo, hi = abs(a[0]), abs(a[1])
    top = max(lo, hi) ** 2
    if a[0] <= 0.0 <= a[1]:
        return 0.0, top
    return min(lo, hi) ** 2, top


def lagrange_remainder(exprs, x_star, box):
    """Bound R(x) = 1/2 (x - x*)^T H(xi) (x - x*) over xi, x in the box.

    Componentwise interval arithmetic on the quadratic form; diagonal terms
    use the tight even-power rule so quadratics come out exact.
    """
    x_star = np.asarray(x_star, dtype=float).reshape(-1)
    if np.any(x_star < box.lower - 1e-12) or np.any(x_star > box.upper + 1e-12):
        raise ValueError("linearization point must lie inside the box")
    n = box.dim
    deltas = [(box.lower[i] - x_star[i], box.upper[i] - x_star[i])
              for i in range(n)]
    centers = []
    radii = []
    for e in exprs:
        H = ex.hessian_interval(e, box)
        total = (0.0, 0.0)
        for i in range(n):
            hii = (H[i][i].lower, H[i][i].upper)
            term = _imul(hii, _isquare(deltas[i]))
            total = (total[0] + term[0], total[1] + term[1])
            for j in range(i + 1, n):
                hij = (H[i][j].lower, H[i][j].upper)
                cross = _imul(hij, _imul(deltas[i], deltas[j]))
                # symmetric pair contributes twice
                total = (total[0] + 2 * cross[0], total[1] + 2 * cross[1])
        lo, hi = 0.5 * total[0], 0.5 * total[1]
        centers.append(0.5 * (lo + hi))
        radii.append(0.5 * (hi - lo))
    return LagrangeRemainder(np.array(centers), np.diag(radii))


def auto_gain(generators, jac, r, remainder_generators=None):
    """Gain minimizing the Frobenius norm of the updated generator matrix.

    Closed form from the normal equations; falls back to the zero gain
    (sound: output equals input) when they are singular or when numerical
    conditioning would make the candidate worse than doing nothing.
    """
    n, p = generators.shape[0], jac.shape[0]
    r = np.asarray(r, dtype=float)
    GJt = generators @ generators.T @ jac.T
    S = jac @ GJt + np.diag(r ** 2)
    if remainder_generators is not None and remainder_generators.size:
        S = S + remainder_generators @ remainder_generators.T
    zero = np.zeros((n, p))
    try:
        lam = np.linalg.solve(S.T, GJt.T).T
    except np.linalg.LinAlgError:
        return zero
    if not np.all(np.isfinite(lam)):
        return zero

    def objective(g):
        total = np.linalg.norm((np.eye(n) - g @ jac) @ generators) ** 2
        total += np.linalg.norm(g @ np.diag(r)) ** 2
        if remainder_generators is not None and remainder_generators.size:
            total += np.linalg.norm(g @ remainder_generators) ** 2
        return total

    return lam if objective(lam) <= objective(zero) else zero


def _resolve_gain(lam, generators, jac, r, rem_gens=None):
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"unknown gain mode {lam!r}")
        return auto_gain(generators, jac, r, rem_gens)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (generators.shape[0], jac.shape[0]):
        raise DimensionError(
            f"gain shape {lam.shape} != ({generators.shape[0]}, {jac.shape[0]})"
        )
    if not np.all(np.isfinite(lam)):
        raise ValueError("gain matrix must be finite")
    return lam


def _strip_inactive_linear(zbar, H, y, r):
    """True when the whole set provably satisfies |Hx - y| <= r."""
    span = np.abs(H @ zbar.center - y) + np.sum(np.abs(H @ zbar.generators), axis=1)
    return bool(np.all(span <= r))


def _strip_inactive_nonlinear(zbar, pred):
    box = interval_hull(zbar)
    try:
        for e, r in zip(pred.exprs, pred.r):
            iv = ex.eval_interval(e, box)
            if iv.lower < -r or iv.upper > r:
                return False
    except ReachStlError:
        return False
    return True


def intersect_zono_linear(zbar, pred, lam="auto"):
    """Over-approximate zbar intersected with the strip |Hx - y| <= r.

    The auto gain falls back to zero when the strip provably contains the
    whole set (the intersection is the set itself; updating would only add
    generator columns).
    """
    if pred.kind != "linear":
        raise ValueError(f"predicate {pred.name} is not linear")
    H, y, r = pred.H, pred.y, pred.r
    if H.shape[1] != zbar.dim:
        raise DimensionError("strip dimension mismatch")
    G = zbar.generators
    if isinstance(lam, str) and lam == "auto" and _strip_inactive_linear(zbar, H, y, r):
        return zbar
    lam = _resolve_gain(lam, G, H, r)
    c_new = zbar.center + lam @ (y - H @ zbar.center)
    g_new = np.hstack([(np.eye(zbar.dim) - lam @ H) @ G, lam @ np.diag(r)])
    return Zonotope(c_new, g_new)


def intersect_zono_nonlinear(zbar, pred, lam="auto", x_star=None):
    """Over-approximate zbar intersected with the strip |h(x)| <= r.

    Linearizes h at the set center; the Lagrange remainder over the set's
    interval hull keeps the result a superset for any gain.
    """
    if pred.kind != "nonlinear":
        raise ValueError(f"predicate {pred.name} is not nonlinear")
    if pred.dim != zbar.dim:
        raise DimensionError("strip dimension mismatch")
    if isinstance(lam, str) and lam == "auto" and _strip_inactive_nonlinear(zbar, pred):
        return zbar
    x_star = zbar.center if x_star is None else np.asarray(x_star, dtype=float)
    box = interval_hull(zbar)
    try:
        jac = np.array([ex.gradient(e, x_star) for e in pred.exprs])
        h_star = np.array([ex.evaluate(e, x_star) for e in pred.exprs])
        rem = lagrange_remainder(pred.exprs, x_star, box)
    except ReachStlError as err:
        _tag_predicate(pred.name, err)
    G = zbar.generators
    lam = _resolve_gain(lam, G, jac, pred.r, rem.generators)
    c_new = zbar.center - lam @ (
        h_star + jac @ (zbar.center - x_star) + rem.center
    )
    g_new = np.hstack([
        (np.eye(zbar.dim) - lam @ jac) @ G,
        lam @ np.diag(pred.r),
        -lam @ rem.generators,
    ])
    return Zonotope(c_new, g_new)


def intersect_cz_linear(cbar, pred):
    """Exact intersection of a constrained zonotope with a linear strip."""
    if pred.kind != "linear":
        raise ValueError(f"predicate {pred.name} is not linear")
    cbar = lift(cbar)
    H, y, r = pred.H, pred.y, pred.r
    if H.shape[1] != cbar.dim:
        raise DimensionError("strip dimension mismatch")
    p = r.size
    G, A, b = cbar.generators, cbar.constraint_a, cbar.constraint_b
    nc = A.shape[0]
    g_new = np.hstack([G, np.zeros((cbar.dim, p))])
    a_new = np.vstack([
        np.hstack([A, np.zeros((nc, p))]),
        np.hstack([H @ G, -np.diag(r)]),
    ])
    b_new = np.concatenate([b, y - H @ cbar.center])
    return ConstrainedZonotope(cbar.center, g_new, a_new, b_new)


def intersect_cz_nonlinear(cbar, pred, x_star=None):
    """Constrained-zonotope intersection with a nonlinear strip.

    The Lagrange remainder is taken over the interval hull of the
    enclosing zonotope (constraints ignored), which is sound.
    """
    if pred.kind != "nonlinear":
        raise ValueError(f"predicate {pred.name} is not nonlinear")
    cbar = lift(cbar)
    if pred.dim != cbar.dim:
        raise DimensionError("strip dimension mismatch")
    x_star = cbar.center if x_star is None else np.asarray(x_star, dtype=float)
    box = interval_hull(cbar.enclosing_zonotope())
    try:
        jac = np.array([ex.gradient(e, x_star) for e in pred.exprs])
        h_star = np.array([ex.evaluate(e, x_star) for e in pred.exprs])
        rem = lagrange_remainder(pred.exprs, x_star, box)
    except ReachStlError as err:
        _tag_predicate(pred.name, err)
    p = pred.r.size
    gl = rem.generators
    G, A, b = cbar.generators, cbar.constraint_a, cbar.constraint_b
    nc = A.shape[0]
    g_new = np.hstack([G, np.zeros((cbar.dim, p + gl.shape[1]))])
    a_new = np.vstack([
        np.hstack([A, np.zeros((nc, p + gl.shape[1]))]),
        np.hstack([jac @ G, -np.diag(pred.r), gl]),
    ])
    b_new = np.concatenate([
        b,
        -h_star - jac @ (cbar.center - x_star) - rem.center,
    ])
    return ConstrainedZonotope(cbar.center, g_new, a_new, b_new)


def sqrt_free_form(pred):
    """Set-equivalent predicate with sqrt-rooted components squared away.

    |sqrt(u)| <= r equals |u| <= r^2 on the sqrt domain (u >= 0), so a
    norm-style strip can be folded through its quadratic form, whose
    constant Hessian makes the Lagrange remainder exact. Returns the
    predicate unchanged when nothing is sqrt-rooted.
    """
    if pred.kind != "nonlinear":
        return pred
    changed = False
    exprs = []
    r = pred.r.copy()
    for i, e in enumerate(pred.exprs):
        if isinstance(e, ex.Sqrt):
            exprs.append(e.a)
            r[i] = r[i] ** 2
            changed = True
        else:
            exprs.append(e)
    if not changed:
        return pred
    from .stl import Predicate

    return Predicate.nonlinear(pred.name, exprs, r, pred.dim)


def constrain_zono(zset, predicates, lam="auto"):
    """Fold the active predicates over a zonotope, in declaration order.

    Nonlinear strips fold through their sqrt-free form (same point set,
    exact remainder for quadratics).
    """
    out = zset
    for pred in predicates:
        if pred.kind == "linear":
            out = intersect_zono_linear(out, pred, lam)
        else:
            out = intersect_zono_nonlinear(out, sqrt_free_form(pred), lam)
    return out


def constrain_cz(cset, predicates):
    """Fold the active predicates over a constrained zonotope."""
    out = lift(cset)
    for pred in predicates:
        if pred.kind == "linear":
            out = intersect_cz_linear(out, pred)
        else:
            out = intersect_cz_nonlinear(out, sqrt_free_form(pred))
    return out


def apply_schedule_zono(sets, sched, lam="auto"):
    """Post-hoc constraining: fold each step's active strips over its set."""
    if len(sets) < sched.horizon + 1:
        raise DimensionError(
            f"need {sched.horizon + 1} sets for horizon {sched.horizon}, "
            f"got {len(sets)}"
        )
    out = list(sets)
    for k in range(sched.horizon + 1):
        out[k] = constrain_zono(sets[k], sched.active[k], lam)
    return out


def apply_schedule_cz(sets, sched):
    """Post-hoc constraining with constrained zonotopes; inputs are lifted."""
    if len(sets) < sched.horizon + 1:
        raise DimensionError(
            f"need {sched.horizon + 1} sets for horizon {sched.horizon}, "
            f"got {len(sets)}"
        )
    out = [lift(s) for s in sets]
    for k in range(sched.horizon + 1):
        out[k] = constrain_cz(out[k], sched.active[k])
    return out


def stl_reach(config, dataset, sched, lam="auto", feedback=True):
    """Interleaved pipeline: reachability recursion under side information.

    Per step the data-driven set is constrained by the scheduled strips;
    with feedback (default) the constrained zonotope seeds the next
    recursion step, matching the per-step satisfaction in the constrained
    reachability problem. The constrained-zonotope branch constrains the
    same incoming set, so it is never looser than the zonotope branch.
    Returns dict with keys "data_driven", "stl_zono", "stl_cz".
    """
    z_w = config.noise_zonotope
    lip, rad = config.resolve_lipschitz(dataset)
    z_eps = rc.lipschitz_zonotope(lip, rad, dataset.state_dim)
    m_w = rc.build_noise_matrix_zonotope(z_w, dataset.n_points)

    data_driven = [config.initial_set]
    stl_zono = [constrain_zono(config.initial_set, sched.active[0], lam)]
    stl_cz = [constrain_cz(lift(config.initial_set), sched.active[0])]

    for k in range(1, config.horizon + 1):
        seed = stl_zono[-1] if feedback else data_driven[-1]
        u_set = config.input_set(k)
        model = rc.fit_model(dataset, seed.center, u_set.center, m_w)
        z_l = rc.residual_zonotope(dataset, model, m_w, z_w)
        nxt = rc.reach_step(seed, u_set, model, z_l, z_eps, z_w, config.max_order)
        data_driven.append(nxt)
        active = sched.active[k] if k <= sched.horizon else []
        stl_zono.append(constrain_zono(nxt, active, lam))
        stl_cz.append(constrain_cz(lift(nxt), active))
    return {"data_driven": data_driven, "stl_zono": stl_zono, "stl_cz": stl_cz}
