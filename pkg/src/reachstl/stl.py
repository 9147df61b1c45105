"""STL fragment: predicates, parsing, monitoring and schedule compilation.

The fragment is G/F/Until with bounded windows plus conjunction (no
negation). Predicates are strip-shaped: h(x) = r - |H x - y| for linear
ones and h(x) = r - |g(x)| with a smooth expression vector g for nonlinear
ones; a predicate holds when every component is nonnegative.
"""

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import DataError, FormulaError, ScheduleError

_ROUND_EPS = 1e-9


class Predicate:
    """Named strip predicate; linear or nonlinear."""

    def __init__(self, name, r, H=None, y=None, exprs=None, dim=None):
        self.name = str(name)
        self.r = np.asarray(r, dtype=float).reshape(-1)
        if np.any(self.r < 0):
            raise ValueError(f"predicate {name}: r must be nonnegative")
        if H is not None:
            H = np.asarray(H, dtype=float)
            if H.ndim == 1:
                H = H.reshape(1, -1)
            y = np.asarray(y, dtype=float).reshape(-1)
            if H.shape[0] != self.r.size or y.size != self.r.size:
                raise ValueError(f"predicate {name}: H/y/r row mismatch")
            self.kind = "linear"
            self.H = H
            self.y = y
            self.exprs = None
            self.dim = H.shape[1]
        else:
            if not exprs:
                raise ValueError(f"predicate {name}: needs H or exprs")
            if len(exprs) != self.r.size:
                raise ValueError(f"predicate {name}: exprs/r length mismatch")
            if dim is None:
                raise ValueError(f"predicate {name}: nonlinear needs dim")
            self.kind = "nonlinear"
            self.H = None
            self.y = None
            self.exprs = tuple(exprs)
            self.dim = int(dim)

    @classmethod
    def linear(cls, name, H, y, r):
        return cls(name, r, H=H, y=y)

    @classmethod
    def nonlinear(cls, name, exprs, r, dim):
        return cls(name, r, exprs=exprs, dim=dim)

    def values(self, x):
        """Component values of h(x); the predicate holds iff all >= 0."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.kind == "linear":
            return self.r - np.abs(self.H @ x - self.y)
        inner = np.array([ex.evaluate(e, x) for e in self.exprs])
        return self.r - np.abs(inner)

    def values_batch(self, points):
        """(N, p) component values for an (N, dim) array of points."""
        X = np.asarray(points, dtype=float)
        if self.kind == "linear":
            return self.r - np.abs(X @ self.H.T - self.y)
        cols = [self.r[i] - np.abs(ex.evaluate_batch(e, X))
                for i, e in enumerate(self.exprs)]
        return np.column_stack(cols)

    def satisfied(self, x, margin=0.0):
        return bool(np.all(self.values(x) >= -margin))

    def satisfied_batch(self, points, margin=0.0):
        return np.all(self.values_batch(points) >= -margin, axis=1)

    def __repr__(self):
        return f"Predicate({self.name!r}, {self.kind})"


def predicate_to_dict(p):
    d = {"name": p.name, "kind": p.kind, "r": p.r.tolist()}
    if p.kind == "linear":
        d["H"] = p.H.tolist()
        d["y"] = p.y.tolist()
    else:
        d["h"] = [ex.to_text(e) for e in p.exprs]
        d["dim"] = p.dim
    return d


def predicate_from_dict(d):
    if d["kind"] == "linear":
        return Predicate.linear(d["name"], d["H"], d["y"], d["r"])
    exprs = [ex.parse_expr(t, d["dim"]) for t in d["h"]]
    return Predicate.nonlinear(d["name"], exprs, d["r"], d["dim"])


# ---------------------------------------------------------------------------
# formula AST

class StlFormula:
    __slots__ = ()


@dataclass(frozen=True)
class Pred(StlFormula):
    predicate: Predicate


def _check_window(a, b):
    if a < 0 or b < 0:
        raise FormulaError("window bounds must be nonnegative")
    if a > b:
        raise FormulaError(f"window [{a}, {b}] has a > b")
    if not np.isfinite(b):
        raise FormulaError("window must be bounded")


@dataclass(frozen=True)
class Always(StlFormula):
    a: float
    b: float
    child: StlFormula

    def __post_init__(self):
        _check_window(self.a, self.b)


@dataclass(frozen=True)
class Eventually(StlFormula):
    a: float
    b: float
    child: StlFormula

    def __post_init__(self):
        _check_window(self.a, self.b)


@dataclass(frozen=True)
class Until(StlFormula):
    a: float
    b: float
    left: StlFormula
    right: StlFormula

    def __post_init__(self):
        _check_window(self.a, self.b)


@dataclass(frozen=True)
class And(StlFormula):
    left: StlFormula
    right: StlFormula


# ---------------------------------------------------------------------------
# parsing / printing

class _FormulaParser:
    def __init__(self, text, table):
        self.text = text
        self.table = table
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _error(self, msg):
        raise FormulaError(f"{msg} at position {self.pos} in {self.text!r}")

    def _expect(self, ch):
        self._skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            self._error(f"expected {ch!r}")
        self.pos += 1

    def _peek(self):
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _number(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isdigit() or self.text[self.pos] in ".eE+-"
        ):
            # stop '-'/'+' from eating the next token when not an exponent sign
            if self.text[self.pos] in "+-" and self.pos > start and \
                    self.text[self.pos - 1] not in "eE":
                break
            self.pos += 1
        lex = self.text[start:self.pos]
        try:
            return float(lex)
        except ValueError:
            self._error(f"bad number {lex!r}")

    def _window(self):
        self._expect("[")
        a = self._number()
        self._expect(",")
        b = self._number()
        self._expect("]")
        return a, b

    def _name(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            self._error("expected a name")
        return self.text[start:self.pos]

    def parse(self):
        f = self._conj()
        self._skip_ws()
        if self.pos != len(self.text):
            self._error("trailing input")
        return f

    def _conj(self):
        f = self._unit()
        while self._peek() == "&":
            self.pos += 1
            f = And(f, self._unit())
        return f

    def _unit(self):
        ch = self._peek()
        if ch == "!":
            self._error("negation is outside the fragment")
        if ch == "(":
            self.pos += 1
            inner = self._conj()
            self._expect(")")
            if self._peek() == "U":
                self.pos += 1
                a, b = self._window()
                self._expect("(")
                right = self._conj()
                self._expect(")")
                return Until(a, b, inner, right)
            return inner
        name = self._name()
        if name in ("G", "F") and self._peek() == "[":
            a, b = self._window()
            self._expect("(")
            child = self._conj()
            self._expect(")")
            return Always(a, b, child) if name == "G" else Eventually(a, b, child)
        if name not in self.table:
            self._error(f"unknown predicate {name!r}")
        return Pred(self.table[name])


def parse_formula(text, predicate_table):
    """Parse formula text; predicate names resolve through the table."""
    return _FormulaParser(text, predicate_table).parse()


def _fmt_num(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def print_formula(f):
    """Inverse of parse_formula up to whitespace; And prints left-associated."""
    if isinstance(f, Pred):
        return f.predicate.name
    if isinstance(f, And):
        return f"{print_formula(f.left)} & {print_formula(f.right)}"
    if isinstance(f, Always):
        return f"G[{_fmt_num(f.a)},{_fmt_num(f.b)}]({print_formula(f.child)})"
    if isinstance(f, Eventually):
        return f"F[{_fmt_num(f.a)},{_fmt_num(f.b)}]({print_formula(f.child)})"
    if isinstance(f, Until):
        return (
            f"({print_formula(f.left)}) U[{_fmt_num(f.a)},{_fmt_num(f.b)}] "
            f"({print_formula(f.right)})"
        )
    raise TypeError(f"not a formula node: {f!r}")


def temporal_nodes(f):
    """F/U nodes in depth-first order; their positions key instantiations."""
    out = []

    def walk(node):
        if isinstance(node, (Eventually, Until)):
            out.append(node)
        if isinstance(node, And):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Always, Eventually)):
            walk(node.child)
        elif isinstance(node, Until):
            walk(node.left)
            walk(node.right)

    walk(f)
    return out


# ---------------------------------------------------------------------------
# monitoring

def _window_steps(lo_t, hi_t, dt):
    k_lo = int(np.ceil(lo_t / dt - _ROUND_EPS))
    k_hi = int(np.floor(hi_t / dt + _ROUND_EPS))
    return max(k_lo, 0), k_hi


def monitor(f, signal, dt, t=0.0):
    """Boolean satisfaction of f on a sampled signal starting at time t.

    Continuous windows [t+a, t+b] map to the sample indices k with
    t+a <= k dt <= t+b. Raises DataError when the signal is too short to
    cover a reachable window.
    """
    signal = np.asarray(signal, dtype=float)
    if signal.ndim == 1:
        signal = signal.reshape(-1, 1)
    n = signal.shape[0]

    def sat(node, t_now):
        if isinstance(node, Pred):
            k = int(round(t_now / dt))
            if k >= n:
                raise DataError(f"signal too short: needs sample {k}, has {n}")
            return node.predicate.satisfied(signal[k])
        if isinstance(node, And):
            return sat(node.left, t_now) and sat(node.right, t_now)
        if isinstance(node, (Always, Eventually)):
            k_lo, k_hi = _window_steps(t_now + node.a, t_now + node.b, dt)
            if k_hi >= n:
                raise DataError(
                    f"signal too short: window needs sample {k_hi}, has {n}"
                )
            steps = range(k_lo, k_hi + 1)
            if isinstance(node, Always):
                return all(sat(node.child, k * dt) for k in steps)
            return any(sat(node.child, k * dt) for k in steps)
        if isinstance(node, Until):
            k_lo, k_hi = _window_steps(t_now + node.a, t_now + node.b, dt)
            if k_hi >= n:
                raise DataError(
                    f"signal too short: window needs sample {k_hi}, has {n}"
                )
            k_now = int(np.ceil(t_now / dt - _ROUND_EPS))
            for k1 in range(k_lo, k_hi + 1):
                if not sat(node.right, k1 * dt):
                    continue
                if all(sat(node.left, k2 * dt) for k2 in range(max(k_now, 0), k1 + 1)):
                    return True
            return False
        raise TypeError(f"not a formula node: {node!r}")

    return sat(f, t)


def monitor_forced(f, signal, dt, t=0.0, instantiations=None):
    """Satisfaction where each instantiated F/U obligation holds throughout
    its declared step window (the side-information reading the schedule
    compiler assumes)."""
    insts = instantiations or {}
    order = {id(node): i for i, node in enumerate(temporal_nodes(f))}
    signal = np.asarray(signal, dtype=float)
    if signal.ndim == 1:
        signal = signal.reshape(-1, 1)

    def sat(node, t_now):
        if isinstance(node, Pred):
            k = int(round(t_now / dt))
            if k >= signal.shape[0]:
                raise DataError("signal too short")
            return node.predicate.satisfied(signal[k])
        if isinstance(node, And):
            return sat(node.left, t_now) and sat(node.right, t_now)
        if isinstance(node, Always):
            k_lo, k_hi = _window_steps(t_now + node.a, t_now + node.b, dt)
            return all(sat(node.child, k * dt) for k in range(k_lo, k_hi + 1))
        if isinstance(node, Eventually):
            key = order[id(node)]
            if key in insts:
                k1, k2 = insts[key]
                return all(sat(node.child, k * dt) for k in range(k1, k2 + 1))
            k_lo, k_hi = _window_steps(t_now + node.a, t_now + node.b, dt)
            return any(sat(node.child, k * dt) for k in range(k_lo, k_hi + 1))
        if isinstance(node, Until):
            key = order[id(node)]
            k_now = max(int(np.ceil(t_now / dt - _ROUND_EPS)), 0)
            if key in insts:
                k1, k2 = insts[key]
                right_ok = all(sat(node.right, k * dt) for k in range(k1, k2 + 1))
                left_ok = all(sat(node.left, k * dt) for k in range(k_now, k1 + 1))
                return right_ok and left_ok
            k_lo, k_hi = _window_steps(t_now + node.a, t_now + node.b, dt)
            for k1 in range(k_lo, k_hi + 1):
                if sat(node.right, k1 * dt) and all(
                    sat(node.left, k2 * dt) for k2 in range(k_now, k1 + 1)
                ):
                    return True
            return False
        raise TypeError(f"not a formula node: {node!r}")

    return sat(f, t)


# ---------------------------------------------------------------------------
# schedule compilation

class PredicateSchedule:
    """Per-step active predicates over steps 0..horizon."""

    def __init__(self, horizon, dt, active):
        self.horizon = int(horizon)
        self.dt = float(dt)
        if len(active) != self.horizon + 1:
            raise ScheduleError("active list must cover steps 0..horizon")
        self.active = [list(lst) for lst in active]

    def names_at(self, k):
        return [p.name for p in self.active[k]]

    def max_active_step(self):
        ks = [k for k, lst in enumerate(self.active) if lst]
        return max(ks) if ks else 0

    def __repr__(self):
        n_active = sum(len(lst) for lst in self.active)
        return f"PredicateSchedule(horizon={self.horizon}, activations={n_active})"


def compile_schedule(f, dt, horizon, instantiations=None,
                     assume_f_at_deadline=False):
    """Compile side information into per-step predicate activations.

    Windows round inward (a predicate is only scheduled at steps where the
    formula provably constrains the state). An instantiation window for an
    F/U node declares that the node's obligation holds throughout that step
    window; without one, F contributes nothing unless assume_f_at_deadline
    pins it to the deadline step, and Until contributes only the
    left-operand prefix implied by its lower window bound.
    """
    if dt <= 0:
        raise ScheduleError("dt must be positive")
    insts = dict(instantiations or {})
    order = {id(node): i for i, node in enumerate(temporal_nodes(f))}
    for key in insts:
        if key not in order.values():
            raise ScheduleError(f"instantiation for unknown temporal node {key}")
    active = [[] for _ in range(horizon + 1)]

    def put(pred, t_lo, t_hi):
        k_lo, k_hi = _window_steps(t_lo, t_hi, dt)
        if k_hi > horizon:
            raise ScheduleError(
                f"horizon {horizon} shorter than window ending at step {k_hi}"
            )
        for k in range(k_lo, k_hi + 1):
            if pred not in active[k]:
                active[k].append(pred)

    def walk(node, t_lo, t_hi):
        if isinstance(node, Pred):
            put(node.predicate, t_lo, t_hi)
            return
        if isinstance(node, And):
            walk(node.left, t_lo, t_hi)
            walk(node.right, t_lo, t_hi)
            return
        if isinstance(node, Always):
            walk(node.child, t_lo + node.a, t_hi + node.b)
            return
        if isinstance(node, Eventually):
            key = order[id(node)]
            if key in insts:
                k1, k2 = insts[key]
                w_lo, w_hi = k1 * dt, k2 * dt
                if k1 > k2 or w_lo < t_lo + node.a - _ROUND_EPS or \
                        w_hi > t_hi + node.b + _ROUND_EPS:
                    raise ScheduleError(
                        f"instantiation [{k1}, {k2}] outside window "
                        f"[{t_lo + node.a}, {t_hi + node.b}]"
                    )
                walk(node.child, w_lo, w_hi)
            elif assume_f_at_deadline and abs(t_hi - t_lo) < _ROUND_EPS:
                k = int(np.floor((t_lo + node.b) / dt + _ROUND_EPS))
                walk(node.child, k * dt, k * dt)
            return
        if isinstance(node, Until):
            key = order[id(node)]
            if key in insts:
                k1, k2 = insts[key]
                w_lo, w_hi = k1 * dt, k2 * dt
                if k1 > k2 or w_lo < t_lo + node.a - _ROUND_EPS or \
                        w_hi > t_hi + node.b + _ROUND_EPS:
                    raise ScheduleError(
                        f"instantiation [{k1}, {k2}] outside window "
                        f"[{t_lo + node.a}, {t_hi + node.b}]"
                    )
                walk(node.right, w_lo, w_hi)
                if t_hi <= w_lo + _ROUND_EPS:
                    walk(node.left, t_hi, w_lo)
            else:
                if t_hi <= t_lo + node.a + _ROUND_EPS:
                    walk(node.left, t_hi, t_lo + node.a)
            return
        raise TypeError(f"not a formula node: {node!r}")

    walk(f, 0.0, 0.0)
    return PredicateSchedule(horizon, dt, active)
