"""Scalar expression calculus for nonlinear predicate functions.

Expressions are immutable ASTs over +, -, *, /, unary minus, abs, sqrt,
integer powers (surface syntax `sq`) and `norm` (which desugars to the
sqrt of a sum of squares at parse time). They support point evaluation,
exact forward-mode gradients, natural interval evaluation, and interval
enclosures of the Hessian obtained by differentiating symbolically twice.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ExprDomainError, ExprSyntaxError, KinkError

EPS_KINK = 1e-12


class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # 0-based; prints as x{index+1}


@dataclass(frozen=True)
class Add(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Sub(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Div(Expr):
    a: Expr
    b: Expr


@dataclass(frozen=True)
class Neg(Expr):
    a: Expr


@dataclass(frozen=True)
class Abs(Expr):
    a: Expr


@dataclass(frozen=True)
class Sqrt(Expr):
    a: Expr


@dataclass(frozen=True)
class Pow(Expr):
    a: Expr
    k: int


@dataclass(frozen=True)
class IntervalScalar:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"interval [{self.lower}, {self.upper}] inverted")

    def contains(self, v, slack=0.0):
        return self.lower - slack <= v <= self.upper + slack


# ---------------------------------------------------------------------------
# smart constructors (used by differentiation to keep ASTs small)

def _add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(a, Const) and a.value == 0.0:
        return b
    if isinstance(b, Const) and b.value == 0.0:
        return a
    return Add(a, b)


def _sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if isinstance(b, Const) and b.value == 0.0:
        return a
    if isinstance(a, Const) and a.value == 0.0:
        return _neg(b)
    return Sub(a, b)


def _mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, Const):
        if a.value == 0.0:
            return Const(0.0)
        if a.value == 1.0:
            return b
    if isinstance(b, Const):
        if b.value == 0.0:
            return Const(0.0)
        if b.value == 1.0:
            return a
    return Mul(a, b)


def _div(a, b):
    if isinstance(a, Const) and a.value == 0.0:
        return Const(0.0)
    if isinstance(b, Const) and b.value == 1.0:
        return a
    return Div(a, b)


def _neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def _pow(a, k):
    if k == 0:
        return Const(1.0)
    if k == 1:
        return a
    return Pow(a, k)


# ---------------------------------------------------------------------------
# parsing

_FUNCS = ("abs", "sqrt", "norm", "sq")


class _Tokenizer:
    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1
        self.tokens = []
        self._scan()
        self.idx = 0

    def _error(self, msg, line=None, col=None):
        raise ExprSyntaxError(msg, line or self.line, col or self.col)

    def _scan(self):
        text = self.text
        i = 0
        line, col = 1, 1
        n = len(text)
        while i < n:
            ch = text[i]
            if ch == "\n":
                line += 1
                col = 1
                i += 1
                continue
            if ch.isspace():
                i += 1
                col += 1
                continue
            start_col = col
            if ch in "+-*/(),":
                self.tokens.append((ch, ch, line, start_col))
                i += 1
                col += 1
                continue
            if ch.isdigit() or ch == ".":
                j = i
                while j < n and (text[j].isdigit() or text[j] == "."):
                    j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
                lex = text[i:j]
                try:
                    val = float(lex)
                except ValueError:
                    raise ExprSyntaxError(f"bad number {lex!r}", line, start_col)
                self.tokens.append(("num", val, line, start_col))
                col += j - i
                i = j
                continue
            if ch.isalpha():
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                self.tokens.append(("name", text[i:j], line, start_col))
                col += j - i
                i = j
                continue
            raise ExprSyntaxError(f"unexpected character {ch!r}", line, start_col)
        self.tokens.append(("end", None, line, col))

    def peek(self):
        return self.tokens[self.idx]

    def next(self):
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok


class _Parser:
    def __init__(self, text, dim):
        self.toks = _Tokenizer(text)
        self.dim = dim

    def parse(self):
        e = self._expr()
        kind, _, line, col = self.toks.peek()
        if kind != "end":
            raise ExprSyntaxError("trailing input", line, col)
        return e

    def _expr(self):
        e = self._term()
        while True:
            kind, _, _, _ = self.toks.peek()
            if kind == "+":
                self.toks.next()
                e = Add(e, self._term())
            elif kind == "-":
                self.toks.next()
                e = Sub(e, self._term())
            else:
                return e

    def _term(self):
        e = self._factor()
        while True:
            kind, _, _, _ = self.toks.peek()
            if kind == "*":
                self.toks.next()
                e = Mul(e, self._factor())
            elif kind == "/":
                self.toks.next()
                e = Div(e, self._factor())
            else:
                return e

    def _factor(self):
        kind, val, line, col = self.toks.next()
        if kind == "num":
            return Const(val)
        if kind == "-":
            return Neg(self._factor())
        if kind == "(":
            e = self._expr()
            kind, _, line, col = self.toks.next()
            if kind != ")":
                raise ExprSyntaxError("expected ')'", line, col)
            return e
        if kind == "name":
            if val in _FUNCS:
                kind2, _, l2, c2 = self.toks.next()
                if kind2 != "(":
                    raise ExprSyntaxError(f"expected '(' after {val}", l2, c2)
                args = [self._expr()]
                while True:
                    kind2, _, l2, c2 = self.toks.next()
                    if kind2 == ")":
                        break
                    if kind2 != ",":
                        raise ExprSyntaxError("expected ',' or ')'", l2, c2)
                    args.append(self._expr())
                return self._apply(val, args, line, col)
            if val.startswith("x") and val[1:].isdigit():
                idx = int(val[1:])
                if idx < 1 or idx > self.dim:
                    raise ExprSyntaxError(
                        f"unknown variable {val} (dim {self.dim})", line, col
                    )
                return Var(idx - 1)
            raise ExprSyntaxError(f"unknown identifier {val!r}", line, col)
        raise ExprSyntaxError(f"unexpected token {kind!r}", line, col)

    def _apply(self, name, args, line, col):
        if name in ("abs", "sqrt", "sq") and len(args) != 1:
            raise ExprSyntaxError(f"{name} takes one argument", line, col)
        if name == "abs":
            return Abs(args[0])
        if name == "sqrt":
            return Sqrt(args[0])
        if name == "sq":
            return Pow(args[0], 2)
        # norm(a1, ..., ap) desugars to sqrt(sq(a1) + ... + sq(ap))
        acc = Pow(args[0], 2)
        for a in args[1:]:
            acc = Add(acc, Pow(a, 2))
        return Sqrt(acc)


def parse_expr(text, dim):
    """Parse expression text over variables x1..x{dim}."""
    if dim < 1:
        raise DimensionError("dim must be positive")
    return _Parser(text, dim).parse()


# ---------------------------------------------------------------------------
# printing

def to_text(e):
    """Render an expression; parse(to_text(e)) is structurally e for any
    parser-produced AST."""
    return _render(e, 0)


def _render(e, level):
    # levels: 0 additive, 1 multiplicative, 2 unary/atom
    if isinstance(e, Const):
        v = e.value
        s = repr(v) if v >= 0 else f"({v!r})"
        return s
    if isinstance(e, Var):
        return f"x{e.index + 1}"
    if isinstance(e, Add):
        s = f"{_render(e.a, 0)} + {_render(e.b, 1)}"
        return f"({s})" if level > 0 else s
    if isinstance(e, Sub):
        s = f"{_render(e.a, 0)} - {_render(e.b, 1)}"
        return f"({s})" if level > 0 else s
    if isinstance(e, Mul):
        s = f"{_render(e.a, 1)} * {_render(e.b, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(e, Div):
        s = f"{_render(e.a, 1)} / {_render(e.b, 2)}"
        return f"({s})" if level > 1 else s
    if isinstance(e, Neg):
        return f"-{_render(e.a, 2)}"
    if isinstance(e, Abs):
        return f"abs({_render(e.a, 0)})"
    if isinstance(e, Sqrt):
        return f"sqrt({_render(e.a, 0)})"
    if isinstance(e, Pow):
        if e.k == 2:
            return f"sq({_render(e.a, 0)})"
        # exponents above 2 only arise from differentiation; expand as a product
        return _render(Mul(e.a, _pow(e.a, e.k - 1)), level)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluation

def evaluate(e, x):
    """IEEE double evaluation at point x."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return _eval(e, x)


def _eval(e, x):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.index >= x.size:
            raise DimensionError(f"x{e.index + 1} out of range for dim {x.size}")
        return float(x[e.index])
    if isinstance(e, Add):
        return _eval(e.a, x) + _eval(e.b, x)
    if isinstance(e, Sub):
        return _eval(e.a, x) - _eval(e.b, x)
    if isinstance(e, Mul):
        return _eval(e.a, x) * _eval(e.b, x)
    if isinstance(e, Div):
        den = _eval(e.b, x)
        if den == 0.0:
            raise ExprDomainError("division by zero")
        return _eval(e.a, x) / den
    if isinstance(e, Neg):
        return -_eval(e.a, x)
    if isinstance(e, Abs):
        return abs(_eval(e.a, x))
    if isinstance(e, Sqrt):
        v = _eval(e.a, x)
        if v < 0.0:
            raise ExprDomainError(f"sqrt of negative value {v}")
        return np.sqrt(v)
    if isinstance(e, Pow):
        return _eval(e.a, x) ** e.k
    raise TypeError(f"not an expression node: {e!r}")


def evaluate_batch(e, points):
    """Evaluate at every row of an (N, dim) array at once."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    return _eval_batch(e, X)


def _eval_batch(e, X):
    if isinstance(e, Const):
        return np.full(X.shape[0], e.value)
    if isinstance(e, Var):
        if e.index >= X.shape[1]:
            raise DimensionError(f"x{e.index + 1} out of range for dim {X.shape[1]}")
        return X[:, e.index].copy()
    if isinstance(e, Add):
        return _eval_batch(e.a, X) + _eval_batch(e.b, X)
    if isinstance(e, Sub):
        return _eval_batch(e.a, X) - _eval_batch(e.b, X)
    if isinstance(e, Mul):
        return _eval_batch(e.a, X) * _eval_batch(e.b, X)
    if isinstance(e, Div):
        den = _eval_batch(e.b, X)
        if np.any(den == 0.0):
            raise ExprDomainError("division by zero")
        return _eval_batch(e.a, X) / den
    if isinstance(e, Neg):
        return -_eval_batch(e.a, X)
    if isinstance(e, Abs):
        return np.abs(_eval_batch(e.a, X))
    if isinstance(e, Sqrt):
        v = _eval_batch(e.a, X)
        if np.any(v < 0.0):
            raise ExprDomainError("sqrt of negative value")
        return np.sqrt(v)
    if isinstance(e, Pow):
        return _eval_batch(e.a, X) ** e.k
    raise TypeError(f"not an expression node: {e!r}")


def gradient(e, x):
    """Exact forward-mode gradient at x; raises KinkError at abs/sqrt kinks."""
    x = np.asarray(x, dtype=float).reshape(-1)
    _, g = _eval_grad(e, x)
    return g


def _eval_grad(e, x):
    if isinstance(e, Const):
        return e.value, np.zeros(x.size)
    if isinstance(e, Var):
        if e.index >= x.size:
            raise DimensionError(f"x{e.index + 1} out of range for dim {x.size}")
        g = np.zeros(x.size)
        g[e.index] = 1.0
        return float(x[e.index]), g
    if isinstance(e, Add):
        va, ga = _eval_grad(e.a, x)
        vb, gb = _eval_grad(e.b, x)
        return va + vb, ga + gb
    if isinstance(e, Sub):
        va, ga = _eval_grad(e.a, x)
        vb, gb = _eval_grad(e.b, x)
        return va - vb, ga - gb
    if isinstance(e, Mul):
        va, ga = _eval_grad(e.a, x)
        vb, gb = _eval_grad(e.b, x)
        return va * vb, va * gb + vb * ga
    if isinstance(e, Div):
        va, ga = _eval_grad(e.a, x)
        vb, gb = _eval_grad(e.b, x)
        if vb == 0.0:
            raise ExprDomainError("division by zero")
        return va / vb, (ga * vb - va * gb) / (vb * vb)
    if isinstance(e, Neg):
        v, g = _eval_grad(e.a, x)
        return -v, -g
    if isinstance(e, Abs):
        v, g = _eval_grad(e.a, x)
        if abs(v) < EPS_KINK:
            raise KinkError(f"abs evaluated at a kink (|arg| = {abs(v)})")
        return abs(v), np.sign(v) * g
    if isinstance(e, Sqrt):
        v, g = _eval_grad(e.a, x)
        if v < 0.0:
            raise ExprDomainError(f"sqrt of negative value {v}")
        if v < EPS_KINK:
            raise KinkError("sqrt differentiated at zero")
        s = np.sqrt(v)
        return s, g / (2.0 * s)
    if isinstance(e, Pow):
        v, g = _eval_grad(e.a, x)
        return v ** e.k, e.k * v ** (e.k - 1) * g
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# symbolic differentiation (for Hessian interval bounds)

def differentiate(e, i):
    """Symbolic partial derivative with respect to x{i+1}."""
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0) if e.index == i else Const(0.0)
    if isinstance(e, Add):
        return _add(differentiate(e.a, i), differentiate(e.b, i))
    if isinstance(e, Sub):
        return _sub(differentiate(e.a, i), differentiate(e.b, i))
    if isinstance(e, Mul):
        return _add(
            _mul(differentiate(e.a, i), e.b), _mul(e.a, differentiate(e.b, i))
        )
    if isinstance(e, Div):
        num = _sub(
            _mul(differentiate(e.a, i), e.b), _mul(e.a, differentiate(e.b, i))
        )
        return _div(num, _pow(e.b, 2))
    if isinstance(e, Neg):
        return _neg(differentiate(e.a, i))
    if isinstance(e, Abs):
        raise KinkError("abs is not differentiable; keep abs outside the smooth part")
    if isinstance(e, Sqrt):
        return _div(differentiate(e.a, i), _mul(Const(2.0), Sqrt(e.a)))
    if isinstance(e, Pow):
        return _mul(
            _mul(Const(float(e.k)), _pow(e.a, e.k - 1)), differentiate(e.a, i)
        )
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# interval evaluation

def _interval(lo, hi):
    return IntervalScalar(float(lo), float(hi))


def eval_interval(e, box):
    """Natural interval extension over an IntervalVector box.

    Sound: encloses evaluate(e, x) for every x in the box. Multiplication is
    the plain product rule (x*x over [-1,1] stays [-1,1]); even powers are
    evaluated tightly, so sq(x) over [-1,1] is [0,1].
    """
    return _ieval(e, box.lower, box.upper)


def _ieval(e, lo, hi):
    if isinstance(e, Const):
        return _interval(e.value, e.value)
    if isinstance(e, Var):
        if e.index >= lo.size:
            raise DimensionError(f"x{e.index + 1} out of range for dim {lo.size}")
        return _interval(lo[e.index], hi[e.index])
    if isinstance(e, Add):
        a = _ieval(e.a, lo, hi)
        b = _ieval(e.b, lo, hi)
        return _interval(a.lower + b.lower, a.upper + b.upper)
    if isinstance(e, Sub):
        a = _ieval(e.a, lo, hi)
        b = _ieval(e.b, lo, hi)
        return _interval(a.lower - b.upper, a.upper - b.lower)
    if isinstance(e, Mul):
        a = _ieval(e.a, lo, hi)
        b = _ieval(e.b, lo, hi)
        return _imul(a, b)
    if isinstance(e, Div):
        a = _ieval(e.a, lo, hi)
        b = _ieval(e.b, lo, hi)
        if b.lower <= 0.0 <= b.upper:
            raise ExprDomainError(
                f"denominator interval [{b.lower}, {b.upper}] contains zero"
            )
        return _imul(a, _interval(1.0 / b.upper, 1.0 / b.lower))
    if isinstance(e, Neg):
        a = _ieval(e.a, lo, hi)
        return _interval(-a.upper, -a.lower)
    if isinstance(e, Abs):
        a = _ieval(e.a, lo, hi)
        if a.lower >= 0.0:
            return a
        if a.upper <= 0.0:
            return _interval(-a.upper, -a.lower)
        return _interval(0.0, max(-a.lower, a.upper))
    if isinstance(e, Sqrt):
        a = _ieval(e.a, lo, hi)
        if a.lower < 0.0:
            raise ExprDomainError(
                f"sqrt over interval [{a.lower}, {a.upper}] with negative part"
            )
        return _interval(np.sqrt(a.lower), np.sqrt(a.upper))
    if isinstance(e, Pow):
        a = _ieval(e.a, lo, hi)
        if e.k % 2 == 1:
            return _interval(a.lower ** e.k, a.upper ** e.k)
        mlo, mhi = abs(a.lower), abs(a.upper)
        top = max(mlo, mhi) ** e.k
        if a.lower <= 0.0 <= a.upper:
            return _interval(0.0, top)
        return _interval(min(mlo, mhi) ** e.k, top)
    raise TypeError(f"not an expression node: {e!r}")


def _imul(a, b):
    cands = (
        a.lower * b.lower,
        a.lower * b.upper,
        a.upper * b.lower,
        a.upper * b.upper,
    )
    return _interval(min(cands), max(cands))


def hessian_interval(e, box):
    """Entrywise interval enclosures of the Hessian over the box.

    Differentiates symbolically twice, then interval-evaluates; requires e
    twice differentiable on the box (abs anywhere inside raises KinkError).
    """
    n = box.dim
    firsts = [differentiate(e, i) for i in range(n)]
    return [
        [eval_interval(differentiate(firsts[i], j), box) for j in range(n)]
        for i in range(n)
    ]
