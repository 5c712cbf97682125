"""Sparse multivariate polynomials with exact or floating-point coefficients.

A polynomial in ``n`` variables is stored as a dict mapping exponent tuples
(length ``n``) to nonzero coefficients.  Coefficients are either Python
``Fraction`` values (exact mode, used by oracle tests and identity checks) or
``float`` (the default, used by the sampling pipeline).  The term order used
everywhere for serialization is graded lexicographic, so printed polynomials
are canonical.

Expression syntax: variables are ``x1 .. xn``, operators ``+ - * / ^`` (``^``
and ``**`` both mean power), numeric literals may be integers, decimals or
ratios of integers.  Division is only allowed by constants.
"""

from __future__ import annotations

import ast
from fractions import Fraction

import numpy as np

from .errors import InputError

Exponents = tuple[int, ...]


def _grlex_key(exps: Exponents):
    return (sum(exps), exps)


class Poly:
    """Immutable sparse polynomial over ``Fraction`` or ``float`` coefficients."""

    __slots__ = ("nvars", "terms", "exact")

    def __init__(self, nvars: int, terms: dict | None = None, exact: bool = False):
        if nvars < 1:
            raise InputError("polynomial needs at least one variable")
        self.nvars = int(nvars)
        self.exact = bool(exact)
        clean = {}
        zero = Fraction(0) if exact else 0.0
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise InputError(f"bad exponent tuple {exps} for {nvars} variables")
            coeff = Fraction(coeff) if exact else float(coeff)
            if coeff != zero:
                clean[exps] = clean.get(exps, zero) + coeff
        self.terms = {e: c for e, c in clean.items() if c != zero}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int, exact: bool = False) -> "Poly":
        return cls(nvars, {}, exact)

    @classmethod
    def constant(cls, nvars: int, value, exact: bool = False) -> "Poly":
        return cls(nvars, {(0,) * nvars: value}, exact)

    @classmethod
    def variable(cls, nvars: int, index: int, exact: bool = False) -> "Poly":
        """The monomial ``x_{index}`` (0-based index)."""
        if not 0 <= index < nvars:
            raise InputError(f"variable index {index} out of range for {nvars} variables")
        exps = tuple(1 if j == index else 0 for j in range(nvars))
        return cls(nvars, {exps: 1}, exact)

    @classmethod
    def monomial(cls, nvars: int, exps: Exponents, coeff=1, exact: bool = False) -> "Poly":
        return cls(nvars, {tuple(exps): coeff}, exact)

    # -- basic queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        """Degree of the zero polynomial is reported as -1."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0) if self.exact else 0.0)

    def coefficient(self, exps: Exponents):
        return self.terms.get(tuple(exps), Fraction(0) if self.exact else 0.0)

    # -- arithmetic ----------------------------------------------------------

    def _check_compat(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise InputError("polynomials over different variable counts")

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.nvars, other, self.exact)
        self._check_compat(other)
        exact = self.exact and other.exact
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            terms[exps] = terms.get(exps, 0) + coeff
        return Poly(self.nvars, terms, exact)

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()}, self.exact)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.nvars, other, self.exact)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scaled(other)
        self._check_compat(other)
        exact = self.exact and other.exact
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                terms[exps] = terms.get(exps, 0) + c1 * c2
        return Poly(self.nvars, terms, exact)

    __rmul__ = __mul__
    __radd__ = __add__

    def scaled(self, factor) -> "Poly":
        if self.exact:
            factor = Fraction(factor)
        return Poly(self.nvars, {e: c * factor for e, c in self.terms.items()}, self.exact)

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise InputError("polynomial powers must be non-negative integers")
        result = Poly.constant(self.nvars, 1, self.exact)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(self.terms.items()))))

    # -- calculus ------------------------------------------------------------

    def diff(self, var: int) -> "Poly":
        """Exact partial derivative with respect to variable ``var`` (0-based)."""
        terms = {}
        for exps, coeff in self.terms.items():
            e = exps[var]
            if e == 0:
                continue
            new = list(exps)
            new[var] = e - 1
            terms[tuple(new)] = coeff * e
        return Poly(self.nvars, terms, self.exact)

    def truncated(self, max_degree: int) -> "Poly":
        """Keep only monomials of total degree <= ``max_degree``."""
        terms = {e: c for e, c in self.terms.items() if sum(e) <= max_degree}
        return Poly(self.nvars, terms, self.exact)

    def to_float(self) -> "Poly":
        if not self.exact:
            return self
        return Poly(self.nvars, {e: float(c) for e, c in self.terms.items()}, False)

    def compose_linear(self, matrix) -> "Poly":
        """Substitute ``x_i -> sum_j matrix[i, j] * y_j`` and expand.

        ``matrix`` has shape (nvars, m); the result is a polynomial in ``m``
        variables.  Used for rotating germs and for monomials in normal
        coordinates of a linear subspace.
        """
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape[0] != self.nvars:
            raise InputError("substitution matrix row count must equal variable count")
        m = matrix.shape[1]
        linear_forms = [
            Poly(m, {tuple(1 if j == k else 0 for k in range(m)): matrix[i, j]
                     for j in range(m) if matrix[i, j] != 0.0})
            for i in range(self.nvars)
        ]
        result = Poly.zero(m)
        for exps, coeff in self.terms.items():
            term = Poly.constant(m, float(coeff))
            for i, e in enumerate(exps):
                if e:
                    term = term * (linear_forms[i] ** e)
            result = result + term
        return result

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, point):
        """Evaluate at a single point; exact when coefficients and point are exact.

        Sparse evaluation with per-variable power tables, so each power is
        formed by one multiplication from the previous one.
        """
        if len(point) != self.nvars:
            raise InputError(f"point has {len(point)} coordinates, expected {self.nvars}")
        if not self.terms:
            return Fraction(0) if self.exact else 0.0
        max_exp = [0] * self.nvars
        for exps in self.terms:
            for j, e in enumerate(exps):
                if e > max_exp[j]:
                    max_exp[j] = e
        one = Fraction(1) if self.exact else 1.0
        tables = []
        for j in range(self.nvars):
            pows = [one]
            for _ in range(max_exp[j]):
                pows.append(pows[-1] * point[j])
            tables.append(pows)
        total = Fraction(0) if self.exact else 0.0
        for exps, coeff in self.terms.items():
            term = coeff
            for j, e in enumerate(exps):
                if e:
                    term = term * tables[j][e]
            total = total + term
        return total

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at many points at once; ``points`` has shape (N, nvars).

        Single-point batches take a scalar path: the optimization loops in
        the condition engine evaluate one point per call, where per-array
        numpy overhead would dominate.
        """
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.nvars:
            raise InputError(f"batch shape {points.shape} incompatible with {self.nvars} variables")
        n_pts = points.shape[0]
        if not self.terms:
            return np.zeros(n_pts)
        if n_pts == 1:
            value = self.evaluate([float(v) for v in points[0]])
            return np.array([value])
        max_exp = [0] * self.nvars
        for exps in self.terms:
            for j, e in enumerate(exps):
                if e > max_exp[j]:
                    max_exp[j] = e
        tables = []
        for j in range(self.nvars):
            col = points[:, j]
            pows = [np.ones(n_pts)]
            for _ in range(max_exp[j]):
                pows.append(pows[-1] * col)
            tables.append(pows)
        total = np.zeros(n_pts)
        for exps, coeff in self.terms.items():
            term = None
            for j, e in enumerate(exps):
                if e:
                    term = tables[j][e] if term is None else term * tables[j][e]
            total += float(coeff) if term is None else float(coeff) * term
        return total

    # -- serialization ------------------------------------------------------

    def sorted_terms(self):
        """Terms in descending graded lexicographic order."""
        return sorted(self.terms.items(), key=lambda item: _grlex_key(item[0]), reverse=True)

    def to_string(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for exps, coeff in self.sorted_terms():
            factors = []
            for j, e in enumerate(exps):
                if e == 1:
                    factors.append(f"x{j + 1}")
                elif e > 1:
                    factors.append(f"x{j + 1}^{e}")
            if isinstance(coeff, Fraction):
                cstr = str(coeff)
            else:
                cstr = repr(float(coeff))
            if factors:
                body = "*".join(factors)
                if coeff == 1:
                    text = body
                elif coeff == -1:
                    text = f"-{body}"
                else:
                    text = f"{cstr}*{body}"
            else:
                text = cstr
            pieces.append(text)
        out = pieces[0]
        for piece in pieces[1:]:
            if piece.startswith("-"):
                out += " - " + piece[1:]
            else:
                out += " + " + piece
        return out

    def __repr__(self):
        return f"Poly({self.nvars}, {self.to_string()!r})"


# -- expression parsing ----------------------------------------------------


def _parse_constant(node, exact: bool):
    """Evaluate a constant sub-expression (numbers combined by + - * / ^)."""
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        if isinstance(node.value, int):
            return Fraction(node.value)
        return Fraction(str(node.value))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        val = _parse_constant(node.operand, exact)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
        left = _parse_constant(node.left, exact)
        right = _parse_constant(node.right, exact)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if right == 0:
                raise InputError("division by zero in constant")
            return left / right
        if right.denominator != 1 or right < 0:
            raise InputError("constant powers must be non-negative integers")
        return left ** int(right)
    raise InputError("expression is not a constant")


def _is_constant(node) -> bool:
    try:
        _parse_constant(node, False)
        return True
    except InputError:
        return False


def _node_to_poly(node, nvars: int, exact: bool) -> Poly:
    if _is_constant(node):
        value = _parse_constant(node, exact)
        return Poly.constant(nvars, value if exact else float(value), exact)
    if isinstance(node, ast.Name):
        name = node.id
        if not (name.startswith("x") and name[1:].isdigit()):
            raise InputError(f"unknown variable {name!r}; use x1..x{nvars}")
        idx = int(name[1:])
        if not 1 <= idx <= nvars:
            raise InputError(f"variable {name!r} out of range; expression has n={nvars}")
        return Poly.variable(nvars, idx - 1, exact)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _node_to_poly(node.operand, nvars, exact)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Add):
            return _node_to_poly(node.left, nvars, exact) + _node_to_poly(node.right, nvars, exact)
        if isinstance(node.op, ast.Sub):
            return _node_to_poly(node.left, nvars, exact) - _node_to_poly(node.right, nvars, exact)
        if isinstance(node.op, ast.Mult):
            return _node_to_poly(node.left, nvars, exact) * _node_to_poly(node.right, nvars, exact)
        if isinstance(node.op, ast.Div):
            if not _is_constant(node.right):
                raise InputError("division only by constants")
            divisor = _parse_constant(node.right, exact)
            if divisor == 0:
                raise InputError("division by zero")
            factor = 1 / divisor if exact else 1.0 / float(divisor)
            return _node_to_poly(node.left, nvars, exact).scaled(factor)
        if isinstance(node.op, ast.Pow):
            exponent = _parse_constant(node.right, exact)
            if exponent.denominator != 1 or exponent < 0:
                raise InputError("polynomial powers must be non-negative integers")
            return _node_to_poly(node.left, nvars, exact) ** int(exponent)
    raise InputError(f"unsupported syntax element {ast.dump(node)[:60]}")


def parse_poly(text: str, nvars: int, exact: bool = False) -> Poly:
    """Parse an expression like ``"x1^2 + 2*x1*x2 - x2^3/3"`` into a Poly."""
    source = text.replace("^", "**").strip()
    if not source:
        raise InputError("empty polynomial expression")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse polynomial {text!r}: {exc.msg}") from exc
    return _node_to_poly(tree.body, nvars, exact)


def infer_nvars(texts) -> int:
    """Largest variable index appearing in any of the expressions."""
    best = 0
    for text in texts:
        source = text.replace("^", "**")
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise InputError(f"cannot parse polynomial {text!r}: {exc.msg}") from exc
        for node in ast.walk(tree):
            if isinstance(node, ast.Name) and node.id.startswith("x") and node.id[1:].isdigit():
                best = max(best, int(node.id[1:]))
    if best == 0:
        raise InputError("no variables x1.. found in expressions")
    return best


# -- fractional power expressions in one parameter t ------------------------


def _node_to_powers(node) -> dict:
    """Reduce an expression in ``t`` to {power (Fraction): coefficient (float)}."""
    if _is_constant(node):
        value = float(_parse_constant(node, False))
        return {Fraction(0): value} if value != 0.0 else {}
    if isinstance(node, ast.Name):
        if node.id != "t":
            raise InputError(f"arc expressions use the single parameter t, got {node.id!r}")
        return {Fraction(1): 1.0}
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _node_to_powers(node.operand)
        if isinstance(node.op, ast.USub):
            return {q: -c for q, c in inner.items()}
        return inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, (ast.Add, ast.Sub)):
            left = _node_to_powers(node.left)
            right = _node_to_powers(node.right)
            sign = 1.0 if isinstance(node.op, ast.Add) else -1.0
            for q, c in right.items():
                left[q] = left.get(q, 0.0) + sign * c
            return {q: c for q, c in left.items() if c != 0.0}
        if isinstance(node.op, ast.Mult):
            left = _node_to_powers(node.left)
            right = _node_to_powers(node.right)
            out: dict = {}
            for q1, c1 in left.items():
                for q2, c2 in right.items():
                    q = q1 + q2
                    out[q] = out.get(q, 0.0) + c1 * c2
            return {q: c for q, c in out.items() if c != 0.0}
        if isinstance(node.op, ast.Div):
            if not _is_constant(node.right):
                raise InputError("division only by constants")
            divisor = float(_parse_constant(node.right, False))
            if divisor == 0.0:
                raise InputError("division by zero")
            return {q: c / divisor for q, c in _node_to_powers(node.left).items()}
        if isinstance(node.op, ast.Pow):
            exponent = _parse_constant(node.right, False)
            base = _node_to_powers(node.left)
            if list(base.values()) and len(base) == 1:
                (q, c), = base.items()
                if exponent.denominator == 1 and exponent >= 0:
                    k = int(exponent)
                    return {q * k: c ** k}
                if c < 0:
                    raise InputError("fractional power of a negative coefficient")
                return {q * exponent: float(c) ** float(exponent)}
            raise InputError("powers apply to single terms in arc expressions")
    raise InputError(f"unsupported arc syntax {ast.dump(node)[:60]}")


def parse_arc_component(text: str) -> tuple:
    """Parse one arc coordinate like ``"t^2 - t^(5/2)"``.

    Returns a tuple of (power, coefficient) pairs sorted by power; powers are
    Fractions and must be positive so the arc passes through the origin.
    """
    source = text.replace("^", "**").strip()
    if not source:
        raise InputError("empty arc expression")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse arc component {text!r}: {exc.msg}") from exc
    powers = _node_to_powers(tree.body)
    for q in powers:
        if q <= 0:
            raise InputError("arc components need strictly positive powers of t (gamma(0)=0)")
    return tuple(sorted(powers.items()))


def eval_arc_component(component, t_values: np.ndarray) -> np.ndarray:
    """Evaluate a parsed arc component on an array of parameter values t >= 0."""
    t_values = np.asarray(t_values, dtype=float)
    out = np.zeros_like(t_values)
    for power, coeff in component:
        out += coeff * np.power(t_values, float(power))
    return out
