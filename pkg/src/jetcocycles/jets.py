"""Truncated multivariate jet arithmetic over exact and floating scalars.

A jet is the Taylor expansion of a smooth function at a point, truncated at a
fixed total order ``p``.  Coefficients are stored *monomially*: the entry for
the multi-index ``a`` is ``d^a f / a!``, so that composition is plain
polynomial substitution.  Storage is dense in graded lexicographic order; with
dimensions up to 6 and order 4 there are at most 210 entries per jet.

Two scalar backends flow through the same code paths: exact rationals
(``fractions.Fraction``, mixed freely with ``int``) and ``float``.  Nothing in
this module branches on the backend; exactness is a property of the inputs.
All jets are immutable after construction and every operation is pure.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

Scalar = Union[int, Fraction, float]

__all__ = [
    "Jet",
    "JetShapeError",
    "SingularJacobianError",
    "EvaluationError",
    "Polynomial",
    "jet_compose",
    "jet_invert",
    "mat_inv",
    "mat_det",
    "monomials",
    "monomial_index",
]


def _exact_div(a: Scalar, b: Scalar) -> Scalar:
    """Division that keeps int/int exact instead of decaying to float."""
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


class JetShapeError(ValueError):
    """Dimension, order or arity mismatch between jets."""


class SingularJacobianError(ArithmeticError):
    """A linear part that must be invertible is singular."""


class EvaluationError(RuntimeError):
    """A map or function could not be evaluated where requested."""


# ---------------------------------------------------------------------------
# multi-index tables


def _compositions(total: int, dim: int):
    if dim == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, dim - 1):
            yield (head,) + tail


@lru_cache(maxsize=None)
def monomials(dim: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All exponent multi-indices with |a| <= order, graded lexicographic."""
    out: list[tuple[int, ...]] = []
    for total in range(order + 1):
        out.extend(sorted(_compositions(total, dim)))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(dim: int, order: int) -> dict[tuple[int, ...], int]:
    return {m: i for i, m in enumerate(monomials(dim, order))}


@lru_cache(maxsize=None)
def _mul_table(dim: int, order: int):
    """pair (i, j) -> target slot for monomial products, -1 when truncated.

    Returned as nested tuples; built only for shapes small enough to afford
    the quadratic table, larger shapes fall back to dict lookups.
    """
    monos = monomials(dim, order)
    if len(monos) > 600:
        return None
    idx = monomial_index(dim, order)
    rows = []
    for a in monos:
        ta = sum(a)
        row = []
        for b in monos:
            if ta + sum(b) > order:
                row.append(-1)
            else:
                row.append(idx[tuple(x + y for x, y in zip(a, b))])
        rows.append(tuple(row))
    return tuple(rows)


# ---------------------------------------------------------------------------
# the jet itself


class Jet:
    """Dense truncated Taylor expansion at a point.

    ``coeffs[i]`` is the monomial coefficient of ``monomials(dim, order)[i]``;
    the constant term is the value at the base point.  Jets do not remember
    their base point; callers keep track of where they live.
    """

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, order: int, coeffs: Sequence[Scalar]):
        n = len(monomials(dim, order))
        if len(coeffs) != n:
            raise JetShapeError(
                f"expected {n} coefficients for dim={dim} order={order}, got {len(coeffs)}"
            )
        self.dim = dim
        self.order = order
        self.coeffs = tuple(coeffs)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(dim: int, order: int, value: Scalar) -> "Jet":
        c = [0] * len(monomials(dim, order))
        c[0] = value
        return Jet(dim, order, c)

    @staticmethod
    def variable(dim: int, order: int, axis: int, base: Scalar = 0) -> "Jet":
        """Jet of the coordinate function x_axis at a point with that value."""
        if not 0 <= axis < dim:
            raise JetShapeError(f"axis {axis} out of range for dim {dim}")
        c = [0] * len(monomials(dim, order))
        c[0] = base
        if order >= 1:
            unit = tuple(1 if k == axis else 0 for k in range(dim))
            c[monomial_index(dim, order)[unit]] = 1
        return Jet(dim, order, c)

    @staticmethod
    def zero(dim: int, order: int) -> "Jet":
        return Jet.constant(dim, order, 0)

    # -- basic queries -----------------------------------------------------

    @property
    def value(self) -> Scalar:
        return self.coeffs[0]

    def coefficient(self, alpha: tuple[int, ...]) -> Scalar:
        return self.coeffs[monomial_index(self.dim, self.order)[tuple(alpha)]]

    def is_zero(self, tol: float = 0.0) -> bool:
        if tol:
            return all(abs(c) <= tol for c in self.coeffs)
        return all(c == 0 for c in self.coeffs)

    def max_abs(self) -> Scalar:
        return max((abs(c) for c in self.coeffs), default=0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Jet)
            and self.dim == other.dim
            and self.order == other.order
            and all(a == b for a, b in zip(self.coeffs, other.coeffs))
        )

    def __hash__(self):
        return hash((self.dim, self.order, self.coeffs))

    def __repr__(self):
        terms = []
        for m, c in zip(monomials(self.dim, self.order), self.coeffs):
            if c != 0:
                terms.append(f"{c}*u^{m}")
        return f"Jet({self.dim},{self.order}: {' + '.join(terms) or '0'})"

    # -- ring operations ---------------------------------------------------

    def _check(self, other: "Jet"):
        if self.dim != other.dim or self.order != other.order:
            raise JetShapeError(
                f"jet shape mismatch: ({self.dim},{self.order}) vs ({other.dim},{other.order})"
            )

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.dim, self.order, [a + b for a, b in zip(self.coeffs, other.coeffs)])
        return self + Jet.constant(self.dim, self.order, other)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.dim, self.order, [-a for a in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.dim, self.order, [a - b for a, b in zip(self.coeffs, other.coeffs)])
        return self - Jet.constant(self.dim, self.order, other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, self.order, [other * a for a in self.coeffs])
        self._check(other)
        table = _mul_table(self.dim, self.order)
        out = [0] * len(self.coeffs)
        if table is not None:
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                row = table[i]
                for j, b in enumerate(other.coeffs):
                    if b == 0:
                        continue
                    k = row[j]
                    if k >= 0:
                        out[k] += a * b
        else:
            monos = monomials(self.dim, self.order)
            idx = monomial_index(self.dim, self.order)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                ma = monos[i]
                ta = sum(ma)
                for j, b in enumerate(other.coeffs):
                    if b == 0:
                        continue
                    mb = monos[j]
                    if ta + sum(mb) > self.order:
                        continue
                    out[idx[tuple(x + y for x, y in zip(ma, mb))]] += a * b
        return Jet(self.dim, self.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.dim, self.order, [_exact_div(a, other) for a in self.coeffs])

    def reciprocal(self) -> "Jet":
        """Multiplicative inverse; requires a nonzero constant term."""
        c0 = self.value
        if c0 == 0:
            raise ZeroDivisionError("jet with zero constant term has no reciprocal")
        u = (self / c0) - 1  # nilpotent part, vanishes beyond the truncation order
        out = Jet.constant(self.dim, self.order, 1)
        power = Jet.constant(self.dim, self.order, 1)
        for k in range(1, self.order + 1):
            power = power * u
            out = out + (power if k % 2 == 0 else -power)
        return out / c0

    # -- calculus ----------------------------------------------------------

    def partial(self, axis: int) -> "Jet":
        """Jet of the partial derivative; truncation order drops by one."""
        if not 0 <= axis < self.dim:
            raise JetShapeError(f"axis {axis} out of range for dim {self.dim}")
        new_order = max(self.order - 1, 0)
        monos = monomials(self.dim, self.order)
        idx = monomial_index(self.dim, new_order)
        out = [0] * len(monomials(self.dim, new_order))
        for m, c in zip(monos, self.coeffs):
            if c == 0 or m[axis] == 0:
                continue
            target = tuple(e - 1 if k == axis else e for k, e in enumerate(m))
            if sum(target) <= new_order:
                out[idx[target]] += c * m[axis]
        return Jet(self.dim, new_order, out)

    def truncated(self, order: int) -> "Jet":
        if order > self.order:
            raise JetShapeError("cannot raise truncation order")
        if order == self.order:
            return self
        idx = monomial_index(self.dim, self.order)
        return Jet(
            self.dim,
            order,
            [self.coeffs[idx[m]] for m in monomials(self.dim, order)],
        )

    def evaluate(self, delta: Sequence[Scalar]) -> Scalar:
        """Polynomial value of the truncated expansion at base + delta."""
        if len(delta) != self.dim:
            raise JetShapeError("offset dimension mismatch")
        total = 0
        for m, c in zip(monomials(self.dim, self.order), self.coeffs):
            if c == 0:
                continue
            term = c
            for d, e in zip(delta, m):
                for _ in range(e):
                    term = term * d
            total = total + term
        return total

    def embed(self, dim: int, axes: Sequence[int]) -> "Jet":
        """Reinterpret as a jet in more variables; axes maps old to new slots."""
        if len(axes) != self.dim or len(set(axes)) != self.dim:
            raise JetShapeError("axes must relabel every old variable uniquely")
        idx = monomial_index(dim, self.order)
        out = [0] * len(monomials(dim, self.order))
        for m, c in zip(monomials(self.dim, self.order), self.coeffs):
            if c == 0:
                continue
            target = [0] * dim
            for old, e in enumerate(m):
                target[axes[old]] = e
            out[idx[tuple(target)]] = c
        return Jet(dim, self.order, out)

    # -- analytic functions (float backend) --------------------------------

    def _series(self, derivs: list[float]) -> "Jet":
        u = self - self.value
        out = Jet.constant(self.dim, self.order, derivs[0])
        power = Jet.constant(self.dim, self.order, 1)
        fact = 1
        for k in range(1, self.order + 1):
            power = power * u
            fact *= k
            out = out + power * (derivs[k] / fact)
        return out

    def exp(self) -> "Jet":
        e = math.exp(self.value)
        return self._series([e] * (self.order + 1))

    def log(self) -> "Jet":
        c0 = self.value
        if c0 <= 0:
            raise EvaluationError("log of non-positive jet value")
        derivs = [math.log(c0)]
        sign = 1.0
        fact = 1
        for k in range(1, self.order + 1):
            derivs.append(sign * fact / c0**k)
            sign = -sign
            fact *= k
        return self._series(derivs)


# ---------------------------------------------------------------------------
# composition and reversion


def jet_compose(outer: Jet, inner: Sequence[Jet]) -> Jet:
    """Substitute inner jets into outer's expansion.

    ``outer`` lives in ``m`` variables; ``inner`` supplies one jet per outer
    variable, each with zero constant term (the composition is shifted to the
    outer base point).  Shared target dimension and order are required.
    """
    if len(inner) != outer.dim:
        raise JetShapeError(f"outer expects {outer.dim} inner jets, got {len(inner)}")
    if not inner:
        raise JetShapeError("composition needs at least one variable")
    dim, order = inner[0].dim, inner[0].order
    for g in inner:
        if g.dim != dim or g.order != order:
            raise JetShapeError("inner jets must share dimension and order")
        if g.value != 0:
            raise JetShapeError("inner jets must have zero constant term")
    if order != outer.order:
        raise JetShapeError("outer and inner truncation orders must agree")

    outer_monos = monomials(outer.dim, outer.order)
    # monomial powers of the inner jets, built incrementally along graded order
    needed: set[tuple[int, ...]] = set()
    stack = [m for m, c in zip(outer_monos, outer.coeffs) if c != 0 and sum(m) > 0]
    while stack:
        m = stack.pop()
        if m in needed or sum(m) == 0:
            continue
        needed.add(m)
        ax = next(k for k, e in enumerate(m) if e > 0)
        pred = tuple(e - 1 if k == ax else e for k, e in enumerate(m))
        if sum(pred) > 0:
            stack.append(pred)

    products: dict[tuple[int, ...], Jet] = {}
    for m in sorted(needed, key=lambda t: (sum(t), t)):
        ax = next(k for k, e in enumerate(m) if e > 0)
        pred = tuple(e - 1 if k == ax else e for k, e in enumerate(m))
        base = products[pred] if sum(pred) > 0 else None
        products[m] = inner[ax] if base is None else base * inner[ax]

    out = Jet.constant(dim, order, outer.coeffs[0])
    for m, c in zip(outer_monos, outer.coeffs):
        if c == 0 or sum(m) == 0:
            continue
        out = out + products[m] * c
    return out


def _identity_jets(dim: int, order: int) -> list[Jet]:
    return [Jet.variable(dim, order, k) for k in range(dim)]


def jet_invert(map_jets: Sequence[Jet]) -> list[Jet]:
    """Compositional inverse of a jet map with zero constant terms.

    Solves degree by degree: after the linear part is inverted, each order-k
    defect of ``compose(g, F) - id`` is removed by a homogeneous correction.
    Raises :class:`SingularJacobianError` when the linear part is singular.
    """
    dim = len(map_jets)
    if dim == 0:
        return []
    order = map_jets[0].order
    for f in map_jets:
        if f.dim != dim or f.order != order:
            raise JetShapeError("map jets must be square: d jets in d variables")
        if f.value != 0:
            raise JetShapeError("map jets must have zero constant term")

    jac = [[f.partial(j).value for j in range(dim)] for f in map_jets]
    try:
        inv = mat_inv(jac)
    except SingularJacobianError:
        raise SingularJacobianError("map has singular Jacobian, no local inverse")

    def linear_apply(mat, jets):
        return [
            sum((mat[i][j] * jets[j] for j in range(dim)), Jet.zero(dim, order))
            for i in range(dim)
        ]

    ident = _identity_jets(dim, order)
    degrees = [sum(m) for m in monomials(dim, order)]
    inv_lin = linear_apply(inv, ident)
    g = list(inv_lin)
    for k in range(2, order + 1):
        # keep only the homogeneous degree-k defect; lower orders are clean
        defect = []
        for gi, xi in zip(g, ident):
            err = jet_compose(gi, map_jets) - xi
            defect.append(
                Jet(dim, order, [c if d == k else 0 for c, d in zip(err.coeffs, degrees)])
            )
        g = [gi - jet_compose(d, inv_lin) for gi, d in zip(g, defect)]
    return g


# ---------------------------------------------------------------------------
# small dense linear algebra, generic over scalars and jets


def _pivot_size(entry) -> float:
    if isinstance(entry, Jet):
        v = entry.value
    else:
        v = entry
    try:
        return abs(float(v))
    except (TypeError, OverflowError):
        return 1.0 if v != 0 else 0.0


def _invertible(entry) -> bool:
    if isinstance(entry, Jet):
        return entry.value != 0
    return entry != 0


def mat_inv(rows: Sequence[Sequence]) -> list[list]:
    """Inverse by Gauss-Jordan elimination with partial pivoting.

    Entries may be exact scalars, floats, or jets with invertible constant
    term; the result has matching entry types.
    """
    n = len(rows)
    a = [list(r) for r in rows]
    if any(len(r) != n for r in a):
        raise JetShapeError("matrix must be square")
    one = 1
    eye = [[one if i == j else 0 for j in range(n)] for i in range(n)]
    if a and isinstance(a[0][0], Jet):
        proto = a[0][0]
        eye = [
            [Jet.constant(proto.dim, proto.order, 1 if i == j else 0) for j in range(n)]
            for i in range(n)
        ]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: _pivot_size(a[r][col]))
        if not _invertible(a[pivot][col]):
            raise SingularJacobianError("singular matrix")
        a[col], a[pivot] = a[pivot], a[col]
        eye[col], eye[pivot] = eye[pivot], eye[col]
        inv_p = (
            a[col][col].reciprocal()
            if isinstance(a[col][col], Jet)
            else (Fraction(1, 1) / a[col][col] if isinstance(a[col][col], (int, Fraction)) else 1.0 / a[col][col])
        )
        a[col] = [x * inv_p for x in a[col]]
        eye[col] = [x * inv_p for x in eye[col]]
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col]
            if isinstance(factor, Jet):
                if factor.is_zero():
                    continue
            elif factor == 0:
                continue
            a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
            eye[r] = [x - factor * y for x, y in zip(eye[r], eye[col])]
    return eye


def mat_det(rows: Sequence[Sequence[Scalar]]) -> Scalar:
    """Determinant by elimination; exact for exact inputs."""
    n = len(rows)
    exact = all(isinstance(x, (int, Fraction)) for r in rows for x in r)
    a = [[Fraction(x) if exact else x for x in r] for r in rows]
    det = Fraction(1) if exact else 1.0
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: _pivot_size(a[r][col]))
        if a[pivot][col] == 0:
            return 0 * det
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det = det * a[col][col]
        p = a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            factor = a[r][col] / p
            a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return det


# ---------------------------------------------------------------------------
# polynomial jet providers


class Polynomial:
    """Polynomial function of d variables, a jet provider for everything above.

    Terms map exponent multi-indices to coefficients.  Jets at any point are
    obtained by evaluating the polynomial on coordinate jets, so they are
    exact whenever the coefficients and the point are exact.
    """

    def __init__(self, dim: int, terms: dict[tuple[int, ...], Scalar]):
        self.dim = dim
        self.terms = {tuple(m): c for m, c in terms.items() if c != 0}
        for m in self.terms:
            if len(m) != dim:
                raise JetShapeError("term arity does not match dimension")

    @staticmethod
    def coordinate(dim: int, axis: int) -> "Polynomial":
        return Polynomial(dim, {tuple(1 if k == axis else 0 for k in range(dim)): 1})

    @staticmethod
    def constant(dim: int, value: Scalar) -> "Polynomial":
        return Polynomial(dim, {(0,) * dim: value})

    def __call__(self, point: Sequence[Scalar]) -> Scalar:
        total = 0
        for m, c in self.terms.items():
            term = c
            for x, e in zip(point, m):
                for _ in range(e):
                    term = term * x
            total = total + term
        return total

    def jet(self, point: Sequence[Scalar], order: int) -> Jet:
        vars_ = [Jet.variable(self.dim, order, k, point[k]) for k in range(self.dim)]
        out = Jet.zero(self.dim, order)
        powers: dict[tuple[int, int], Jet] = {}

        def power(axis: int, e: int) -> Jet:
            key = (axis, e)
            if key not in powers:
                powers[key] = vars_[axis] if e == 1 else power(axis, e - 1) * vars_[axis]
            return powers[key]

        for m, c in self.terms.items():
            term = Jet.constant(self.dim, order, c)
            for axis, e in enumerate(m):
                if e:
                    term = term * power(axis, e)
            out = out + term
        return out

    def partial(self, axis: int) -> "Polynomial":
        out: dict[tuple[int, ...], Scalar] = {}
        for m, c in self.terms.items():
            if m[axis] == 0:
                continue
            t = tuple(e - 1 if k == axis else e for k, e in enumerate(m))
            out[t] = out.get(t, 0) + c * m[axis]
        return Polynomial(self.dim, out)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(self.dim, out)

    def __repr__(self):
        return f"Polynomial({self.dim}, {self.terms})"
