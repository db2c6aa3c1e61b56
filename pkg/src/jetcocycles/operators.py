"""The third-order degree-lowering operator and group actions around it.

Three builders produce the same pointwise operator on phase-space functions:

* ``build_L_covariant`` assembles symmetrized contractions of the comparison
  tensor with the canonical bivector against iterated covariant derivatives
  of the lifted connection, then expands covariant derivatives into partials.
* ``build_L_coordinate`` uses the closed coordinate form (comparison-tensor
  blocks contracted with the base Christoffel symbols).
* ``build_L_flat`` is the fully explicit formula in derivatives of the base
  map, valid for the flat connection; it serves as the independent oracle.

With symmetrization normalized as the average over permutations the three
agree exactly in the flat case; the measured proportionality constant is
:data:`COVARIANT_TO_COORDINATE` and is pinned by the test suite.

Operators are point-local: a coefficient table over mixed partials of total
order at most three.  Builders can optionally carry the coefficients as jets
(based at fiber origin) so that the operator can be applied to fiber
polynomials with honest degree bookkeeping.

Action conventions.  Functions carry the pullback action ``f . Q = Q o f~^-1``.
Operators carry the conjugation whose cocycle identity reads
``L(f o h) = h . L(f) + L(h)``; concretely ``(h . T)(Q)(z) = [T(Q o h~^-1)]
(h~(z))``, which evaluates T at the image point, exactly as tensors pull
back.  Composing the two printed actions for the inverse map yields the same
arrangement, and it is the one the verification engine certifies.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .jets import (
    EvaluationError,
    Jet,
    JetShapeError,
    Polynomial,
    Scalar,
    jet_compose,
    jet_invert,
    mat_inv,
    monomials,
    monomial_index,
)
from .maps import DiffeoMap, cotangent_lift
from .geometry import Connection, cocycle_C, lift_connection

__all__ = [
    "LocalDiffOp",
    "Symbol",
    "AnchoredJet",
    "COVARIANT_TO_COORDINATE",
    "build_L_covariant",
    "build_L_coordinate",
    "build_L_flat",
    "apply_op",
    "apply_op_to_symbol",
    "act_on_function",
    "act_on_operator",
]

# Ratio between the covariant build (with Sym = permutation average) and the
# coordinate/flat forms.  Measured once on nondegenerate rational examples
# (see test_operators), then pinned here and asserted across random draws.
COVARIANT_TO_COORDINATE: Fraction = Fraction(1)

MAX_OP_ORDER = 3


def _factorial_midx(m: tuple[int, ...]) -> int:
    out = 1
    for e in m:
        out *= math.factorial(e)
    return out


class LocalDiffOp:
    """Differential operator at a point: finite sum of mixed partials.

    ``coeffs`` maps phase-space multi-indices (length 2n, total order <= 3)
    to scalar coefficients.  ``coeff_jets``, when present, holds the same
    coefficients as jets based at the operator's anchor point, which is what
    symbol application consumes.
    """

    def __init__(self, dim: int, coeffs: dict[tuple[int, ...], Scalar],
                 point: tuple | None = None,
                 coeff_jets: dict[tuple[int, ...], Jet] | None = None):
        self.dim = dim
        self.coeffs = {}
        for m, c in coeffs.items():
            if sum(m) > MAX_OP_ORDER:
                raise JetShapeError("differential order above three")
            if len(m) != dim:
                raise JetShapeError("multi-index arity mismatch")
            if c != 0:
                self.coeffs[tuple(m)] = c
        self.point = tuple(point) if point is not None else None
        self.coeff_jets = coeff_jets

    @staticmethod
    def zero(dim: int, point: tuple | None = None) -> "LocalDiffOp":
        return LocalDiffOp(dim, {}, point=point)

    def is_zero(self, tol: float = 0.0) -> bool:
        if tol:
            return all(abs(c) <= tol for c in self.coeffs.values())
        return not self.coeffs

    def max_abs(self) -> Scalar:
        return max((abs(c) for c in self.coeffs.values()), default=0)

    def __add__(self, other: "LocalDiffOp") -> "LocalDiffOp":
        if self.dim != other.dim:
            raise JetShapeError("operator dimension mismatch")
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0) + c
        return LocalDiffOp(self.dim, out, point=self.point)

    def __sub__(self, other: "LocalDiffOp") -> "LocalDiffOp":
        return self + (other * -1)

    def __mul__(self, s: Scalar) -> "LocalDiffOp":
        return LocalDiffOp(self.dim, {m: c * s for m, c in self.coeffs.items()},
                           point=self.point, coeff_jets=None if self.coeff_jets is None
                           else {m: j * s for m, j in self.coeff_jets.items()})

    __rmul__ = __mul__

    def apply_to_jet(self, q: Jet) -> Scalar:
        """Value of T(Q) at the operator's point from Q's jet there."""
        if q.dim != self.dim:
            raise JetShapeError("jet dimension mismatch")
        if q.order < MAX_OP_ORDER and any(sum(m) > q.order for m in self.coeffs):
            raise JetShapeError("jet order too low for this operator")
        idx = monomial_index(q.dim, q.order)
        total = 0
        for m, c in self.coeffs.items():
            total = total + c * _factorial_midx(m) * q.coeffs[idx[m]]
        return total

    def __repr__(self):
        return f"LocalDiffOp(dim={self.dim}, {len(self.coeffs)} terms)"


class AnchoredJet:
    """Jet provider valid at a single point, wrapping a precomputed jet."""

    def __init__(self, anchor: tuple, jet: Jet):
        self.anchor = tuple(anchor)
        self._jet = jet
        self.dim = jet.dim

    def jet(self, point, order: int) -> Jet:
        if tuple(point) != self.anchor:
            raise EvaluationError("anchored jet queried away from its anchor")
        if order > self._jet.order:
            raise JetShapeError("anchored jet carries too low an order")
        return self._jet.truncated(order)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self._jet.is_zero(tol)


class Symbol:
    """Fiber polynomial on phase space with x-dependent coefficients.

    ``coeffs`` maps fiber multi-indices (length n) to coefficient providers
    (anything with ``jet(x, order)``; plain scalars and polynomials accepted).
    The fiber degree is the largest |mu| with a nonvanishing coefficient.
    """

    def __init__(self, n: int, coeffs: dict[tuple[int, ...], object]):
        self.n = n
        self.coeffs = {}
        for mu, c in coeffs.items():
            if len(mu) != n:
                raise JetShapeError("fiber multi-index arity mismatch")
            if isinstance(c, (int, Fraction, float)):
                c = Polynomial.constant(n, c)
            self.coeffs[tuple(mu)] = c

    @staticmethod
    def monomial(n: int, mu: tuple[int, ...], coefficient: Scalar = 1) -> "Symbol":
        return Symbol(n, {tuple(mu): coefficient})

    @property
    def dim(self) -> int:
        return 2 * self.n

    def degree(self, tol: float = 0.0) -> int:
        degs = [sum(mu) for mu, c in self.coeffs.items() if not _provider_is_zero(c, tol)]
        return max(degs, default=-1)

    def coefficient_value(self, mu: tuple[int, ...], x: tuple) -> Scalar:
        c = self.coeffs.get(tuple(mu))
        return 0 if c is None else c.jet(x, 0).value

    def jet(self, point: tuple, order: int) -> Jet:
        """Jet on phase space at (x, xi); makes a Symbol a function provider."""
        n = self.n
        x, xi = point[:n], point[n:]
        out = Jet.zero(2 * n, order)
        xi_vars = [Jet.variable(2 * n, order, n + i, xi[i]) for i in range(n)]
        powers: dict[tuple[int, int], Jet] = {}

        def power(axis: int, e: int) -> Jet:
            if e == 0:
                return None
            key = (axis, e)
            if key not in powers:
                powers[key] = xi_vars[axis] if e == 1 else power(axis, e - 1) * xi_vars[axis]
            return powers[key]

        for mu, c in self.coeffs.items():
            term = c.jet(x, order).embed(2 * n, list(range(n)))
            for axis, e in enumerate(mu):
                if e:
                    term = term * power(axis, e)
            out = out + term
        return out


def _provider_is_zero(c, tol: float) -> bool:
    if hasattr(c, "is_zero"):
        return c.is_zero(tol)
    if isinstance(c, Polynomial):
        return not c.terms
    return False


# ---------------------------------------------------------------------------
# covariant tables: iterated covariant derivatives as operator tables


def _op_tables_covariant(glifted: Connection, point: tuple, order: int):
    """D2[b][a] and D3[c][b][a]: operator tables with jet coefficients.

    D2 coefficients carry jets of order ``order + 1`` (one derivative is
    spent forming D3); D3 coefficients carry order ``order``.
    """
    d = glifted.dim
    unit = [tuple(1 if k == ax else 0 for k in range(d)) for ax in range(d)]

    if glifted.flat:
        one2 = Jet.constant(d, order + 1, 1)
        one3 = Jet.constant(d, order, 1)
        D2 = [[{_midx_add(unit[b], unit[a]): one2} for a in range(d)] for b in range(d)]
        D3 = [
            [[{_midx_add(_midx_add(unit[c], unit[b]), unit[a]): one3} for a in range(d)]
             for b in range(d)]
            for c in range(d)
        ]
        return D2, D3

    g2 = glifted.components(point, order + 1)
    D2 = []
    for b in range(d):
        row = []
        for a in range(d):
            t: dict[tuple, Jet] = {_midx_add(unit[b], unit[a]): Jet.constant(d, order + 1, 1)}
            for c in range(d):
                gc = g2[c][b][a]
                if not gc.is_zero():
                    t[unit[c]] = t.get(unit[c], Jet.zero(d, order + 1)) - gc
            row.append(t)
        D2.append(row)

    g1 = [[[g2[k][i][j].truncated(order) for j in range(d)] for i in range(d)]
          for k in range(d)]
    D3 = []
    for c in range(d):
        plane = []
        for b in range(d):
            row = []
            for a in range(d):
                t: dict[tuple, Jet] = {}
                # Leibniz: partial_c composed with D2[b][a]
                for m, cj in D2[b][a].items():
                    _tadd(t, _midx_add(m, unit[c]), cj.truncated(order))
                    dc = cj.partial(c)
                    if not dc.is_zero():
                        _tadd(t, m, dc)
                for e in range(d):
                    gcb = g1[e][c][b]
                    if not gcb.is_zero():
                        for m, cj in D2[e][a].items():
                            _tadd(t, m, -(gcb * cj.truncated(order)))
                    gca = g1[e][c][a]
                    if not gca.is_zero():
                        for m, cj in D2[b][e].items():
                            _tadd(t, m, -(gca * cj.truncated(order)))
                row.append(t)
            plane.append(row)
        D3.append(plane)
    return D2, D3


def _midx_add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _tadd(table: dict, m: tuple, jet: Jet):
    cur = table.get(m)
    table[m] = jet if cur is None else cur + jet


# ---------------------------------------------------------------------------
# the three builders


def _comparison_jets(f: DiffeoMap, gamma: Connection, point: tuple, order: int):
    """Jets of the comparison tensor of the lifted map at a phase point."""
    glifted = _lifted(gamma)
    lift = cotangent_lift(f)
    return cocycle_C(lift, glifted).components(point, order), glifted


def _lifted(gamma: Connection) -> Connection:
    cached = getattr(gamma, "_lifted_cache", None)
    if cached is None:
        cached = lift_connection(gamma)
        gamma._lifted_cache = cached
    return cached


def _finish(dim, table, point, keep_jets):
    coeffs = {m: j.value for m, j in table.items() if not j.is_zero()}
    jets = {m: j for m, j in table.items() if not j.is_zero()} if keep_jets else None
    return LocalDiffOp(dim, coeffs, point=point, coeff_jets=jets)


def build_L_covariant(f: DiffeoMap, gamma: Connection, point: tuple,
                      coeff_order: int = 0) -> LocalDiffOp:
    """Covariant build: symmetrized bivector contractions against covariant
    derivative tables, expanded into partial derivatives."""
    n = f.dim
    d = 2 * n
    if len(point) != d:
        raise JetShapeError("expected a phase-space point")
    mo = coeff_order
    cj, glifted = _comparison_jets(f, gamma, point, mo)

    # bivector contraction is index relabeling with signs: the pairing sends
    # base slot i to fiber slot i+n with sign +1 and fiber to base with -1
    def sigma(i):
        return i + n if i < n else i - n

    def sgn(i):
        return 1 if i < n else -1

    def A(j, i, k):  # C^j_{ml} g^{im} g^{kl}
        return cj[j][sigma(i)][sigma(k)] * (sgn(i) * sgn(k))

    sixth = Fraction(1, 6)

    def A_sym(j, i, k):
        return (
            A(j, i, k) + A(j, k, i) + A(i, j, k) + A(i, k, j) + A(k, i, j) + A(k, j, i)
        ) * sixth

    D2, D3 = _op_tables_covariant(glifted, point, mo)

    table: dict[tuple, Jet] = {}
    for i in range(d):
        for j in range(i, d):
            for k in range(j, d):
                a_hat = A_sym(j, i, k)
                if a_hat.is_zero():
                    continue
                # distinct orderings of the multiset {i,j,k} in the operator sum
                perms = {p for p in (
                    (i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i))}
                for (p, q, r) in perms:
                    for m, opj in D3[p][q][r].items():
                        _tadd(table, m, a_hat * opj)

    # second group: -(3/2) Sym_{n,m,i}(C^n_{lk} g^{ml} g^{ik}) C^j_{mn} D2[i][j]
    def B(nn, mm, ii):
        return cj[nn][sigma(mm)][sigma(ii)] * (sgn(mm) * sgn(ii))

    def B_sym(nn, mm, ii):
        return (
            B(nn, mm, ii) + B(nn, ii, mm) + B(mm, nn, ii)
            + B(mm, ii, nn) + B(ii, nn, mm) + B(ii, mm, nn)
        ) * sixth

    half3 = Fraction(3, 2)
    for i in range(d):
        for j in range(d):
            coeff = Jet.zero(d, mo)
            for nn in range(d):
                for mm in range(d):
                    b_hat = B_sym(nn, mm, i)
                    if b_hat.is_zero():
                        continue
                    cmn = cj[j][mm][nn]
                    if cmn.is_zero():
                        continue
                    coeff = coeff + b_hat * cmn
            if coeff.is_zero():
                continue
            coeff = coeff * (-half3)
            for m, opj in D2[i][j].items():
                _tadd(table, m, coeff * opj.truncated(mo))

    return _finish(d, table, point, coeff_order > 0)


def build_L_coordinate(f: DiffeoMap, gamma: Connection, point: tuple,
                       coeff_order: int = 0) -> LocalDiffOp:
    """Coordinate build: comparison-tensor blocks against base Christoffels."""
    n = f.dim
    d = 2 * n
    if len(point) != d:
        raise JetShapeError("expected a phase-space point")
    mo = coeff_order
    cj, _ = _comparison_jets(f, gamma, point, mo)
    base_axes = list(range(n))
    unit = [tuple(1 if k == ax else 0 for k in range(d)) for ax in range(d)]

    gbase = None
    if not gamma.flat:
        gbase = gamma.components(point[:n], mo)

    table: dict[tuple, Jet] = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                c = cj[i][j][k]
                if not c.is_zero():
                    m = _midx_add(_midx_add(unit[n + j], unit[n + k]), unit[i])
                    _tadd(table, m, c * 3)
                c3 = cj[n + i][j][k]
                if not c3.is_zero():
                    m = _midx_add(_midx_add(unit[n + i], unit[n + j]), unit[n + k])
                    _tadd(table, m, c3)
            coeff = Jet.zero(d, mo)
            for m_ in range(n):
                for k in range(n):
                    if gbase is not None:
                        gkm = gbase[k][j][m_]
                        if not gkm.is_zero():
                            coeff = coeff + 2 * cj[m_][i][k] * gkm.embed(d, base_axes)
                    ck = cj[k][m_][j]
                    if not ck.is_zero():
                        coeff = coeff + cj[m_][k][i] * ck
            if not coeff.is_zero():
                m = _midx_add(unit[n + i], unit[n + j])
                _tadd(table, m, coeff * 3)

    return _finish(d, table, point, coeff_order > 0)


def build_L_flat(f: DiffeoMap, point: tuple, coeff_order: int = 0) -> LocalDiffOp:
    """Flat-connection oracle: the explicit formula in derivatives of f."""
    n = f.dim
    d = 2 * n
    if len(point) != d:
        raise JetShapeError("expected a phase-space point")
    mo = coeff_order
    x = point[:n]
    base_axes = list(range(n))
    fj = f.eval_jet(x, mo + 3)
    jac = [[fj[a].partial(i) for i in range(n)] for a in range(n)]  # order mo+2
    jinv2 = mat_inv(jac)  # jets of dx/df, order mo+2
    f2 = [[[jac[l][i].partial(j) for j in range(n)] for i in range(n)] for l in range(n)]
    f3 = [
        [[[f2[l][i][j].partial(k) for k in range(n)] for j in range(n)] for i in range(n)]
        for l in range(n)
    ]
    jinv = [[jinv2[a][b].truncated(mo) for b in range(n)] for a in range(n)]
    f2 = [[[f2[l][i][j].truncated(mo) for j in range(n)] for i in range(n)] for l in range(n)]
    f3 = [[[[f3[l][i][j][k].truncated(mo) for k in range(n)] for j in range(n)]
           for i in range(n)] for l in range(n)]

    def lift0(j: Jet) -> Jet:
        return j.embed(d, base_axes)

    unit = [tuple(1 if kk == ax else 0 for kk in range(d)) for ax in range(d)]
    xi_vars = [Jet.variable(d, mo, n + a, point[n + a]) for a in range(n)]
    table: dict[tuple, Jet] = {}

    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = Jet.zero(n, mo)
                for l in range(n):
                    t = f2[l][j][k]
                    if t.is_zero():
                        continue
                    acc = acc + t * jinv[i][l]
                if not acc.is_zero():
                    m = _midx_add(_midx_add(unit[n + j], unit[n + k]), unit[i])
                    _tadd(table, m, lift0(acc) * 3)

    for i in range(n):
        for j in range(n):
            acc = Jet.zero(n, mo)
            for q in range(n):
                for k in range(n):
                    a1 = f2[k][q][i]
                    if a1.is_zero():
                        continue
                    for m_ in range(n):
                        a2 = jinv[m_][k]
                        for l in range(n):
                            a3 = f2[l][j][m_]
                            if a3.is_zero():
                                continue
                            acc = acc + a1 * a2 * a3 * jinv[q][l]
            if not acc.is_zero():
                m = _midx_add(unit[n + i], unit[n + j])
                _tadd(table, m, lift0(acc) * 3)

    for i in range(n):
        for j in range(n):
            for k in range(n):
                coeff = Jet.zero(d, mo)
                for q in range(n):
                    inner = Jet.zero(n, mo)
                    for l in range(n):
                        for p in range(n):
                            a1 = f2[p][i][j]
                            a2 = f2[q][l][k]
                            if a1.is_zero() or a2.is_zero():
                                continue
                            inner = inner + jinv[l][p] * a1 * a2
                    inner = inner * 3 - f3[q][i][j][k]
                    if inner.is_zero():
                        continue
                    pref = Jet.zero(d, mo)
                    for m_ in range(n):
                        pref = pref + lift0(jinv[m_][q]) * xi_vars[m_]
                    coeff = coeff + pref * lift0(inner)
                if not coeff.is_zero():
                    m = _midx_add(_midx_add(unit[n + i], unit[n + j]), unit[n + k])
                    _tadd(table, m, coeff)

    return _finish(d, table, point, coeff_order > 0)


# ---------------------------------------------------------------------------
# application


def apply_op(op: LocalDiffOp, q, point: tuple) -> Scalar:
    """Evaluate T(Q) at the operator's point; Q is a jet provider."""
    if op.point is not None and tuple(point) != op.point:
        raise EvaluationError("operator applied away from the point it was built at")
    return op.apply_to_jet(q.jet(point, MAX_OP_ORDER))


def apply_op_to_symbol(op: LocalDiffOp, symbol: Symbol, x: tuple) -> Symbol:
    """Apply an operator built with coefficient jets to a fiber polynomial.

    The result collects the fiber-monomial coefficients of T(P) around the
    fiber origin over ``x``; its degree is the honest output degree, so the
    structural drop by two is a real assertion, not bookkeeping.
    """
    n = symbol.n
    d = 2 * n
    k = symbol.degree()
    if k < 2:
        return Symbol(n, {})
    if op.coeff_jets is None:
        raise EvaluationError("operator was built without coefficient jets")
    if not op.coeff_jets:
        return Symbol(n, {})
    mo = next(iter(op.coeff_jets.values())).order
    if mo < k + 1:
        raise EvaluationError(
            f"coefficient jets of order {mo} cannot resolve degree {k} symbols; "
            f"rebuild with coeff_order >= {k + 1}"
        )
    if op.point is not None and any(c != 0 for c in op.point[n:]):
        raise EvaluationError("symbol application expects an operator at fiber origin")

    point = tuple(x) + (0,) * n
    pjet = symbol.jet(point, mo + MAX_OP_ORDER)
    out_jet = Jet.zero(d, mo)
    for m, cjet in op.coeff_jets.items():
        dq = pjet
        for axis, e in enumerate(m):
            for _ in range(e):
                dq = dq.partial(axis)
        out_jet = out_jet + cjet * dq.truncated(mo)

    # regroup the phase-space jet as a fiber polynomial with x-jet coefficients
    by_mu: dict[tuple, dict[tuple, Scalar]] = {}
    for midx, c in zip(monomials(d, mo), out_jet.coeffs):
        if c == 0:
            continue
        alpha, mu = midx[:n], midx[n:]
        by_mu.setdefault(mu, {})[alpha] = c
    coeffs = {}
    for mu, entries in by_mu.items():
        order_left = mo - sum(mu)
        idx = monomial_index(n, order_left)
        data = [0] * len(monomials(n, order_left))
        for alpha, c in entries.items():
            if sum(alpha) <= order_left:
                data[idx[alpha]] = c
        coeffs[mu] = AnchoredJet(x, Jet(n, order_left, data))
    return Symbol(n, coeffs)


# ---------------------------------------------------------------------------
# group actions


class _PullbackFunction:
    """The function f . Q = Q o f~^-1 as a lazy jet provider."""

    def __init__(self, f: DiffeoMap, q, anchors: Sequence[tuple] = ()):
        self.lift = cotangent_lift(f)
        self.q = q
        self.dim = 2 * f.dim
        self._inverse = None
        self._anchors = [tuple(a) for a in anchors]

    def add_anchor(self, phase_point: tuple) -> "_PullbackFunction":
        self._anchors.append(tuple(phase_point))
        if self._inverse is not None:
            self._inverse.add_anchor(tuple(phase_point))
        return self

    def jet(self, point: tuple, order: int) -> Jet:
        if self._inverse is None:
            if not self._anchors:
                raise EvaluationError(
                    "pullback function needs at least one registered preimage"
                )
            self._inverse = self.lift.invert(self._anchors[0])
            for a in self._anchors[1:]:
                self._inverse.add_anchor(a)
        inv_jets = self._inverse.eval_jet(point, order)
        w = tuple(j.value for j in inv_jets)
        outer = self.q.jet(w, order)
        return jet_compose(outer, [j - j.value for j in inv_jets])


def act_on_function(f: DiffeoMap, q, anchors: Sequence[tuple] = ()) -> _PullbackFunction:
    """Module action on phase-space functions: compose with the inverse lift.

    ``anchors`` registers base preimages w so the result can be evaluated at
    the image points f~(w) on the exact backend (floats refine by Newton).
    """
    return _PullbackFunction(f, q, anchors)


def act_on_operator(f: DiffeoMap, op: LocalDiffOp, point: tuple) -> LocalDiffOp:
    """Conjugate an operator by the lift of f.

    ``point`` is where the result lives; ``op`` must have been built at the
    image point f~(point).  The table is recovered by probing the monomial
    basis, so no coefficient transformation rules are hand-maintained.
    """
    n = f.dim
    d = 2 * n
    lift = cotangent_lift(f)
    fz = lift.eval_jet(point, MAX_OP_ORDER)
    w = tuple(j.value for j in fz)
    inv_jets = jet_invert([j - j.value for j in fz])  # jets of lift^-1 at w, shifted

    coeffs: dict[tuple, Scalar] = {}
    for m in monomials(d, MAX_OP_ORDER):
        if sum(m) > MAX_OP_ORDER:
            continue
        probe = [0] * len(monomials(d, MAX_OP_ORDER))
        probe[monomial_index(d, MAX_OP_ORDER)[m]] = 1
        basis = Jet(d, MAX_OP_ORDER, probe)  # (z - point)^m as a jet at point
        composed = jet_compose(basis, inv_jets)  # jet of basis o lift^-1 at w
        val = op.apply_to_jet(composed)
        if val != 0:
            coeffs[m] = val * Fraction(1, _factorial_midx(m)) if isinstance(val, (int, Fraction)) else val / _factorial_midx(m)
    return LocalDiffOp(d, coeffs, point=tuple(point))
