"""Classical 1-cocycles on diffeomorphism groups and vector fields, plus a
generic identity-verification engine.

Group-level candidates package an evaluator together with the module action
appearing in their cocycle identity

    c(f o h) = h . c(f) + c(h)

and report a per-point residual; on the exact backend the residual of a true
cocycle is literally zero.  Action conventions are fixed per candidate and
certified by the engine (identity acts trivially, actions compose) before
the identity itself is trusted; a deliberately sabotaged candidate is kept
around as a self-test that the engine can see a broken convention.

Algebra-level candidates verify  c([X, Y]) = X . c(Y) - Y . c(X)  with the
Lie-derivative action on their value arena, and a finite-difference bridge
connects the two levels along flows.

The flat phase-space trilinear term ``moyal_p3`` (the third-order term of
the star product in Darboux coordinates, normalization omitted as a global
scale) doubles as the value of the embedding cocycle on fiber-linear
functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .jets import (
    Jet,
    JetShapeError,
    Polynomial,
    Scalar,
    monomial_index,
    monomials,
)
from .maps import DiffeoMap, VectorField, catalog_get, compose, cotangent_lift, flow_map
from .geometry import (
    Connection,
    TensorField21,
    cocycle_C,
    lift_connection,
    pullback_connection,
    pullback_tensor,
)
from .operators import (
    Symbol,
    act_on_operator,
    build_L_covariant,
)

__all__ = [
    "DomainError",
    "CaseResult",
    "verify_group_cocycle",
    "log_volume_cocycle",
    "connection_cocycle",
    "derham_cocycle",
    "derham_quadrature",
    "schwarzian_1d",
    "divergence_cocycle",
    "divergence_field",
    "scalar_field_action",
    "lie_derivative_connection",
    "tensor_lie_derivative",
    "algebra_cocycle_residual",
    "poisson_bracket",
    "moyal_p3",
    "moyal_p3_field",
    "chevalley_p3_residual",
    "vect_embedding_cocycle",
    "group_algebra_consistency",
    "LogVolumeCocycle",
    "DeRhamCocycle",
    "SchwarzianCocycle",
    "ConnectionCompareCocycle",
    "PhaseCompareCocycle",
    "OperatorCocycle",
    "SabotagedPhaseCompare",
]


class DomainError(ValueError):
    """Input outside a cocycle's domain (orientation, critical point)."""


# ---------------------------------------------------------------------------
# scalar-valued classical cocycles


def log_volume_cocycle(f: DiffeoMap, x: tuple) -> float:
    """Logarithm of the volume distortion at a point; det Df must be > 0."""
    det = f.jacobian_det(x)
    if float(det) <= 0:
        raise DomainError(f"{f.name}: det Df = {det} is not positive at {x}")
    return math.log(float(det))


def connection_cocycle(f: DiffeoMap, gamma: Connection) -> TensorField21:
    """Difference between the transported and the original connection."""
    pulled = pullback_connection(f, gamma)

    def fn(point, order):
        a = pulled.components(point, order)
        d = f.dim
        if gamma.flat:
            return a
        b = gamma.components(point, order)
        return [[[a[k][i][j] - b[k][i][j] for j in range(d)] for i in range(d)]
                for k in range(d)]

    return TensorField21(f.dim, fn, name=f"ell({f.name})")


def derham_cocycle(potential: Polynomial, f: DiffeoMap, x: tuple) -> Scalar:
    """Potential difference along the displacement, the exact-form case of
    the path-integral cocycle on simply connected charts."""
    return potential(f(x)) - potential(tuple(x))


def derham_quadrature(potential: Polynomial, f: DiffeoMap, x: tuple) -> float:
    """Straight-segment 16-point Gauss-Legendre integral of d(potential).

    Path independence makes this agree with :func:`derham_cocycle`; it is
    kept as a numerical witness that the integrand really is closed.
    """
    nodes, weights = np.polynomial.legendre.leggauss(16)
    a = [float(c) for c in x]
    b = [float(c) for c in f(x)]
    grads = [potential.partial(i) for i in range(f.dim)]
    total = 0.0
    for s, w in zip(nodes, weights):
        t = 0.5 * (s + 1.0)
        pt = tuple(ai + t * (bi - ai) for ai, bi in zip(a, b))
        total += w * sum(
            float(g(pt)) * (bi - ai) for g, (ai, bi) in zip(grads, zip(a, b))
        )
    return 0.5 * total


def schwarzian_1d(f: DiffeoMap, x: tuple) -> Scalar:
    """Classical third-order distortion of a 1D map; zero exactly on the
    fractional-linear family."""
    if f.dim != 1:
        raise JetShapeError("schwarzian_1d needs a 1-dimensional map")
    j = f.eval_jet(x, 3)[0]
    f1 = j.coefficient((1,))
    if f1 == 0:
        raise DomainError(f"{f.name}: critical point at {x}")
    if isinstance(f1, int):
        f1 = Fraction(f1)
    f2 = 2 * j.coefficient((2,))
    f3 = 6 * j.coefficient((3,))
    ratio = f2 / f1
    return f3 / f1 - Fraction(3, 2) * ratio * ratio


# ---------------------------------------------------------------------------
# algebra-level cocycles


class _ScalarField:
    """Jet provider built from a closure point -> Jet."""

    def __init__(self, dim: int, jet_fn):
        self.dim = dim
        self._jet_fn = jet_fn

    def jet(self, point, order):
        return self._jet_fn(tuple(point), order)


def divergence_field(X: VectorField) -> _ScalarField:
    def fn(point, order):
        xj = X.eval_jet(point, order + 1)
        out = Jet.zero(X.dim, order)
        for i in range(X.dim):
            out = out + xj[i].partial(i)
        return out

    return _ScalarField(X.dim, fn)


def divergence_cocycle(X: VectorField, x: tuple, a: Scalar = 1,
                       potential: Polynomial | None = None) -> Scalar:
    """a * div X + contraction of X with an exact 1-form d(potential)."""
    val = a * divergence_field(X).jet(x, 0).value
    if potential is not None:
        xv = X(x)
        for i in range(X.dim):
            val = val + xv[i] * potential.partial(i)(x)
    return val


def lie_derivative_connection(X: VectorField, gamma: Connection) -> TensorField21:
    """Lie derivative of a connection along a vector field, as a field:
    transport of the Christoffel data plus the second-derivative term."""
    d = gamma.dim

    def fn(point, order):
        xj = X.eval_jet(point, order + 2)
        gj = gamma.components(point, order + 1)
        dX = [[xj[k].partial(a).truncated(order + 1) for a in range(d)] for k in range(d)]
        out = []
        for k in range(d):
            plane = []
            for i in range(d):
                row = []
                for j in range(d):
                    acc = dX[k][i].partial(j)  # d_i d_j X^k, order `order`
                    for a in range(d):
                        g_kij = gj[k][i][j]
                        if not g_kij.is_zero():
                            acc = acc + xj[a].truncated(order) * g_kij.partial(a)
                        g_aij = gj[a][i][j]
                        if not g_aij.is_zero():
                            acc = acc - dX[k][a].truncated(order) * g_aij.truncated(order)
                        g_kaj = gj[k][a][j]
                        if not g_kaj.is_zero():
                            acc = acc + dX[a][i].truncated(order) * g_kaj.truncated(order)
                        g_kia = gj[k][i][a]
                        if not g_kia.is_zero():
                            acc = acc + dX[a][j].truncated(order) * g_kia.truncated(order)
                    row.append(acc)
                plane.append(row)
            out.append(plane)
        return out

    return TensorField21(d, fn, name=f"L_{X.name}({gamma.name})")


def tensor_lie_derivative(X: VectorField, tensor: TensorField21) -> TensorField21:
    """Lie derivative of a (2,1)-tensor field along a vector field."""
    d = tensor.dim

    def fn(point, order):
        xj = X.eval_jet(point, order + 1)
        tj = tensor.components(point, order + 1)
        dX = [[xj[k].partial(a).truncated(order) for a in range(d)] for k in range(d)]
        out = []
        for k in range(d):
            plane = []
            for i in range(d):
                row = []
                for j in range(d):
                    acc = Jet.zero(d, order)
                    for a in range(d):
                        t = tj[k][i][j]
                        if not t.is_zero():
                            acc = acc + xj[a].truncated(order) * t.partial(a)
                        ta = tj[a][i][j]
                        if not ta.is_zero():
                            acc = acc - dX[k][a] * ta.truncated(order)
                        tk1 = tj[k][a][j]
                        if not tk1.is_zero():
                            acc = acc + dX[a][i] * tk1.truncated(order)
                        tk2 = tj[k][i][a]
                        if not tk2.is_zero():
                            acc = acc + dX[a][j] * tk2.truncated(order)
                    row.append(acc)
                plane.append(row)
            out.append(plane)
        return out

    return TensorField21(d, fn, name=f"L_{X.name}[{tensor.name}]")


def algebra_cocycle_residual(cocycle: Callable, action: Callable,
                             X: VectorField, Y: VectorField, point: tuple) -> Scalar:
    """Residual of c([X,Y]) - X.c(Y) + Y.c(X) at a point.

    ``cocycle`` maps a vector field to a value field (scalar or tensor);
    ``action`` maps (vector field, value field) to a value field.
    """
    lhs = cocycle(X.bracket(Y))
    rhs_x = action(X, cocycle(Y))
    rhs_y = action(Y, cocycle(X))
    return _field_max_abs_diff(lhs, rhs_x, rhs_y, point)


def _field_max_abs_diff(lhs, pos, neg, point) -> Scalar:
    if isinstance(lhs, TensorField21):
        a = lhs.values(point)
        b = pos.values(point)
        c = neg.values(point)
        d = lhs.dim
        return max(
            abs(a[k][i][j] - b[k][i][j] + c[k][i][j])
            for k in range(d) for i in range(d) for j in range(d)
        )
    av = lhs.jet(point, 0).value
    bv = pos.jet(point, 0).value
    cv = neg.jet(point, 0).value
    return abs(av - bv + cv)


def scalar_field_action(X: VectorField, value_field) -> _ScalarField:
    """Directional derivative of a scalar field along a vector field."""

    def fn(point, order):
        vj = value_field.jet(point, order + 1)
        xj = X.eval_jet(point, order)
        out = Jet.zero(X.dim, order)
        for i in range(X.dim):
            out = out + xj[i] * vj.partial(i)
        return out

    return _ScalarField(X.dim, fn)


# ---------------------------------------------------------------------------
# flat phase-space trilinear term and the embedding cocycle


def poisson_bracket(F, G):
    """Canonical bracket of two phase-space jet providers, lazily."""

    def fn(point, order):
        n = F.dim // 2
        fj = F.jet(point, order + 1)
        gj = G.jet(point, order + 1)
        out = Jet.zero(F.dim, order)
        for i in range(n):
            out = out + fj.partial(i) * gj.partial(n + i) - fj.partial(n + i) * gj.partial(i)
        return out

    return _ScalarField(F.dim, fn)


def moyal_p3(F, G, point: tuple, order: int = 0):
    """Third-order bidifferential term of the flat star product.

    Triple bivector contraction of third derivatives; antisymmetric in its
    arguments.  With ``order`` > 0 the value is returned as a jet, which the
    2-cocycle identity check consumes.  The 1/3! series normalization is
    omitted throughout, a global scale with no effect on any identity.
    """
    d = len(point)
    n = d // 2
    fj = F.jet(point, order + 3)
    gj = G.jet(point, order + 3)

    def sigma(i):
        return i + n if i < n else i - n

    def sgn(i):
        return 1 if i < n else -1

    # cache first/second/third partials as needed
    f1 = [fj.partial(i) for i in range(d)]
    g1 = [gj.partial(sigma(i)) for i in range(d)]
    out = Jet.zero(d, order)
    for i in range(d):
        f2 = [f1[i].partial(j) for j in range(d)]
        g2 = [g1[i].partial(sigma(j)) for j in range(d)]
        for j in range(d):
            for k in range(d):
                f3 = f2[j].partial(k)
                if f3.is_zero():
                    continue
                g3 = g2[j].partial(sigma(k))
                if g3.is_zero():
                    continue
                term = f3.truncated(order) * g3.truncated(order)
                s = sgn(i) * sgn(j) * sgn(k)
                out = out + (term if s > 0 else -term)
    return out.value if order == 0 else out


class _MoyalP3Field:
    def __init__(self, F, G):
        self.F, self.G = F, G
        self.dim = F.dim

    def jet(self, point, order):
        return moyal_p3(self.F, self.G, tuple(point), order)


def moyal_p3_field(F, G) -> _MoyalP3Field:
    return _MoyalP3Field(F, G)


def chevalley_p3_residual(F, G, H, point: tuple) -> Scalar:
    """Cyclic 2-cocycle defect of the trilinear term over the bracket."""
    total = 0
    for A, B, C in ((F, G, H), (G, H, F), (H, F, G)):
        t1 = moyal_p3(poisson_bracket(A, B), C, point)
        t2 = poisson_bracket(A, moyal_p3_field(B, C)).jet(point, 0).value
        total = total + (t1 - t2)
    return abs(total)


def vect_embedding_cocycle(X: VectorField, P: Symbol, x: tuple) -> Symbol:
    """Value of the flat embedding cocycle: pair the fiber-linear function of
    a vector field with a symbol through the trilinear term."""
    n = X.dim
    if P.n != n:
        raise JetShapeError("vector field and symbol dimensions differ")
    if not all(isinstance(c, Polynomial) for c in X.components):
        raise JetShapeError("polynomial vector fields expected")
    k = P.degree()
    if k < 0:
        return Symbol(n, {})
    unit = [tuple(1 if a == i else 0 for a in range(n)) for i in range(n)]
    F = Symbol(n, {unit[i]: X.components[i] for i in range(n)})
    mo = k + 1
    point = tuple(x) + (0,) * n
    out_jet = moyal_p3(F, P, point, order=mo)
    return _symbol_from_phase_jet(out_jet, n, tuple(x))


def _symbol_from_phase_jet(out_jet: Jet, n: int, x: tuple) -> Symbol:
    from .operators import AnchoredJet

    mo = out_jet.order
    by_mu: dict[tuple, dict[tuple, Scalar]] = {}
    for midx, c in zip(monomials(2 * n, mo), out_jet.coeffs):
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
# the verification engine


@dataclass
class CaseResult:
    suite: str
    case_id: str
    maps: list[str]
    point: tuple
    residual: Scalar | None
    passed: bool
    error: str | None = None
    witness: bool = False  # value asserts nonvanishing, not a defect size

    def as_record(self) -> dict:
        return {
            "suite": self.suite,
            "case_id": self.case_id,
            "maps": list(self.maps),
            "point": [str(c) for c in self.point],
            "residual": None if self.residual is None else _residual_str(self.residual),
            "pass": self.passed,
            "error": self.error,
            "witness": self.witness,
        }


def _residual_str(r: Scalar) -> str:
    return repr(r) if isinstance(r, float) else str(r)


class GroupCocycleCandidate:
    """Base class: subclasses provide value/action through ``residual``."""

    name = "cocycle"
    arena = "scalar"

    def residual(self, f: DiffeoMap, h: DiffeoMap, point: tuple) -> Scalar:
        raise NotImplementedError

    def action_identity_defect(self, f: DiffeoMap, point: tuple) -> Scalar:
        """Residual of c(f o id) = id . c(f) + c(id); sanity for conventions."""
        ident = _identity_like(f)
        return self.residual(f, ident, point)


def _identity_like(f: DiffeoMap) -> DiffeoMap:
    return catalog_get("identity", {"dim": f.dim})


def verify_group_cocycle(candidate: GroupCocycleCandidate, f: DiffeoMap,
                         h: DiffeoMap, points: Sequence[tuple], tol: float,
                         suite: str | None = None) -> list[CaseResult]:
    """Residual of the cocycle identity for one pair at several points.

    A point passes when the residual is at most ``tol`` (zero for the exact
    backend); evaluation failures are recorded per point without aborting
    the rest.
    """
    rows = []
    suite = suite or candidate.name
    for idx, p in enumerate(points):
        cid = f"{candidate.name}[{f.name},{h.name}]@{idx}"
        try:
            r = candidate.residual(f, h, tuple(p))
            ok = (r == 0) if tol == 0 else (float(abs(r)) <= tol)
            rows.append(CaseResult(suite, cid, [f.name, h.name], tuple(p), r, bool(ok)))
        except Exception as exc:  # recorded, not fatal
            rows.append(CaseResult(suite, cid, [f.name, h.name], tuple(p), None,
                                   False, error=f"{type(exc).__name__}: {exc}"))
    return rows


class LogVolumeCocycle(GroupCocycleCandidate):
    """c(f)(x) = log det Df(x) with the evaluate-at-image action."""

    name = "log_volume"

    def residual(self, f, h, point):
        lhs = log_volume_cocycle(compose(f, h), point)
        mid = h(point)
        return abs(lhs - log_volume_cocycle(f, mid) - log_volume_cocycle(h, point))


class DeRhamCocycle(GroupCocycleCandidate):
    """Potential-difference cocycle for an exact 1-form."""

    name = "derham"

    def __init__(self, potential: Polynomial):
        self.potential = potential

    def residual(self, f, h, point):
        lhs = derham_cocycle(self.potential, compose(f, h), point)
        mid = h(point)
        rhs = derham_cocycle(self.potential, f, mid) + derham_cocycle(self.potential, h, point)
        return abs(lhs - rhs)


class SchwarzianCocycle(GroupCocycleCandidate):
    """1D third-order cocycle with the weight-two action."""

    name = "schwarzian"

    def residual(self, f, h, point):
        lhs = schwarzian_1d(compose(f, h), point)
        mid = h(point)
        hj = h.eval_jet(point, 1)[0]
        h1 = hj.coefficient((1,))
        rhs = schwarzian_1d(f, mid) * h1 * h1 + schwarzian_1d(h, point)
        return abs(lhs - rhs)


class ConnectionCompareCocycle(GroupCocycleCandidate):
    """Base-manifold connection-difference cocycle, tensor pullback action."""

    name = "connection_ell"
    arena = "tensor21"

    def __init__(self, gamma: Connection):
        self.gamma = gamma

    def residual(self, f, h, point):
        lhs = connection_cocycle(compose(f, h), self.gamma).values(point)
        acted = pullback_tensor(h, connection_cocycle(f, self.gamma)).values(point)
        own = connection_cocycle(h, self.gamma).values(point)
        d = f.dim
        return max(
            abs(lhs[k][i][j] - acted[k][i][j] - own[k][i][j])
            for k in range(d) for i in range(d) for j in range(d)
        )


class PhaseCompareCocycle(GroupCocycleCandidate):
    """Comparison tensor of lifted maps on phase space; points are phase
    points."""

    name = "cocycle_C"
    arena = "tensor21"

    def __init__(self, gamma: Connection):
        self.glifted = lift_connection(gamma)

    def _tensors(self, f, h):
        F = cotangent_lift(f)
        H = cotangent_lift(h)
        FH = cotangent_lift(compose(f, h))
        return F, H, FH

    def residual(self, f, h, point):
        F, H, FH = self._tensors(f, h)
        lhs = cocycle_C(FH, self.glifted).values(point)
        acted = pullback_tensor(H, cocycle_C(F, self.glifted)).values(point)
        own = cocycle_C(H, self.glifted).values(point)
        d = 2 * f.dim
        return max(
            abs(lhs[k][i][j] - acted[k][i][j] - own[k][i][j])
            for k in range(d) for i in range(d) for j in range(d)
        )


class SabotagedPhaseCompare(PhaseCompareCocycle):
    """Deliberately wrong action (no Jacobian transport): the engine must
    flag a nonzero residual on nonlinear pairs."""

    name = "cocycle_C_sabotaged"

    def residual(self, f, h, point):
        F, H, FH = self._tensors(f, h)
        lhs = cocycle_C(FH, self.glifted).values(point)
        image = H(point)
        acted = cocycle_C(F, self.glifted).values(image)  # missing transport
        own = cocycle_C(H, self.glifted).values(point)
        d = 2 * f.dim
        return max(
            abs(lhs[k][i][j] - acted[k][i][j] - own[k][i][j])
            for k in range(d) for i in range(d) for j in range(d)
        )


class OperatorCocycle(GroupCocycleCandidate):
    """The third-order operator cocycle, compared in applied form.

    The two sides are applied to every monomial jet of order up to three
    plus a pair of deterministic dense jets, which spans the relevant jet
    space and sidesteps any coefficient-convention pitfalls.
    """

    name = "operator_L"
    arena = "operator"

    def __init__(self, gamma: Connection):
        self.gamma = gamma

    def residual(self, f, h, point):
        d = 2 * f.dim
        hz = cotangent_lift(h)(point)
        lhs = build_L_covariant(compose(f, h), self.gamma, point)
        acted = act_on_operator(h, build_L_covariant(f, self.gamma, hz), point)
        own = build_L_covariant(h, self.gamma, point)
        diff = lhs - acted - own
        if diff.is_zero():
            return 0
        count = len(monomials(d, 3))
        probes = []
        for slot in range(count):
            data = [0] * count
            data[slot] = 1
            probes.append(Jet(d, 3, data))
        probes.append(Jet(d, 3, [Fraction(1, 1 + i) for i in range(count)]))
        probes.append(Jet(d, 3, [Fraction((-1) ** i, 2 + i) for i in range(count)]))
        worst = 0
        scale = 0.0
        floaty = False
        for q in probes:
            worst = max(worst, abs(diff.apply_to_jet(q)))
            val = lhs.apply_to_jet(q)
            floaty = floaty or isinstance(val, float) or isinstance(worst, float)
            scale = max(scale, abs(float(val)))
        if floaty:
            return float(worst) / max(1.0, scale)
        return worst


# ---------------------------------------------------------------------------
# group <-> algebra consistency along flows


def _nested_scale(v, s):
    if isinstance(v, list):
        return [_nested_scale(x, s) for x in v]
    return float(v) * s


def _nested_max_absdiff(a, b) -> float:
    if isinstance(a, list):
        return max((_nested_max_absdiff(x, y) for x, y in zip(a, b)), default=0.0)
    return abs(float(a) - float(b))


def group_algebra_consistency(X: VectorField, group_value: Callable,
                              algebra_value: Callable, t: float,
                              points: Sequence[tuple],
                              floor: float = 1e-9) -> list[dict]:
    """Finite-difference bridge between a group cocycle and its algebra
    shadow along the flow of a vector field.

    For each point the derivative estimate (c(f_t) - c(id))/t is compared to
    the algebra value at t and t/2; first-order convergence (the residual
    roughly halving, down to an integrator noise floor) is the pass
    criterion.  Values may be scalars or nested component tables.
    """
    rows = []
    for p in points:
        entry = {"point": [repr(float(c)) for c in p]}
        try:
            target = algebra_value(X, p)
            resid = []
            for tt in (t, t / 2):
                ft = flow_map(X, tt)
                fd = _nested_scale(group_value(ft, p), 1.0 / tt)
                resid.append(_nested_max_absdiff(fd, target))
            r_t, r_half = resid
            ok = r_half <= max(0.75 * r_t, floor)
            entry.update(residual_t=repr(r_t), residual_half=repr(r_half), passed=bool(ok))
        except Exception as exc:
            entry.update(passed=False, error=f"{type(exc).__name__}: {exc}")
        rows.append(entry)
    return rows
