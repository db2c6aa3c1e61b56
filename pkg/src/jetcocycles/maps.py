"""Diffeomorphisms of chart domains and their cotangent lifts.

Maps live on open subsets of R^n (or R^2n for phase-space maps); every
statement downstream is local, so a map is just a recipe producing jets of
its component functions at a requested point.  The builtin catalog covers
the rational families used by the exact backend plus an exponential family
for the float backend.

Fiber convention for the cotangent lift, with J = Df(x):

    f~(x, xi) = (f(x), J^{-T} xi),   i.e.  xi'_j = (dx^i/df^j) xi_i.

Base coordinates occupy slots 0..n-1 and fiber coordinates slots n..2n-1 on
phase space.  Local inverses are anchored: an inverse map knows preimages of
the points it was derived at and solves exactly there (Newton refinement is
available on the float backend only).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Sequence

from .jets import (
    EvaluationError,
    Jet,
    JetShapeError,
    Polynomial,
    Scalar,
    SingularJacobianError,
    jet_compose,
    jet_invert,
    mat_det,
    mat_inv,
)

__all__ = [
    "DiffeoMap",
    "CotangentMap",
    "VectorField",
    "catalog_get",
    "catalog_entries",
    "compose",
    "cotangent_lift",
    "flow_map",
]

Point = tuple


def _shifted(jets: Sequence[Jet]) -> list[Jet]:
    return [j - j.value for j in jets]


class DiffeoMap:
    """A smooth map of a chart domain, presented through its jets.

    ``jet_fn(point, order)`` returns the component jets at the point; the
    map is a local diffeomorphism wherever its Jacobian is invertible, which
    callers are expected to arrange through sampling.
    """

    def __init__(
        self,
        dim: int,
        jet_fn: Callable[[Point, int], list[Jet]],
        name: str = "map",
        params: dict | None = None,
        orientation_preserving: bool | None = None,
        singular_note: str = "",
        rational: bool = False,
    ):
        self.dim = dim
        self._jet_fn = jet_fn
        self.name = name
        self.params = params or {}
        self.orientation_preserving = orientation_preserving
        self.singular_note = singular_note
        self.rational = rational

    def eval_jet(self, point: Point, order: int) -> list[Jet]:
        if len(point) != self.dim:
            raise JetShapeError(f"{self.name}: point has wrong dimension")
        return self._jet_fn(tuple(point), order)

    def __call__(self, point: Point) -> Point:
        return tuple(j.value for j in self.eval_jet(point, 0))

    def jacobian(self, point: Point) -> list[list[Scalar]]:
        jets = self.eval_jet(point, 1)
        return [[jets[i].partial(j).value for j in range(self.dim)] for i in range(self.dim)]

    def jacobian_det(self, point: Point) -> Scalar:
        return mat_det(self.jacobian(point))

    def compose(self, other: "DiffeoMap") -> "DiffeoMap":
        return compose(self, other)

    def invert(self, at: Point) -> "_LocalInverse":
        """Local inverse anchored at the image of ``at``."""
        if mat_det(self.jacobian(at)) == 0:
            raise SingularJacobianError(f"{self.name}: singular Jacobian at {at}")
        return _LocalInverse(self, [tuple(at)])

    def __repr__(self):
        return f"DiffeoMap({self.name}, dim={self.dim})"


def compose(f: DiffeoMap, h: DiffeoMap) -> DiffeoMap:
    """Jets of f o h, exact to the shared truncation order."""
    if f.dim != h.dim:
        raise JetShapeError("composition requires equal dimensions")

    def jet_fn(point, order):
        inner = h.eval_jet(point, order)
        mid = tuple(j.value for j in inner)
        outer = f.eval_jet(mid, order)
        shifted = _shifted(inner)
        return [jet_compose(o, shifted) for o in outer]

    orient = None
    if f.orientation_preserving and h.orientation_preserving:
        orient = True
    return DiffeoMap(
        f.dim,
        jet_fn,
        name=f"({f.name} o {h.name})",
        orientation_preserving=orient,
        rational=f.rational and h.rational,
    )


class _LocalInverse(DiffeoMap):
    """Inverse of a parent map, evaluable at registered image points.

    Exact backends require the evaluation point to be the exact image of a
    known anchor; float inputs fall back to Newton iteration seeded by the
    nearest anchor.
    """

    def __init__(self, parent: DiffeoMap, anchors: list[Point]):
        self.parent = parent
        self.anchors = [tuple(a) for a in anchors]
        super().__init__(
            parent.dim,
            self._inverse_jets,
            name=f"{parent.name}^-1",
            orientation_preserving=parent.orientation_preserving,
            rational=parent.rational,
        )

    def add_anchor(self, preimage: Point) -> "_LocalInverse":
        p = tuple(preimage)
        if p not in self.anchors:
            self.anchors.append(p)
        return self

    def _preimage(self, point: Point) -> Point:
        for a in self.anchors:
            if tuple(self.parent(a)) == tuple(point):
                return a
        if all(isinstance(c, float) for c in point) and self.anchors:
            return self._newton(point)
        raise EvaluationError(
            f"{self.name}: no anchor maps to {point}; register the preimage first"
        )

    def _newton(self, point: Point) -> Point:
        guess = min(
            self.anchors,
            key=lambda a: sum((float(x) - float(y)) ** 2 for x, y in zip(self.parent(a), point)),
        )
        p = [float(c) for c in guess]
        for _ in range(60):
            val = self.parent(tuple(p))
            resid = [float(v) - float(t) for v, t in zip(val, point)]
            if max(abs(r) for r in resid) < 1e-13:
                return tuple(p)
            step = mat_inv(self.parent.jacobian(tuple(p)))
            p = [
                pi - sum(step[i][j] * resid[j] for j in range(self.dim))
                for i, pi in enumerate(p)
            ]
        raise EvaluationError(f"{self.name}: Newton iteration failed near {point}")

    def _inverse_jets(self, point: Point, order: int) -> list[Jet]:
        pre = self._preimage(point)
        fj = self.parent.eval_jet(pre, order)
        inv = jet_invert(_shifted(fj))
        return [g + c for g, c in zip(inv, pre)]

    def invert(self, at: Point) -> DiffeoMap:
        # the inverse of an anchored inverse is the parent
        self._preimage(at)
        return self.parent


class CotangentMap(DiffeoMap):
    """Symplectic lift of a base diffeomorphism to phase space."""

    def __init__(self, base: DiffeoMap):
        self.base = base
        n = base.dim
        super().__init__(
            2 * n,
            self._lift_jets,
            name=f"T*{base.name}",
            orientation_preserving=True,
            rational=base.rational,
        )

    def _lift_jets(self, point: Point, order: int) -> list[Jet]:
        n = self.base.dim
        x, xi = point[:n], point[n:]
        fj = self.base.eval_jet(x, order + 1)
        jac = [[fj[a].partial(i) for i in range(n)] for a in range(n)]
        if mat_det([[jac[a][i].value for i in range(n)] for a in range(n)]) == 0:
            raise SingularJacobianError(f"{self.base.name}: singular Jacobian at {x}")
        jac_inv = mat_inv(jac)  # entries are jets of (dx/df)^i_a at x
        base_axes = list(range(n))
        out = [fj[a].truncated(order).embed(2 * n, base_axes) for a in range(n)]
        xi_vars = [Jet.variable(2 * n, order, n + i, xi[i]) for i in range(n)]
        for j in range(n):
            # xi'_j = (dx^i/df^j) xi_i, the transpose-inverse acting on the fiber
            comp = Jet.zero(2 * n, order)
            for i in range(n):
                comp = comp + jac_inv[i][j].embed(2 * n, base_axes) * xi_vars[i]
            out.append(comp)
        return out

    def invert(self, at: Point) -> DiffeoMap:
        inv = super().invert(at)
        inv.name = f"T*{self.base.name}^-1"
        return inv


def cotangent_lift(f: DiffeoMap) -> CotangentMap:
    """Canonical extension of f to phase space: (x, xi) -> (f(x), Df^{-T} xi)."""
    return CotangentMap(f)


class VectorField:
    """Vector field on a chart, components given by jet providers."""

    def __init__(self, dim: int, components: Sequence, name: str = "X"):
        if len(components) != dim:
            raise JetShapeError("vector field needs one component per variable")
        self.dim = dim
        self.components = list(components)
        self.name = name

    @staticmethod
    def from_polynomials(polys: Sequence[Polynomial], name: str = "X") -> "VectorField":
        return VectorField(len(polys), polys, name=name)

    def eval_jet(self, point: Point, order: int) -> list[Jet]:
        return [c.jet(point, order) for c in self.components]

    def __call__(self, point: Point) -> Point:
        return tuple(c.jet(point, 0).value for c in self.components)

    def bracket(self, other: "VectorField") -> "VectorField":
        """Lie bracket [X, Y]; polynomial components stay polynomial."""
        if self.dim != other.dim:
            raise JetShapeError("bracket requires equal dimensions")
        if not all(isinstance(c, Polynomial) for c in self.components + other.components):
            raise JetShapeError("bracket implemented for polynomial fields")
        comps = []
        for i in range(self.dim):
            acc = Polynomial(self.dim, {})
            for a in range(self.dim):
                xa = self.components[a]
                ya = other.components[a]
                dyi = other.components[i].partial(a)
                dxi = self.components[i].partial(a)
                acc = acc + _poly_mul(xa, dyi) + _poly_scale(_poly_mul(ya, dxi), -1)
            comps.append(acc)
        return VectorField(self.dim, comps, name=f"[{self.name},{other.name}]")


def _poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    out: dict[tuple[int, ...], Scalar] = {}
    for m, c in p.terms.items():
        for m2, c2 in q.terms.items():
            t = tuple(a + b for a, b in zip(m, m2))
            out[t] = out.get(t, 0) + c * c2
    return Polynomial(p.dim, out)


def _poly_scale(p: Polynomial, s: Scalar) -> Polynomial:
    return Polynomial(p.dim, {m: s * c for m, c in p.terms.items()})


# ---------------------------------------------------------------------------
# catalog


def _polynomial_map(dim: int, polys: Sequence[Polynomial], **kw) -> DiffeoMap:
    def jet_fn(point, order):
        return [p.jet(point, order) for p in polys]

    return DiffeoMap(dim, jet_fn, rational=True, **kw)


def _as_matrix(a, n) -> list[list]:
    if n == 1 and not isinstance(a, (list, tuple)):
        return [[a]]
    return [list(row) for row in a]


def catalog_get(name: str, params: dict | None = None, dim: int = 1) -> DiffeoMap:
    """Construct a catalog map; see :func:`catalog_entries` for schemas."""
    params = dict(params or {})
    n = int(params.pop("dim", dim))

    if name == "identity":
        polys = [Polynomial.coordinate(n, i) for i in range(n)]
        return _polynomial_map(n, polys, name="identity", params={"dim": n},
                               orientation_preserving=True)

    if name == "translation":
        c = params.get("c", [1] * n)
        c = [c] if n == 1 and not isinstance(c, (list, tuple)) else list(c)
        polys = [
            Polynomial.coordinate(n, i) + Polynomial.constant(n, c[i]) for i in range(n)
        ]
        return _polynomial_map(n, polys, name="translation", params={"c": c},
                               orientation_preserving=True)

    if name in ("linear", "affine"):
        a = _as_matrix(params.get("A", 2 if n == 1 else [[1, 1], [0, 1]][:n]), n)
        b = params.get("b", [0] * n) if name == "affine" else [0] * n
        b = [b] if n == 1 and not isinstance(b, (list, tuple)) else list(b)
        det = mat_det(a)
        if det == 0:
            raise SingularJacobianError(f"{name}: matrix is singular")
        polys = []
        for i in range(n):
            terms = {tuple(1 if k == j else 0 for k in range(n)): a[i][j] for j in range(n)}
            terms[(0,) * n] = terms.get((0,) * n, 0) + b[i]
            polys.append(Polynomial(n, terms))
        return _polynomial_map(
            n, polys, name=name, params={"A": a, "b": b},
            orientation_preserving=bool(det > 0),
        )

    if name == "polynomial_perturbation":
        eps = params.get("eps", Fraction(1, 8))
        polys = []
        for i in range(n):
            # component i: x_i + eps * (x_i + x_{i+1 mod n})^3, Jacobian = I at 0
            terms: dict[tuple[int, ...], Scalar] = {}
            if n == 1:
                terms[(3,)] = eps
            else:
                j = (i + 1) % n
                for k in range(4):
                    m = [0] * n
                    m[i] += 3 - k
                    m[j] += k
                    t = tuple(m)
                    terms[t] = terms.get(t, 0) + eps * math.comb(3, k)
            polys.append(Polynomial.coordinate(n, i) + Polynomial(n, terms))
        return _polynomial_map(
            n, polys, name="polynomial_perturbation", params={"eps": eps},
            orientation_preserving=None,
            singular_note="Jacobian may vanish far from the origin for large eps",
        )

    if name == "moebius":
        if n != 1:
            raise JetShapeError("moebius is a 1-dimensional family")
        a, b = params.get("a", 1), params.get("b", 0)
        c, d = params.get("c", 1), params.get("d", 1)
        if a * d - b * c == 0:
            raise SingularJacobianError("moebius: ad - bc = 0")
        num = Polynomial(1, {(1,): a, (0,): b})
        den = Polynomial(1, {(1,): c, (0,): d})

        def jet_fn(point, order):
            dj = den.jet(point, order)
            if dj.value == 0:
                raise EvaluationError(f"moebius: pole at x={point[0]}")
            return [num.jet(point, order) / dj]

        return DiffeoMap(
            1, jet_fn, name="moebius", params={"a": a, "b": b, "c": c, "d": d},
            orientation_preserving=bool(a * d - b * c > 0), rational=True,
            singular_note=f"pole at x = -d/c when c != 0",
        )

    if name == "projective":
        m = params.get("A")
        if m is None:
            m = [[1 if i == j else 0 for j in range(n + 1)] for i in range(n + 1)]
            m[0][n] = Fraction(1, 4)
            m[n][0] = Fraction(1, 4)
        m = [list(r) for r in m]
        if mat_det(m) == 0:
            raise SingularJacobianError("projective: matrix is singular")
        rows = [
            Polynomial(
                n,
                {
                    **{tuple(1 if k == j else 0 for k in range(n)): m[i][j] for j in range(n)},
                    (0,) * n: m[i][n],
                },
            )
            for i in range(n + 1)
        ]

        def jet_fn(point, order):
            dj = rows[n].jet(point, order)
            if dj.value == 0:
                raise EvaluationError(f"projective: hyperplane at infinity hit at {point}")
            rec = dj.reciprocal()
            return [rows[i].jet(point, order) * rec for i in range(n)]

        return DiffeoMap(
            n, jet_fn, name="projective", params={"A": m},
            orientation_preserving=None, rational=True,
            singular_note="undefined where the last homogeneous row vanishes",
        )

    if name == "exp_scale":
        lam = float(params.get("lam", 1.0))
        if lam == 0:
            raise SingularJacobianError("exp_scale: lam must be nonzero")

        def jet_fn(point, order):
            out = []
            for i in range(n):
                xi = Jet.variable(n, order, i, float(point[i]))
                out.append((xi * lam).exp())
            return out

        return DiffeoMap(
            n, jet_fn, name="exp_scale", params={"lam": lam},
            orientation_preserving=lam > 0, rational=False,
        )

    raise KeyError(f"unknown catalog map '{name}'")


def catalog_entries() -> list[dict]:
    """Names, parameter schemas and singular-locus notes for the catalog."""
    return [
        {"name": "identity", "params": {"dim": "n"}, "singular": "none"},
        {"name": "translation", "params": {"dim": "n", "c": "vector"}, "singular": "none"},
        {"name": "linear", "params": {"dim": "n", "A": "n x n matrix, det != 0"},
         "singular": "none (global once det != 0)"},
        {"name": "affine", "params": {"dim": "n", "A": "n x n matrix, det != 0", "b": "vector"},
         "singular": "none (global once det != 0)"},
        {"name": "polynomial_perturbation",
         "params": {"dim": "n", "eps": "scalar, small"},
         "singular": "Jacobian zeros far from origin for large eps"},
        {"name": "moebius", "params": {"dim": "1", "a,b,c,d": "scalars, ad-bc != 0"},
         "singular": "pole at x = -d/c"},
        {"name": "projective",
         "params": {"dim": "n", "A": "(n+1) x (n+1) matrix, det != 0"},
         "singular": "hyperplane where last homogeneous coordinate vanishes"},
        {"name": "exp_scale", "params": {"dim": "n", "lam": "float, nonzero"},
         "singular": "none on the float backend"},
    ]


# ---------------------------------------------------------------------------
# flows


def flow_map(field: VectorField, t: float, order: int = 3, steps: int = 64) -> DiffeoMap:
    """Approximate time-t flow of a vector field.

    Classical RK4 with fixed step t/steps, integrating the jet of the flow
    map directly so derivatives up to ``order`` ride along (the variational
    equations in monomial coordinates).  Float backend only; accuracy is the
    integrator's O(h^4), good enough for consistency checks, not identities.
    """
    if steps <= 0:
        raise ValueError("steps must be positive")
    h = float(t) / steps
    if t != 0 and abs(h) < 1e-300:
        raise EvaluationError("flow step size underflow")
    n = field.dim

    def rhs(state: list[Jet]) -> list[Jet]:
        base = tuple(float(s.value) for s in state)
        xj = field.eval_jet(base, order)
        shifted = [s - s.value for s in state]
        return [jet_compose(c, shifted) for c in xj]

    def jet_fn(point, order_req):
        if order_req > order:
            raise JetShapeError(
                f"flow map carries jets to order {order}, requested {order_req}"
            )
        state = [Jet.variable(n, order, i, float(point[i])) for i in range(n)]
        for _ in range(steps):
            k1 = rhs(state)
            k2 = rhs([s + k * (h / 2) for s, k in zip(state, k1)])
            k3 = rhs([s + k * (h / 2) for s, k in zip(state, k2)])
            k4 = rhs([s + k * h for s, k in zip(state, k3)])
            state = [
                s + (a + b * 2 + c * 2 + d) * (h / 6)
                for s, a, b, c, d in zip(state, k1, k2, k3, k4)
            ]
        return [s.truncated(order_req) for s in state]

    return DiffeoMap(
        n, jet_fn, name=f"flow({field.name}, t={t})",
        params={"t": t, "steps": steps}, orientation_preserving=True,
    )
