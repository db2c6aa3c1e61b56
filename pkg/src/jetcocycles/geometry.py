"""Affine connections on chart domains and their canonical phase-space lift.

A connection is a field of Christoffel symbols, jet-evaluable at points; the
difference of two connections is a (2,1)-tensor, which is what the map
comparison cocycles produce.  Index convention on phase space: base slots
0..n-1, fiber slots n..2n-1.

The lift of a base connection to phase space fills the blocks

    G~^k_ij      = G^k_ij                (base x base x base)
    G~^k_(any fiber lower or upper-base with fiber lower) = 0
    G~^kbar_ij   = xi_a (d_k G^a_ij - d_i G^a_jk - d_j G^a_ik
                          + 2 G^a_kt G^t_ij)
    G~^kbar_i jbar = -G^j_ik,   G~^kbar_ibar j = -G^i_kj,
    G~^kbar_ibar jbar = 0

which is symmetric in the lower pair and linear in the fiber variable.
Pullback of a connection along a map F uses, with J = DF(x),

    (F*G)^k_ij(x) = (J^-1)^k_c [ G^c_ab(F(x)) J^a_i J^b_j + d_i J^c_j ]

so that (F o H)* = H* o F*; dropping the inhomogeneous dJ term gives the
plain (2,1)-tensor pullback used on connection differences.
"""

from __future__ import annotations

from typing import Callable

from .jets import (
    Jet,
    JetShapeError,
    Polynomial,
    Scalar,
    jet_compose,
    mat_inv,
)
from .maps import DiffeoMap

__all__ = [
    "Connection",
    "TensorField21",
    "symplectic_bivector",
    "lift_connection",
    "pullback_connection",
    "pullback_tensor",
    "cocycle_C",
    "covariant_derivs",
]

Components = list  # nested [k][i][j] table of jets


class _Field21:
    """Shared machinery for jet-evaluable [k][i][j] component fields."""

    def __init__(self, dim: int, component_fn: Callable[[tuple, int], Components],
                 name: str = "field"):
        self.dim = dim
        self._component_fn = component_fn
        self.name = name

    def components(self, point: tuple, order: int) -> Components:
        if len(point) != self.dim:
            raise JetShapeError(f"{self.name}: point has wrong dimension")
        return self._component_fn(tuple(point), order)

    def values(self, point: tuple) -> list:
        comps = self.components(point, 0)
        d = self.dim
        return [[[comps[k][i][j].value for j in range(d)] for i in range(d)] for k in range(d)]

    def symmetry_defect(self, point: tuple) -> Scalar:
        """Largest |T^k_ij - T^k_ji| over all components at the point."""
        v = self.values(point)
        d = self.dim
        return max(
            abs(v[k][i][j] - v[k][j][i]) for k in range(d) for i in range(d) for j in range(d)
        )


class Connection(_Field21):
    """Christoffel symbol field, symmetric in its lower indices."""

    def __init__(self, dim, component_fn, name="Gamma", flat=False):
        super().__init__(dim, component_fn, name=name)
        self.flat = flat

    @staticmethod
    def flat_connection(dim: int) -> "Connection":
        def fn(point, order):
            z = Jet.zero(dim, order)
            return [[[z for _ in range(dim)] for _ in range(dim)] for _ in range(dim)]

        return Connection(dim, fn, name="flat", flat=True)

    @staticmethod
    def from_polynomials(dim: int, entries: dict[tuple[int, int, int], Polynomial],
                         name: str = "Gamma") -> "Connection":
        """Connection with polynomial components; (k,i,j) entries are
        symmetrized over (i,j) automatically."""
        table: dict[tuple[int, int, int], Polynomial] = {}
        for (k, i, j), poly in entries.items():
            table[(k, i, j)] = poly
            table.setdefault((k, j, i), poly)
        for (k, i, j), poly in table.items():
            other = table[(k, j, i)]
            if other.terms != poly.terms:
                raise JetShapeError(f"{name}: lower indices ({i},{j}) not symmetric")

        def fn(point, order):
            z = Jet.zero(dim, order)
            out = [[[z for _ in range(dim)] for _ in range(dim)] for _ in range(dim)]
            for (k, i, j), poly in table.items():
                out[k][i][j] = poly.jet(point, order)
            return out

        return Connection(dim, fn, name=name, flat=not table)


class TensorField21(_Field21):
    """A (2,1)-tensor field, e.g. the difference of two connections."""


def symplectic_bivector(n: int) -> list[list[int]]:
    """Constant bivector dual to the canonical symplectic structure.

    g^[i][n+j] = delta_ij = -g^[n+j][i]; all other entries vanish.
    """
    g = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        g[i][n + i] = 1
        g[n + i][i] = -1
    return g


# ---------------------------------------------------------------------------
# the canonical lift


def lift_connection(gamma: Connection) -> Connection:
    """Lift a base connection to a symmetric connection on phase space."""
    n = gamma.dim

    if gamma.flat:
        lifted = Connection.flat_connection(2 * n)
        lifted.name = f"lift({gamma.name})"
        return lifted

    def fn(point, order):
        x = point[:n]
        base_axes = list(range(n))
        g1 = gamma.components(x, order + 1)  # one derivative is consumed below
        z = Jet.zero(2 * n, order)
        out = [[[z for _ in range(2 * n)] for _ in range(2 * n)] for _ in range(2 * n)]

        def lift0(jet: Jet) -> Jet:
            return jet.truncated(order).embed(2 * n, base_axes)

        for k in range(n):
            for i in range(n):
                for j in range(n):
                    out[k][i][j] = lift0(g1[k][i][j])
        xi_vars = [Jet.variable(2 * n, order, n + a, point[n + a]) for a in range(n)]
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    acc = Jet.zero(2 * n, order)
                    for a in range(n):
                        expr = (
                            g1[a][i][j].partial(k)
                            - g1[a][j][k].partial(i)
                            - g1[a][i][k].partial(j)
                        ).truncated(order).embed(2 * n, base_axes)
                        quad = Jet.zero(n, order)
                        for t in range(n):
                            quad = quad + g1[a][k][t].truncated(order) * g1[t][i][j].truncated(order)
                        expr = expr + 2 * quad.embed(2 * n, base_axes)
                        acc = acc + xi_vars[a] * expr
                    out[n + k][i][j] = acc
                    out[n + k][i][n + j] = -lift0(g1[j][i][k])
                    out[n + k][n + i][j] = -lift0(g1[i][k][j])
        return out

    lifted = Connection(2 * n, fn, name=f"lift({gamma.name})", flat=False)
    lifted.base = gamma
    return lifted


# ---------------------------------------------------------------------------
# pullbacks and the comparison tensor


def _pullback_components(mapping: DiffeoMap, field: _Field21, point: tuple,
                         order: int, with_inhomogeneous: bool) -> Components:
    d = mapping.dim
    if field.dim != d:
        raise JetShapeError("map and field dimensions differ")
    fj = mapping.eval_jet(point, order + 2)
    image = tuple(j.value for j in fj)
    jac = [[fj[a].partial(i).truncated(order + 1) for i in range(d)] for a in range(d)]
    jac_inv = mat_inv([[jac[a][i].truncated(order) for i in range(d)] for a in range(d)])

    target = None
    if not (isinstance(field, Connection) and field.flat):
        g_img = field.components(image, order)
        shifted = [(j - j.value).truncated(order) for j in fj]
        target = [
            [
                [jet_compose(g_img[c][a][b], shifted) for b in range(d)]
                for a in range(d)
            ]
            for c in range(d)
        ]

    zero = Jet.zero(d, order)
    out = [[[zero for _ in range(d)] for _ in range(d)] for _ in range(d)]
    for k in range(d):
        for i in range(d):
            for j in range(d):
                acc = Jet.zero(d, order)
                for c in range(d):
                    inner = Jet.zero(d, order)
                    if target is not None:
                        for a in range(d):
                            for b in range(d):
                                t = target[c][a][b]
                                if t.is_zero():
                                    continue
                                inner = inner + t * jac[a][i].truncated(order) * jac[b][j].truncated(order)
                    if with_inhomogeneous:
                        inner = inner + jac[c][j].partial(i).truncated(order)
                    if inner.is_zero():
                        continue
                    acc = acc + jac_inv[k][c] * inner
                out[k][i][j] = acc
    return out


def pullback_connection(mapping: DiffeoMap, gamma: Connection) -> Connection:
    """Transport a connection through a map; contravariant for composition."""

    def fn(point, order):
        return _pullback_components(mapping, gamma, point, order, with_inhomogeneous=True)

    return Connection(mapping.dim, fn, name=f"{mapping.name}*({gamma.name})")


def pullback_tensor(mapping: DiffeoMap, tensor: _Field21) -> TensorField21:
    """Plain (2,1)-tensor pullback: no inhomogeneous Jacobian-derivative term."""

    def fn(point, order):
        return _pullback_components(mapping, tensor, point, order, with_inhomogeneous=False)

    return TensorField21(mapping.dim, fn, name=f"{mapping.name}*[{tensor.name}]")


def cocycle_C(lifted_map: DiffeoMap, gamma_lifted: Connection) -> TensorField21:
    """Comparison tensor of a phase-space map against the lifted connection."""
    pulled = pullback_connection(lifted_map, gamma_lifted)

    def fn(point, order):
        a = pulled.components(point, order)
        d = lifted_map.dim
        if gamma_lifted.flat:
            return a
        b = gamma_lifted.components(point, order)
        return [
            [[a[k][i][j] - b[k][i][j] for j in range(d)] for i in range(d)]
            for k in range(d)
        ]

    return TensorField21(lifted_map.dim, fn, name=f"C({lifted_map.name})")


# ---------------------------------------------------------------------------
# covariant derivatives of scalars


def covariant_derivs(q, gamma: Connection, point: tuple):
    """First, second and third covariant derivatives of a scalar at a point.

    ``q`` is a jet provider; needs its order-3 jet and the connection's
    order-1 jets.  Returns (grad[a], hess[b][a], third[c][b][a]) value tables;
    the second table is symmetric for a torsion-free connection.
    """
    d = gamma.dim
    qj = q.jet(point, 3)
    first = [qj.partial(a) for a in range(d)]  # jets, order 2
    grad = [f.value for f in first]

    if gamma.flat:
        hess_jets = [[first[a].partial(b) for a in range(d)] for b in range(d)]
        hess = [[h.value for h in row] for row in hess_jets]
        third = [
            [[hess_jets[b][a].partial(c).value for a in range(d)] for b in range(d)]
            for c in range(d)
        ]
        return grad, hess, third

    gj = gamma.components(point, 1)
    hess_jets = []
    for b in range(d):
        row = []
        for a in range(d):
            acc = first[a].partial(b)  # order 1
            for c in range(d):
                gc = gj[c][b][a]
                if gc.is_zero():
                    continue
                acc = acc - gc * first[c].truncated(1)
            row.append(acc)
        hess_jets.append(row)
    hess = [[h.value for h in row] for row in hess_jets]

    gval = [[[gj[k][i][j].value for j in range(d)] for i in range(d)] for k in range(d)]
    third = []
    for c in range(d):
        plane = []
        for b in range(d):
            row = []
            for a in range(d):
                v = hess_jets[b][a].partial(c).value
                for e in range(d):
                    v = v - gval[e][c][b] * hess[e][a] - gval[e][c][a] * hess[b][e]
                row.append(v)
            plane.append(row)
        third.append(plane)
    return grad, hess, third
