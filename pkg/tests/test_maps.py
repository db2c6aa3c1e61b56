"""Catalog maps, composition, local inversion, cotangent lifts, flows."""

import math
import random
from fractions import Fraction

import pytest

from jetcocycles.jets import EvaluationError, Jet, Polynomial, SingularJacobianError
from jetcocycles.maps import (
    VectorField,
    catalog_get,
    compose,
    cotangent_lift,
    flow_map,
)

F = Fraction


def jets_equal(a, b, tol=0):
    if tol:
        return all(max(abs(x - y) for x, y in zip(ja.coeffs, jb.coeffs)) <= tol
                   for ja, jb in zip(a, b))
    return all(ja == jb for ja, jb in zip(a, b))


def rand_point(rng, dim, denom=16):
    return tuple(F(rng.randint(-8, 8), denom) for _ in range(dim))


# -- catalog -----------------------------------------------------------------


def test_linear_scaling():
    f = catalog_get("linear", {"A": 2})
    assert f((F(3),)) == (6,)
    assert f.jacobian((F(1),)) == [[2]]


def test_moebius_jets_exact_at_one():
    # x / (x + 1) at x = 1, direct rational-function differentiation:
    # value 1/2, then 1/4, -1/8, 1/16, -1/32 as monomial coefficients
    m = catalog_get("moebius", {"a": 1, "b": 0, "c": 1, "d": 1})
    j = m.eval_jet((F(1),), 4)[0]
    assert list(j.coeffs) == [F(1, 2), F(1, 4), F(-1, 8), F(1, 16), F(-1, 32)]


def test_moebius_pole_raises():
    m = catalog_get("moebius", {"a": 1, "b": 0, "c": 1, "d": 1})
    with pytest.raises(EvaluationError):
        m.eval_jet((F(-1),), 2)


def test_polynomial_perturbation_identity_jacobian_at_origin():
    f = catalog_get("polynomial_perturbation", {"eps": 1})
    assert f.jacobian((F(0),)) == [[1]]
    g = catalog_get("polynomial_perturbation", {"dim": 2, "eps": F(1, 8)})
    assert g.jacobian((F(0), F(0))) == [[1, 0], [0, 1]]


def test_unknown_catalog_name():
    with pytest.raises(KeyError):
        catalog_get("spiral")


def test_singular_parameters_rejected():
    with pytest.raises(SingularJacobianError):
        catalog_get("moebius", {"a": 1, "b": 1, "c": 1, "d": 1})
    with pytest.raises(SingularJacobianError):
        catalog_get("linear", {"dim": 2, "A": [[1, 2], [2, 4]]})


# -- composition and inversion ------------------------------------------------


def test_compose_with_identity():
    f = catalog_get("moebius", {"a": 2, "b": 1, "c": 1, "d": 1})
    ident = catalog_get("identity")
    p = (F(1, 3),)
    assert jets_equal(compose(f, ident).eval_jet(p, 4), f.eval_jet(p, 4))
    assert jets_equal(compose(ident, f).eval_jet(p, 4), f.eval_jet(p, 4))


def test_compose_linear_is_matrix_product():
    a = [[1, 1], [0, 1]]
    b = [[2, 0], [1, 1]]
    fa = catalog_get("linear", {"dim": 2, "A": a})
    fb = catalog_get("linear", {"dim": 2, "A": b})
    ab = [[sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    fab = catalog_get("linear", {"dim": 2, "A": ab})
    p = (F(1, 4), F(-1, 2))
    assert jets_equal(compose(fa, fb).eval_jet(p, 3), fab.eval_jet(p, 3))


def test_compose_associative_on_jets():
    rng = random.Random(17)
    f = catalog_get("moebius", {"a": 1, "b": 0, "c": 1, "d": 2})
    h = catalog_get("polynomial_perturbation", {"eps": F(1, 8)})
    g = catalog_get("affine", {"A": F(3, 2), "b": F(1, 8)})
    for _ in range(5):
        p = rand_point(rng, 1)
        lhs = compose(compose(f, h), g).eval_jet(p, 4)
        rhs = compose(f, compose(h, g)).eval_jet(p, 4)
        assert jets_equal(lhs, rhs)


def test_invert_linear():
    f = catalog_get("linear", {"A": 2})
    inv = f.invert((F(1),))
    j = inv.eval_jet((F(2),), 2)[0]
    assert j.value == 1 and j.coefficient((1,)) == F(1, 2)


def test_invert_cubic_jets_match_kernel_reversion():
    from jetcocycles.jets import jet_invert

    f = catalog_get("polynomial_perturbation", {"eps": 1})
    inv = f.invert((F(0),))
    got = inv.eval_jet((F(0),), 4)[0]
    oracle = jet_invert([f.eval_jet((F(0),), 4)[0] - 0])[0]
    assert got == oracle
    assert list(got.coeffs)[:4] == [0, 1, 0, -1]


def test_invert_round_trip_is_parent():
    f = catalog_get("moebius", {"a": 2, "b": 1, "c": 1, "d": 1})
    inv = f.invert((F(1, 3),))
    assert inv.invert((f((F(1, 3),)))) is f


def test_inverse_compose_identity_jets():
    f = catalog_get("polynomial_perturbation", {"dim": 2, "eps": F(1, 8)})
    p = (F(1, 4), F(-3, 8))
    inv = f.invert(p)
    round_trip = compose(inv, f)
    jets = round_trip.eval_jet(p, 4)
    ident = [Jet.variable(2, 4, k, p[k]) for k in range(2)]
    assert jets_equal(jets, ident)


def test_inverse_needs_anchor_on_exact_backend():
    f = catalog_get("polynomial_perturbation", {"eps": 1})
    inv = f.invert((F(0),))
    with pytest.raises(EvaluationError):
        inv.eval_jet((F(1, 2),), 2)


# -- cotangent lift ----------------------------------------------------------


def test_lift_of_scaling():
    f = catalog_get("linear", {"A": 2})
    lift = cotangent_lift(f)
    assert lift((F(1), F(4))) == (2, 2)
    js = lift.eval_jet((F(1), F(4)), 2)
    assert js[0].coefficient((1, 0)) == 2
    assert js[1].coefficient((0, 1)) == F(1, 2)


def test_lift_of_identity():
    lift = cotangent_lift(catalog_get("identity", {"dim": 2}))
    p = (F(1, 4), F(0), F(1, 2), F(-1))
    jets = lift.eval_jet(p, 3)
    ident = [Jet.variable(4, 3, k, p[k]) for k in range(4)]
    assert jets_equal(jets, ident)


def symplectic_defect(lift_jacobian, n):
    om = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        om[i][n + i] = 1
        om[n + i][i] = -1
    J = lift_jacobian
    d = 2 * n
    worst = 0
    for i in range(d):
        for j in range(d):
            got = sum(J[a][i] * om[a][b] * J[b][j] for a in range(d) for b in range(d))
            worst = max(worst, abs(got - om[i][j]))
    return worst


def test_lift_jacobians_symplectic_exact():
    rng = random.Random(23)
    maps2 = [
        catalog_get("projective", {"dim": 2}),
        catalog_get("polynomial_perturbation", {"dim": 2, "eps": F(1, 8)}),
        catalog_get("affine", {"dim": 2, "A": [[1, 1], [0, 1]], "b": [F(1, 4), 0]}),
    ]
    for f in maps2:
        lift = cotangent_lift(f)
        for _ in range(4):
            z = rand_point(rng, 4)
            if f.jacobian_det(z[:2]) == 0:
                continue
            assert symplectic_defect(lift.jacobian(z), 2) == 0


def test_lift_functoriality_on_jets():
    rng = random.Random(29)
    f = catalog_get("projective", {"dim": 2})
    h = catalog_get("polynomial_perturbation", {"dim": 2, "eps": F(1, 8)})
    for _ in range(4):
        z = rand_point(rng, 4)
        if h.jacobian_det(z[:2]) == 0 or f.jacobian_det(h(z[:2])) == 0:
            continue
        lhs = cotangent_lift(compose(f, h)).eval_jet(z, 3)
        rhs = compose(cotangent_lift(f), cotangent_lift(h)).eval_jet(z, 3)
        assert jets_equal(lhs, rhs)


def test_lift_of_inverse_is_inverse_of_lift():
    f = catalog_get("moebius", {"a": 2, "b": 1, "c": 1, "d": 1})
    x0 = (F(1, 3),)
    z0 = (F(1, 3), F(2))
    lift = cotangent_lift(f)
    z1 = lift(z0)
    a = lift.invert(z0).eval_jet(z1, 3)
    b = cotangent_lift(f.invert(x0)).eval_jet(z1, 3)
    assert jets_equal(a, b)


# -- vector fields and flows -------------------------------------------------


def test_bracket_antisymmetric_and_jacobi():
    rng = random.Random(31)

    def rand_field(tag):
        comps = []
        for i in range(2):
            terms = {}
            for m in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
                k = rng.randint(-3, 3)
                if k:
                    terms[m] = F(k, 4)
            comps.append(Polynomial(2, terms))
        return VectorField.from_polynomials(comps, name=tag)

    X, Y, Z = rand_field("X"), rand_field("Y"), rand_field("Z")
    p = (F(1, 3), F(-1, 2))
    xy = X.bracket(Y)
    yx = Y.bracket(X)
    assert all((a + b).is_zero() for a, b in zip(xy.eval_jet(p, 2), yx.eval_jet(p, 2)))
    jac = X.bracket(Y.bracket(Z)).eval_jet(p, 1)
    jac2 = Y.bracket(Z.bracket(X)).eval_jet(p, 1)
    jac3 = Z.bracket(X.bracket(Y)).eval_jet(p, 1)
    assert all((a + b + c).is_zero() for a, b, c in zip(jac, jac2, jac3))


def test_flow_of_constant_field_is_translation():
    X = VectorField.from_polynomials([Polynomial.constant(1, 0.75)])
    f = flow_map(X, 0.5)
    assert abs(f((1.0,))[0] - 1.375) < 1e-12
    assert abs(f.jacobian((1.0,))[0][0] - 1.0) < 1e-12


def test_flow_of_euler_field_is_exponential():
    X = VectorField.from_polynomials([Polynomial.coordinate(1, 0)])
    f = flow_map(X, 0.5)
    assert abs(f((1.0,))[0] - math.exp(0.5)) < 1e-9
    assert abs(f.jacobian((1.0,))[0][0] - math.exp(0.5)) < 1e-9


def test_flow_group_property():
    X = VectorField.from_polynomials([Polynomial(1, {(2,): 0.5})])
    f_s = flow_map(X, 0.2)
    f_t = flow_map(X, 0.3)
    f_st = flow_map(X, 0.5)
    x = (0.4,)
    lhs = f_st(x)[0]
    rhs = f_s(f_t(x))[0]
    assert abs(lhs - rhs) < 1e-9


def test_flow_rejects_bad_steps():
    X = VectorField.from_polynomials([Polynomial.coordinate(1, 0)])
    with pytest.raises(ValueError):
        flow_map(X, 1.0, steps=0)
