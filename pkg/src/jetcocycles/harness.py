"""Batch verification harness: seeded scenarios, suites, JSON reports.

A scenario fixes the dimension, scalar backend, truncation order, tolerance,
sample count, seed, the suites to run and the catalog maps to draw pairs
from.  The seed determines every sampled point, every random polynomial and
every catalog draw, so two runs of the same scenario produce byte-identical
reports apart from the timing block.

Sample points are drawn uniformly from a small box (dyadic rationals on the
exact backend) and rejected while any map of the case is singular or
unevaluable there, with a bounded retry budget; exhausted budgets surface as
per-case errors rather than aborting the run.
"""

from __future__ import annotations

import itertools
import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .jets import EvaluationError, Jet, Polynomial, monomials
from .maps import DiffeoMap, VectorField, catalog_get, cotangent_lift
from .geometry import Connection, lift_connection
from .operators import Symbol, apply_op_to_symbol, build_L_covariant, build_L_flat
from .cocycles import (
    CaseResult,
    ConnectionCompareCocycle,
    DeRhamCocycle,
    LogVolumeCocycle,
    OperatorCocycle,
    PhaseCompareCocycle,
    SabotagedPhaseCompare,
    SchwarzianCocycle,
    chevalley_p3_residual,
    derham_cocycle,
    derham_quadrature,
    divergence_cocycle,
    divergence_field,
    group_algebra_consistency,
    lie_derivative_connection,
    log_volume_cocycle,
    moyal_p3,
    scalar_field_action,
    schwarzian_1d,
    tensor_lie_derivative,
    algebra_cocycle_residual,
    vect_embedding_cocycle,
    verify_group_cocycle,
)

__all__ = ["ScenarioConfig", "run_scenario", "ALL_SUITES", "ConfigError"]

ALL_SUITES = (
    "lift",
    "cocycle_C",
    "operator_L",
    "degree_lowering",
    "classical_cocycles",
    "algebra_cocycles",
    "moyal",
    "consistency",
)

SCHEMA_VERSION = 1
PAIR_CAP = 12
RETRY_BUDGET = 64


class ConfigError(ValueError):
    """Scenario configuration is invalid (usage error, exit code 2)."""


@dataclass
class ScenarioConfig:
    dim: int = 1
    jet_order: int = 4
    backend: str = "exact"
    tol: float = 1e-8
    samples: int = 5
    seed: int = 0
    suites: tuple = ALL_SUITES
    maps: list = field(default_factory=list)

    def validate(self):
        if not 1 <= self.dim <= 3:
            raise ConfigError(f"dim must be 1..3, got {self.dim}")
        if self.jet_order < 4:
            raise ConfigError("jet_order must be at least 4")
        if self.backend not in ("exact", "float"):
            raise ConfigError(f"backend must be exact|float, got {self.backend!r}")
        if not self.suites:
            raise ConfigError("at least one suite must be selected")
        for s in self.suites:
            if s not in ALL_SUITES:
                raise ConfigError(f"unknown suite {s!r}; choose from {', '.join(ALL_SUITES)}")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.backend == "float" and not (0 < self.tol < 1):
            raise ConfigError("tol must be in (0, 1) for the float backend")
        return self

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "jet_order": self.jet_order,
            "backend": self.backend,
            "tol": repr(self.tol),
            "samples": self.samples,
            "seed": self.seed,
            "suites": list(self.suites),
            "maps": [[name, {k: _scalar_str(v) for k, v in params.items()}]
                     for name, params in self._map_specs()],
        }

    def _map_specs(self) -> list:
        return self.maps if self.maps else default_map_pool(self.dim, self.backend)

    @staticmethod
    def from_file(path: str) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {"dim", "jet_order", "backend", "tol", "samples", "seed", "suites", "maps"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown scenario fields: {sorted(unknown)}")
        cfg = ScenarioConfig()
        for k in known & set(raw):
            v = raw[k]
            if k == "suites":
                v = tuple(v)
            if k == "maps":
                v = [(name, {pk: _parse_scalar(pv) for pk, pv in (params or {}).items()})
                     for name, params in v]
            if k == "tol":
                v = float(v)
            setattr(cfg, k, v)
        return cfg.validate()


def _scalar_str(v):
    if isinstance(v, list):
        return [_scalar_str(x) for x in v]
    return repr(v) if isinstance(v, float) else str(v)


def _parse_scalar(v):
    if isinstance(v, str):
        try:
            return Fraction(v)  # covers "p/q" and integer literals
        except ValueError:
            return float(v)
    if isinstance(v, list):
        return [_parse_scalar(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# catalog pools and sampling


def default_map_pool(dim: int, backend: str) -> list:
    """Deterministic default (name, params) specs per dimension/backend."""
    if backend == "float":
        pool = [
            ("exp_scale", {"lam": 0.5}),
            ("polynomial_perturbation", {"eps": 0.125}),
            ("linear", {"A": 1.5 if dim == 1 else _eye(dim, 1.5)}),
            ("translation", {"c": [0.25] * dim if dim > 1 else 0.25}),
        ]
        if dim == 1:
            pool.append(("moebius", {"a": 1.0, "b": 0.0, "c": 0.5, "d": 1.0}))
        return pool
    pool = [
        ("identity", {}),
        ("translation", {"c": [Fraction(1, 4)] * dim if dim > 1 else Fraction(1, 4)}),
        ("linear", {"A": 2 if dim == 1 else _shear(dim)}),
        ("affine", {"A": Fraction(3, 2) if dim == 1 else _eye(dim, Fraction(3, 2)),
                    "b": [Fraction(-1, 8)] * dim if dim > 1 else Fraction(-1, 8)}),
        ("polynomial_perturbation", {"eps": Fraction(1, 8)}),
        ("projective", {}),
    ]
    if dim == 1:
        pool.append(("moebius", {"a": 1, "b": 0, "c": 1, "d": 1}))
        pool.append(("moebius", {"a": 2, "b": 1, "c": 1, "d": 1}))
    return pool


def _eye(n: int, v):
    return [[v if i == j else 0 for j in range(n)] for i in range(n)]


def _shear(n: int):
    m = _eye(n, 1)
    m[0][min(1, n - 1)] = 1 if n > 1 else m[0][0]
    return m


def _instantiate_pool(cfg: ScenarioConfig) -> list[DiffeoMap]:
    out = []
    for name, params in cfg._map_specs():
        p = dict(params)
        p.setdefault("dim", cfg.dim)
        out.append(catalog_get(name, p))
    return out


def _pairs(pool: list[DiffeoMap], cap: int = PAIR_CAP) -> list:
    allp = list(itertools.product(pool, repeat=2))
    if len(allp) <= cap:
        return allp
    stride = max(1, len(allp) // cap)
    picked = allp[::stride][:cap]
    return picked


class Sampler:
    """Seeded point sampler with rejection against singular loci."""

    def __init__(self, cfg: ScenarioConfig):
        self.rng = random.Random(cfg.seed)
        self.backend = cfg.backend

    def scalar(self, span: int = 8, denom: int = 16, nonzero: bool = False):
        while True:
            k = self.rng.randint(-span, span)
            if nonzero and k == 0:
                continue
            break
        if self.backend == "float":
            return k / denom
        return Fraction(k, denom)

    def base_point(self, dim: int) -> tuple:
        return tuple(self.scalar() for _ in range(dim))

    def phase_point(self, dim: int) -> tuple:
        base = [self.scalar() for _ in range(dim)]
        fiber = [self.scalar(denom=8, nonzero=True) for _ in range(dim)]
        return tuple(base + fiber)

    def point_for(self, ok_fn, maker, label: str):
        for _ in range(RETRY_BUDGET):
            p = maker()
            try:
                if ok_fn(p):
                    return p
            except Exception:
                continue
        raise EvaluationError(f"retry budget exhausted sampling a point for {label}")

    def fraction_poly(self, dim: int, max_deg: int = 2) -> Polynomial:
        terms = {}
        for m in monomials(dim, max_deg):
            k = self.rng.randint(-4, 4)
            if k:
                terms[m] = k if self.backend == "float" else Fraction(k, 8)
        if not terms:
            terms[(0,) * dim] = Fraction(1, 8) if self.backend == "exact" else 0.125
        return Polynomial(dim, terms)

    def vector_field(self, dim: int, tag: str) -> VectorField:
        return VectorField.from_polynomials(
            [self.fraction_poly(dim, 3) for _ in range(dim)], name=tag)


def _pair_regular(f: DiffeoMap, h: DiffeoMap, point, phase: bool, oriented: bool = False):
    """True when every map of the case is a local diffeomorphism along the
    chain at this point."""
    mid = h(point)
    for m, p in ((h, point), (f, mid)):
        det = m.jacobian_det(p)
        if det == 0 or (oriented and float(det) <= 0):
            return False
    return True


# ---------------------------------------------------------------------------
# suites


def _suite_lift(cfg: ScenarioConfig, sampler: Sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    tol = 0 if cfg.backend == "exact" else cfg.tol
    flat = Connection.flat_connection(n)
    flat_lift = lift_connection(flat)
    gam_entries = {}
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                gam_entries[(k, i, j)] = sampler.fraction_poly(n, 2)
    gamma = Connection.from_polynomials(n, gam_entries, name="random_poly")
    glift = lift_connection(gamma)

    for idx in range(cfg.samples):
        z = sampler.phase_point(n)
        comps = flat_lift.components(z, 0)
        r = max(abs(comps[k][i][j].value) for k in range(2 * n)
                for i in range(2 * n) for j in range(2 * n))
        rows.append(_case("lift", f"flat_zero@{idx}", [], z, r, tol))

        comps = glift.components(z, cfg.jet_order - 2)
        sym = glift.symmetry_defect(z)
        # fiber-linearity: no component may carry fiber degree two
        nonlin = 0
        for k in range(2 * n):
            for i in range(2 * n):
                for j in range(2 * n):
                    jet = comps[k][i][j]
                    for m, c in zip(monomials(jet.dim, jet.order), jet.coeffs):
                        if sum(m[n:]) >= 2 and c != 0:
                            nonlin = max(nonlin, abs(c))
        rows.append(_case("lift", f"symmetry@{idx}", [], z, sym, tol))
        rows.append(_case("lift", f"fiber_linearity@{idx}", [], z, nonlin, tol))

    if n == 1:
        # worked example: base symbol x lifts to xi(2x^2-1) and -x blocks
        gx = Connection.from_polynomials(1, {(0, 0, 0): Polynomial.coordinate(1, 0)})
        lx = lift_connection(gx)
        for idx in range(cfg.samples):
            z = sampler.phase_point(1)
            comps = lx.components(z, 0)
            x, xi = z
            expect_barred = xi * (2 * x * x - 1)
            r = max(
                abs(comps[1][0][0].value - expect_barred),
                abs(comps[1][0][1].value - (-x)),
                abs(comps[1][1][0].value - (-x)),
                abs(comps[0][0][0].value - x),
                abs(comps[1][1][1].value),
                abs(comps[0][0][1].value),
                abs(comps[0][1][0].value),
                abs(comps[0][1][1].value),
            )
            rows.append(_case("lift", f"worked_example@{idx}", [], z, r, tol))
    return rows


def _case(suite, cid, maps, point, residual, tol) -> CaseResult:
    ok = (residual == 0) if tol == 0 else (float(abs(residual)) <= tol)
    return CaseResult(suite, cid, maps, tuple(point), residual, bool(ok))


def _suite_cocycle_C(cfg, sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    tol = 0 if cfg.backend == "exact" else cfg.tol
    flat = Connection.flat_connection(n)
    cand = PhaseCompareCocycle(flat)
    for f, h in _pairs(pool):
        pts = []
        for _ in range(cfg.samples):
            pts.append(sampler.point_for(
                lambda p: _pair_regular(f, h, p[:n], phase=True),
                lambda: sampler.phase_point(n), "cocycle_C"))
        rows.extend(verify_group_cocycle(cand, f, h, pts, tol, suite="cocycle_C"))

    # affine lifts with a flat connection produce the zero tensor
    aff = catalog_get("affine", {"dim": n, "A": _eye(n, 2) if n > 1 else 2,
                                 "b": [Fraction(1, 4)] * n if n > 1 else Fraction(1, 4)})
    from .geometry import cocycle_C as C_of
    lifted_flat = lift_connection(flat)
    Ca = C_of(cotangent_lift(aff), lifted_flat)
    for idx in range(cfg.samples):
        z = sampler.phase_point(n)
        vals = Ca.components(z, 0)
        r = max(abs(vals[k][i][j].value) for k in range(2 * n)
                for i in range(2 * n) for j in range(2 * n))
        rows.append(_case("cocycle_C", f"affine_flat_zero@{idx}", [aff.name], z, r, tol))

    # action-convention sanity: the identity map must act trivially
    probe = pool[min(1, len(pool) - 1)]
    z = sampler.point_for(lambda p: probe.jacobian_det(p[:n]) != 0,
                          lambda: sampler.phase_point(n), "action_identity")
    rows.append(_case("cocycle_C", "action_identity", [probe.name], z,
                      cand.action_identity_defect(probe, z), tol))

    # engine self-test: a wrong action convention must be detected
    sab = SabotagedPhaseCompare(flat)
    f = catalog_get("polynomial_perturbation", {"dim": n, "eps": Fraction(1, 8)})
    h = catalog_get("projective", {"dim": n})
    z = sampler.point_for(lambda p: _pair_regular(f, h, p[:n], True),
                          lambda: sampler.phase_point(n), "sabotage")
    r = sab.residual(f, h, z)
    detected = (r != 0) if tol == 0 else (float(abs(r)) > tol)
    rows.append(CaseResult("cocycle_C", "sabotage_detected", [f.name, h.name], z,
                           r, bool(detected), witness=True))
    return rows


def _suite_operator_L(cfg, sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    tol = 0 if cfg.backend == "exact" else cfg.tol
    flat = Connection.flat_connection(n)
    cand = OperatorCocycle(flat)
    for f, h in _pairs(pool):
        pts = []
        for _ in range(cfg.samples):
            pts.append(sampler.point_for(
                lambda p: _pair_regular(f, h, p[:n], phase=True),
                lambda: sampler.phase_point(n), "operator_L"))
        rows.extend(verify_group_cocycle(cand, f, h, pts, tol, suite="operator_L"))

    probe = pool[min(1, len(pool) - 1)]
    z = sampler.point_for(lambda p: probe.jacobian_det(p[:n]) != 0,
                          lambda: sampler.phase_point(n), "action_identity")
    rows.append(_case("operator_L", "action_identity", [probe.name], z,
                      cand.action_identity_defect(probe, z), tol))

    # affine kernel: the operator vanishes identically on affine maps
    for spec in (("linear", {"A": _eye(n, 2) if n > 1 else 2}),
                 ("translation", {"c": [Fraction(1, 4)] * n if n > 1 else Fraction(1, 4)}),
                 ("affine", {"A": _eye(n, Fraction(3, 2)) if n > 1 else Fraction(3, 2),
                             "b": [Fraction(1, 8)] * n if n > 1 else Fraction(1, 8)})):
        m = catalog_get(spec[0], dict(spec[1], dim=n))
        z = sampler.phase_point(n)
        op = build_L_covariant(m, flat, z)
        rows.append(_case("operator_L", f"affine_kernel[{m.name}]", [m.name], z,
                          op.max_abs(), tol))

    # non-vanishing on the fractional-linear family
    probe = catalog_get("moebius", {"a": 1, "b": 0, "c": 1, "d": 1}) if n == 1 \
        else catalog_get("projective", {"dim": n})
    z = sampler.point_for(lambda p: probe.jacobian_det(p[:n]) != 0,
                          lambda: sampler.phase_point(n), "nonvanishing")
    op = build_L_covariant(probe, flat, z)
    nz = not op.is_zero() if tol == 0 else op.max_abs() > tol
    rows.append(CaseResult("operator_L", f"nonvanishing[{probe.name}]", [probe.name],
                           z, op.max_abs(), bool(nz), witness=True))
    return rows


def _suite_degree_lowering(cfg, sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    flat = Connection.flat_connection(n)
    usable = [m for m in pool if m.name not in ("identity",)]
    for k in (2, 3, 4, 5):
        for idx in range(max(1, cfg.samples - 2)):
            m = usable[(k + idx) % len(usable)]
            x = sampler.point_for(lambda p: m.jacobian_det(p) != 0,
                                  lambda: sampler.base_point(n), "degree_lowering")
            mu = [0] * n
            left = k
            for axis in range(n):
                take = sampler.rng.randint(0, left) if axis < n - 1 else left
                mu[axis] = take
                left -= take
            coeffs = {tuple(mu): sampler.fraction_poly(n, 2)}
            if k >= 3:
                mu2 = list(mu)
                for axis in range(n):
                    if mu2[axis] > 0:
                        mu2[axis] -= 1
                        break
                coeffs[tuple(mu2)] = sampler.fraction_poly(n, 1)
            sym = Symbol(n, coeffs)
            try:
                op = build_L_covariant(m, flat, tuple(x) + (0,) * n, coeff_order=k + 1)
                out = apply_op_to_symbol(op, sym, x)
                deg = out.degree(0 if cfg.backend == "exact" else cfg.tol)
                excess = Fraction(max(deg - (k - 2), 0))
                rows.append(CaseResult("degree_lowering", f"k={k}[{m.name}]@{idx}",
                                       [m.name], tuple(x), excess, excess == 0))
            except Exception as exc:
                rows.append(CaseResult("degree_lowering", f"k={k}[{m.name}]@{idx}",
                                       [m.name], tuple(x), None, False,
                                       error=f"{type(exc).__name__}: {exc}"))

    if n == 1:
        f = catalog_get("polynomial_perturbation", {"eps": 1})
        op = build_L_flat(f, (Fraction(0), Fraction(0)), coeff_order=4)
        out = apply_op_to_symbol(op, Symbol.monomial(1, (3,)), (Fraction(0),))
        val = out.coefficient_value((1,), (Fraction(0),))
        r = abs(val - (-36))
        r = r + abs(Fraction(max(out.degree() - 1, 0)))
        rows.append(_case("degree_lowering", "worked_example_cubic", [f.name],
                          (Fraction(0),), r, 0 if cfg.backend == "exact" else cfg.tol))
    return rows


def _suite_classical(cfg, sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    exact_tol = 0 if cfg.backend == "exact" else cfg.tol
    float_tol = 1e-9
    flat = Connection.flat_connection(n)

    oriented = [m for m in pool if m.orientation_preserving]
    if len(oriented) < 3:
        oriented = pool
    logv = LogVolumeCocycle()
    ell = ConnectionCompareCocycle(flat)
    phi = sampler.fraction_poly(n, 3)
    der = DeRhamCocycle(phi)

    for f, h in _pairs(pool):
        pts = [sampler.point_for(
            lambda p: _pair_regular(f, h, p, phase=False),
            lambda: sampler.base_point(n), "classical") for _ in range(cfg.samples)]
        opts = [sampler.point_for(
            lambda p: _pair_regular(f, h, p, phase=False, oriented=True),
            lambda: sampler.base_point(n), "classical_oriented")
            for _ in range(cfg.samples)] if (f in oriented and h in oriented) else None

        if opts is not None:
            rows.extend(verify_group_cocycle(logv, f, h, opts, float_tol,
                                             suite="classical_cocycles"))
        rows.extend(verify_group_cocycle(ell, f, h, pts, exact_tol,
                                         suite="classical_cocycles"))
        rows.extend(verify_group_cocycle(der, f, h, pts, exact_tol,
                                         suite="classical_cocycles"))
        if n == 1:
            schw = SchwarzianCocycle()
            rows.extend(verify_group_cocycle(schw, f, h, pts, exact_tol,
                                             suite="classical_cocycles"))

    # de Rham quadrature witness against the potential difference
    f = pool[min(4, len(pool) - 1)]
    for idx in range(cfg.samples):
        x = sampler.point_for(lambda p: f.jacobian_det(p) != 0,
                              lambda: sampler.base_point(n), "derham_quad")
        exact_val = derham_cocycle(phi, f, x)
        quad = derham_quadrature(phi, f, x)
        rows.append(_case("classical_cocycles", f"derham_quadrature@{idx}", [f.name],
                          x, abs(float(exact_val) - quad), 1e-9))

    if n == 1:
        for idx, (a, b, c, d) in enumerate(((1, 0, 1, 1), (2, 1, 1, 1), (3, -1, 1, 2))):
            m = catalog_get("moebius", {"a": a, "b": b, "c": c, "d": d})
            x = sampler.point_for(lambda p: m.jacobian_det(p) != 0,
                                  lambda: sampler.base_point(1), "schwarzian_kernel")
            r = abs(schwarzian_1d(m, x))
            rows.append(_case("classical_cocycles", f"schwarzian_moebius_zero@{idx}",
                              [m.name], x, r, exact_tol))

    det1 = catalog_get("linear", {"dim": n, "A": _unimodular(n)})
    for idx in range(cfg.samples):
        x = sampler.base_point(n)
        r = abs(log_volume_cocycle(det1, x))
        rows.append(_case("classical_cocycles", f"logvol_det1_zero@{idx}",
                          [det1.name], x, r, float_tol))
    return rows


def _unimodular(n: int):
    if n == 1:
        return 1
    m = _eye(n, 1)
    m[0][1] = Fraction(1, 2)
    return m


def _suite_algebra(cfg, sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    tol = 0 if cfg.backend == "exact" else cfg.tol
    gamma = Connection.from_polynomials(
        n, {(k, i, j): sampler.fraction_poly(n, 2)
            for k in range(n) for i in range(n) for j in range(i, n)},
        name="random_poly")
    npairs = max(10, cfg.samples * 2)
    for idx in range(npairs):
        X = sampler.vector_field(n, f"X{idx}")
        Y = sampler.vector_field(n, f"Y{idx}")
        x = sampler.base_point(n)
        r = algebra_cocycle_residual(lambda Z: divergence_field(Z),
                                     scalar_field_action, X, Y, x)
        rows.append(_case("algebra_cocycles", f"divergence@{idx}",
                          [X.name, Y.name], x, r, tol))
        r = algebra_cocycle_residual(lambda Z: lie_derivative_connection(Z, gamma),
                                     tensor_lie_derivative, X, Y, x)
        rows.append(_case("algebra_cocycles", f"lie_connection@{idx}",
                          [X.name, Y.name], x, r, tol))
    return rows


def _suite_moyal(cfg, sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    tol = 0 if cfg.backend == "exact" else cfg.tol

    if n == 1:
        F3 = Symbol.monomial(1, (3,))
        G3 = Polynomial(2, {(3, 0): 1})
        z = (Fraction(0), Fraction(0)) if cfg.backend == "exact" else (0.0, 0.0)
        r = abs(moyal_p3(F3, G3, z) - (-36))
        rows.append(_case("moyal", "worked_value_-36", [], z, r, tol))

    for idx in range(cfg.samples):
        F = sampler.fraction_poly(2 * n, 3)
        G = sampler.fraction_poly(2 * n, 3)
        z = sampler.phase_point(n)
        r = abs(moyal_p3(F, G, z) + moyal_p3(G, F, z))
        rows.append(_case("moyal", f"antisymmetry@{idx}", [], z, r, tol))

    for idx in range(cfg.samples):
        F = sampler.fraction_poly(2 * n, 2)
        G = sampler.fraction_poly(2 * n, 2)
        H = sampler.fraction_poly(2 * n, 2)
        z = sampler.phase_point(n)
        r = chevalley_p3_residual(F, G, H, z)
        rows.append(_case("moyal", f"chevalley@{idx}", [], z, r, tol))

    for idx in range(cfg.samples):
        k = 2 + (idx % 4)
        X = sampler.vector_field(n, f"X{idx}")
        mu = [0] * n
        mu[idx % n] = k
        P = Symbol(n, {tuple(mu): sampler.fraction_poly(n, 2)})
        x = sampler.base_point(n)
        out = vect_embedding_cocycle(X, P, x)
        deg = out.degree(0 if cfg.backend == "exact" else cfg.tol)
        excess = Fraction(max(deg - (k - 2), 0))
        rows.append(CaseResult("moyal", f"embedding_degree[k={k}]@{idx}", [X.name],
                               x, excess, excess == 0))
    return rows


def _suite_consistency(cfg, sampler, pool) -> list[CaseResult]:
    rows = []
    n = cfg.dim
    t = 1e-3
    fields = [
        VectorField.from_polynomials(
            [Polynomial(n, {tuple(1 if a == i else 0 for a in range(n)): 1.0})
             for i in range(n)], name="linear_euler"),
        VectorField.from_polynomials(
            [Polynomial(n, {tuple(2 if a == i else 0 for a in range(n)): 1.0})
             for i in range(n)], name="quadratic"),
    ]
    flat = Connection.flat_connection(n)
    for X in fields:
        pts = [tuple(0.25 + 0.125 * i for _ in range(n)) for i in range(cfg.samples)]
        recs = group_algebra_consistency(
            X, lambda fmap, p: log_volume_cocycle(fmap, p),
            lambda Z, p: divergence_cocycle(Z, p), t, pts)
        for i, rec in enumerate(recs):
            rows.append(CaseResult(
                "consistency", f"logvol_divergence[{X.name}]@{i}", [X.name],
                pts[i], float(rec.get("residual_half", "nan")) if "residual_half" in rec else None,
                rec.get("passed", False), error=rec.get("error")))
        recs = group_algebra_consistency(
            X,
            lambda fmap, p: _ell_values(fmap, flat, p),
            lambda Z, p: lie_derivative_connection(Z, flat).values(p),
            t, pts[: max(1, cfg.samples // 2)])
        for i, rec in enumerate(recs):
            rows.append(CaseResult(
                "consistency", f"ell_lieGamma[{X.name}]@{i}", [X.name],
                pts[i], float(rec.get("residual_half", "nan")) if "residual_half" in rec else None,
                rec.get("passed", False), error=rec.get("error")))
    return rows


def _ell_values(fmap: DiffeoMap, gamma: Connection, p):
    from .cocycles import connection_cocycle

    return connection_cocycle(fmap, gamma).values(p)


_SUITE_FN = {
    "lift": _suite_lift,
    "cocycle_C": _suite_cocycle_C,
    "operator_L": _suite_operator_L,
    "degree_lowering": _suite_degree_lowering,
    "classical_cocycles": _suite_classical,
    "algebra_cocycles": _suite_algebra,
    "moyal": _suite_moyal,
    "consistency": _suite_consistency,
}


# ---------------------------------------------------------------------------
# report assembly


def run_scenario(cfg: ScenarioConfig) -> dict:
    """Run the configured suites and assemble the JSON-ready report."""
    cfg.validate()
    started = time.time()
    pool = _instantiate_pool(cfg)
    rows: list[CaseResult] = []
    for suite in cfg.suites:
        sampler = Sampler(cfg)  # fresh stream per suite keeps suites independent
        rows.extend(_SUITE_FN[suite](cfg, sampler, pool))

    rows.sort(key=lambda r: (r.suite, r.case_id))
    max_by_suite: dict[str, str] = {}
    for r in rows:
        if r.residual is None or r.witness:
            continue
        cur = max_by_suite.get(r.suite)
        val = abs(float(r.residual))
        if cur is None or val > float(cur):
            max_by_suite[r.suite] = repr(val)
    summary = {
        "total": len(rows),
        "passed": sum(1 for r in rows if r.passed),
        "failed": sum(1 for r in rows if not r.passed and r.error is None),
        "errors": sum(1 for r in rows if r.error is not None),
        "max_abs_residual_by_suite": max_by_suite,
    }
    summary["pass"] = summary["passed"] == summary["total"]
    return {
        "schema": SCHEMA_VERSION,
        "config": cfg.as_dict(),
        "cases": [r.as_record() for r in rows],
        "summary": summary,
        "timing": {"elapsed_s": round(time.time() - started, 3)},
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
