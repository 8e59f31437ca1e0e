"""The full property suite behind ``effectdual suite``.

Each property returns its worst deviation over ``trials`` random instances;
it passes when that deviation is within the property's own tolerance.  The
run is deterministic in ``seed``: every property draws from its own stream,
spawned from the seed in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import covariance as cv
from . import jsonio
from . import matrix_core as mc
from .duality import (
    RNG_ALGORITHM,
    MeasurementMap,
    QuantizationMap,
    duality_deviation,
    measure,
    povm_from_measurement,
    povm_from_quantization,
    quantize,
    random_povm,
)
from .effects import (
    ClassicalEffect,
    OutcomeSpace,
    effect_array,
    effect_metric,
    neg,
    ovee,
    random_effect,
    scalar,
    unit,
)
from .errors import SchemaError
from .fixtures import fixture_dir
from .measurement_model import (
    apply_channel,
    channel_adjoint,
    check_model_for,
    choi_matrix,
    dual_model_quantize,
    induced_povm,
    random_channel,
    random_model,
)
from .states import convex_combine, random_density, random_probability, separating_effect


@dataclass
class PropertyResult:
    name: str
    max_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "max_deviation": float(self.max_deviation),
            "tol": self.tol,
            "pass": bool(self.passed),
        }


PROPERTIES: list[tuple[str, float, Callable]] = []


def prop(name: str, tol: float):
    def register(fn):
        PROPERTIES.append((name, tol, fn))
        return fn

    return register


def _rand_matrix(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def _domain(rng, quantum: bool):
    if quantum:
        return int(rng.integers(1, 5))
    return OutcomeSpace.of_size(int(rng.integers(1, 7)))


# -- matrix core ------------------------------------------------------------


@prop("matrix.multiply_associative", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        a, b, c = (_rand_matrix(rng, 3) for _ in range(3))
        worst = max(worst, mc.max_abs_diff(mc.multiply(mc.multiply(a, b), c), mc.multiply(a, mc.multiply(b, c))))
    return worst


@prop("matrix.adjoint_of_product", 1e-12)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        a, b = _rand_matrix(rng, 3), _rand_matrix(rng, 3)
        worst = max(worst, mc.max_abs_diff(mc.adjoint(a @ b), mc.adjoint(b) @ mc.adjoint(a)))
    return worst


@prop("matrix.eigen_reconstruction", 1e-8)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        a = _rand_matrix(rng, 4)
        h = a + a.conj().T
        vals, vecs = mc.hermitian_eigh(h)
        worst = max(worst, mc.max_abs_diff((vecs * vals) @ vecs.conj().T, h))
    return worst


@prop("matrix.partial_trace_preserves_trace", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        a = _rand_matrix(rng, 6)
        for over in ("H", "K"):
            worst = max(worst, abs(np.trace(mc.partial_trace(a, (2, 3), over)) - np.trace(a)))
    return worst


@prop("matrix.tensor_mixed_product", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        a, c = _rand_matrix(rng, 2), _rand_matrix(rng, 2)
        b, d = _rand_matrix(rng, 3), _rand_matrix(rng, 3)
        worst = max(worst, mc.max_abs_diff(mc.tensor(a, b) @ mc.tensor(c, d), mc.tensor(a @ c, b @ d)))
    return worst


# -- effect modules ---------------------------------------------------------


@prop("effects.ovee_commutative_associative", 1e-12)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(trials):
        dom = _domain(rng, k % 2 == 0)
        w = rng.dirichlet(np.ones(4))[:3]
        x, y, z = (scalar(wi, random_effect(dom, rng)) for wi in w)
        worst = max(
            worst,
            mc.max_abs_diff(effect_array(ovee(x, y)), effect_array(ovee(y, x))),
            mc.max_abs_diff(effect_array(ovee(ovee(x, y), z)), effect_array(ovee(x, ovee(y, z)))),
        )
    return worst


@prop("effects.scalar_laws", 1e-12)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(trials):
        dom = _domain(rng, k % 2 == 0)
        a, b = random_effect(dom, rng), random_effect(dom, rng)
        t = rng.uniform()
        x, y = scalar(t, a), scalar(1 - t, b)
        r, s = rng.uniform(), rng.uniform()
        r2, s2 = rng.dirichlet(np.ones(3))[:2]
        worst = max(
            worst,
            mc.max_abs_diff(effect_array(scalar(r, ovee(x, y))), effect_array(ovee(scalar(r, x), scalar(r, y)))),
            mc.max_abs_diff(effect_array(scalar(r2 + s2, a)), effect_array(ovee(scalar(r2, a), scalar(s2, a)))),
            mc.max_abs_diff(effect_array(scalar(r * s, a)), effect_array(scalar(r, scalar(s, a)))),
            mc.max_abs_diff(effect_array(scalar(1.0, a)), effect_array(a)),
        )
    return worst


@prop("effects.orthosupplement", 1e-12)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(trials):
        dom = _domain(rng, k % 2 == 0)
        x = random_effect(dom, rng)
        one = effect_array(unit(dom))
        worst = max(
            worst,
            mc.max_abs_diff(effect_array(ovee(x, neg(x))), one),
            mc.max_abs_diff(effect_array(neg(neg(x))), effect_array(x)),
            mc.max_abs_diff(one - effect_array(x), effect_array(neg(x))),
        )
    return worst


@prop("effects.metric_equals_norm", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(trials):
        dom = _domain(rng, k % 2 == 0)
        a, b = random_effect(dom, rng), random_effect(dom, rng)
        diff = effect_array(a) - effect_array(b)
        norm = (
            float(np.max(np.abs(diff)))
            if isinstance(a, ClassicalEffect)
            else mc.operator_norm_distance(effect_array(a), effect_array(b))
        )
        worst = max(worst, abs(effect_metric(a, b) - norm))
    return worst


@prop("effects.metric_triangle", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(trials):
        dom = _domain(rng, k % 2 == 0)
        a, b, c = (random_effect(dom, rng) for _ in range(3))
        excess = effect_metric(a, c) - effect_metric(a, b) - effect_metric(b, c)
        worst = max(worst, excess, abs(effect_metric(a, b) - effect_metric(b, a)))
    return worst


# -- convex state spaces ----------------------------------------------------


def _state_array(s):
    return s.weights if hasattr(s, "weights") else s.operator


@prop("states.convex_axioms", 1e-12)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(trials):
        if k % 2 == 0:
            space = OutcomeSpace.of_size(int(rng.integers(1, 7)))
            x, y, z = (random_probability(space, rng) for _ in range(3))
        else:
            d = int(rng.integers(1, 5))
            x, y, z = (random_density(d, rng) for _ in range(3))
        r, s = rng.uniform(0.01, 1.0), rng.uniform()
        t = r + (1 - r) * s
        devs = [
            mc.max_abs_diff(_state_array(convex_combine(r, x, x)), _state_array(x)),
            mc.max_abs_diff(_state_array(convex_combine(r, x, y)), _state_array(convex_combine(1 - r, y, x))),
            mc.max_abs_diff(_state_array(convex_combine(0.0, x, y)), _state_array(y)),
            mc.max_abs_diff(
                _state_array(convex_combine(r, x, convex_combine(s, y, z))),
                _state_array(convex_combine(t, convex_combine(r / t, x, y), z)),
            ),
        ]
        worst = max(worst, *devs)
    return worst


@prop("states.expectation_affine_and_additive", 1e-12)
def _(rng, trials, fx):
    from .states import expectation

    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, 5))
        rho, sigma = random_density(d, rng), random_density(d, rng)
        e = random_effect(d, rng)
        t = rng.uniform()
        x, y = scalar(t, e), scalar(1 - t, random_effect(d, rng))
        r = rng.uniform()
        worst = max(
            worst,
            abs(expectation(convex_combine(r, rho, sigma), e) - (r * expectation(rho, e) + (1 - r) * expectation(sigma, e))),
            abs(expectation(rho, ovee(x, y)) - expectation(rho, x) - expectation(rho, y)),
        )
    return worst


@prop("states.separating_effect", 0.0)
def _(rng, trials, fx):
    from .states import expectation

    failures = 0
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        rho, sigma = random_density(d, rng), random_density(d, rng)
        e = separating_effect(rho, sigma)
        if abs(expectation(rho, e) - expectation(sigma, e)) <= 0.5 * mc.default_tol():
            failures += 1
    return float(failures)


# -- duality ----------------------------------------------------------------


@prop("duality.square", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        p = random_povm(int(rng.integers(1, 7)), int(rng.integers(1, 9)), rng)
        rho = random_density(p.dim, rng)
        f = ClassicalEffect(p.space, rng.uniform(size=len(p.space)))
        worst = max(worst, duality_deviation(p, rho, f))
    for name in fx["manifest"]["povms"]:
        p = fx[name]
        worst = max(worst, duality_deviation(p, random_density(p.dim, rng), ClassicalEffect(p.space, rng.uniform(size=len(p.space)))))
    return worst


@prop("duality.round_trip_quantization", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(max(1, trials // 10)):
        p = random_povm(int(rng.integers(1, 6)), int(rng.integers(1, 7)), rng)
        got = povm_from_quantization(lambda f, p=p: quantize(p, f), p.space, samples=5, seed=k)
        worst = max(worst, mc.max_abs_diff(got.operators, p.operators))
    return worst


@prop("duality.round_trip_measurement", 1e-9)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(max(1, trials // 10)):
        p = random_povm(int(rng.integers(1, 6)), int(rng.integers(1, 7)), rng)
        m = MeasurementMap(p.space, p.dim, func=lambda rho, p=p: measure(p, rho))
        got = povm_from_measurement(m, probes=5, seed=k)
        worst = max(worst, mc.max_abs_diff(got.operators, p.operators))
    return worst


@prop("duality.quantize_is_homomorphism", 1e-12)
def _(rng, trials, fx):
    from .effects import is_effect_module_hom

    worst = 0.0
    for k in range(max(1, trials // 10)):
        p = random_povm(int(rng.integers(1, 5)), int(rng.integers(1, 6)), rng)
        rep = is_effect_module_hom(QuantizationMap.canonical(p), p.space, samples=10, tol=1e-12, seed=k)
        worst = max(worst, rep.max_deviation)
    return worst


@prop("duality.measure_is_affine", 1e-12)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        p = random_povm(int(rng.integers(1, 5)), int(rng.integers(1, 6)), rng)
        r1, r2 = random_density(p.dim, rng), random_density(p.dim, rng)
        r = rng.uniform()
        lhs = measure(p, convex_combine(r, r1, r2)).weights
        rhs = r * measure(p, r1).weights + (1 - r) * measure(p, r2).weights
        worst = max(worst, mc.max_abs_diff(lhs, rhs))
    return worst


# -- covariance -------------------------------------------------------------


@prop("covariance.fixture_verdicts", 0.0)
def _(rng, trials, fx):
    wrong = 0
    for name, expected in fx["manifest"]["systems"].items():
        verdict = cv.covariance_triangle(fx[name], trials=min(trials, 20), seed=int(rng.integers(2**31)))
        if not verdict.agree or verdict.imprimitivity.passed != expected:
            wrong += 1
    return float(wrong)


@prop("covariance.constructor_is_covariant", 1e-10)
def _(rng, trials, fx):
    setups = []
    for n in (3, 4, 5):
        a = cv.regular_action(cv.cyclic_group(n))
        setups.append((cv.permutation_representation(a), a))
    a3 = cv.natural_action(cv.symmetric_group(3), 3)
    setups.append((cv.standard_representation(a3), a3))
    worst = 0.0
    for k in range(max(1, trials // 10)):
        rep, action = setups[k % len(setups)]
        b = _rand_matrix(rng, rep.dim)
        povm = cv.build_covariant_povm(rep, action, b @ b.conj().T)
        worst = max(worst, cv.check_imprimitivity(cv.ImprimitivitySystem(rep, action, povm)).max_deviation)
    return worst


@prop("covariance.left_translation_is_action", 0.0)
def _(rng, trials, fx):
    worst = 0.0
    for group, action in (
        (g := cv.cyclic_group(4), cv.regular_action(g)),
        (g := cv.symmetric_group(4), cv.natural_action(g, 4)),
        (g := cv.dihedral_group(5), cv.polygon_action(g, 5)),
    ):
        f = ClassicalEffect(action.space, rng.uniform(size=len(action.space)))
        worst = max(worst, mc.max_abs_diff(cv.left_translate(group.identity, f, action).values, f.values))
        for g1 in group.elements:
            for h in group.elements:
                lhs = cv.left_translate(g1, cv.left_translate(h, f, action), action).values
                rhs = cv.left_translate(group.mul(g1, h), f, action).values
                worst = max(worst, mc.max_abs_diff(lhs, rhs))
    return worst


# -- measurement models -----------------------------------------------------


@prop("model.adjoint_pairing", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(trials):
        d_in, d_out = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        ch = random_channel(d_in, d_out, -(-d_in // d_out) + int(rng.integers(0, 3)), rng)
        t, b = _rand_matrix(rng, d_in), _rand_matrix(rng, d_out)
        t, b = t + t.conj().T, b + b.conj().T
        lhs = np.trace(apply_channel(ch, t) @ b)
        rhs = np.trace(t @ channel_adjoint(ch, b))
        worst = max(worst, abs(lhs - rhs))
    return worst


@prop("model.unital_adjoint_and_cp", 1e-9)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(max(1, trials // 5)):
        d = int(rng.integers(1, 5))
        ch = random_channel(d, d, int(rng.integers(1, 4)), rng)
        worst = max(
            worst,
            mc.max_abs_diff(sum(k.conj().T @ k for k in ch.kraus), np.eye(d)),
            mc.max_abs_diff(channel_adjoint(ch, np.eye(d)), np.eye(d)),
            max(0.0, -float(np.linalg.eigvalsh(mc.hermitian_part(choi_matrix(ch)))[0])),
        )
    return worst


@prop("model.central_identity", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for _ in range(max(1, trials // 5)):
        model = random_model(int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 5)), rng)
        f = ClassicalEffect(model.space, rng.uniform(size=len(model.space)))
        lhs = dual_model_quantize(model, f).operator
        rhs = quantize(induced_povm(model), f).operator
        worst = max(worst, mc.max_abs_diff(lhs, rhs))
    return worst


@prop("model.double_dual_closure", 1e-10)
def _(rng, trials, fx):
    worst = 0.0
    for k in range(max(1, trials // 25)):
        model = random_model(int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 5)), rng)
        worst = max(worst, check_model_for(model, induced_povm(model), trials=20, seed=k).max_deviation)
    return worst


@prop("model.fixture_induced_povms", 1e-12)
def _(rng, trials, fx):
    worst = 0.0
    for name, target in fx["manifest"]["models"].items():
        worst = max(worst, mc.max_abs_diff(induced_povm(fx[name]).operators, fx[target].operators))
    return worst


def load_fixtures(directory: str | Path | None = None) -> dict:
    """Parse the manifest and every file it names; ``SchemaError`` on any defect."""
    directory = Path(directory) if directory is not None else fixture_dir()
    manifest = jsonio.load(directory / "manifest.json")
    if not isinstance(manifest, dict):
        raise SchemaError("manifest.json: expected an object")
    out = {"manifest": manifest}
    try:
        for name in manifest["povms"]:
            out[name] = jsonio.povm_from_json(jsonio.load(directory / name), name)
        for name in manifest["systems"]:
            out[name] = jsonio.system_from_json(jsonio.load(directory / name), name)
        for name, target in manifest["models"].items():
            out[name] = jsonio.model_from_json(jsonio.load(directory / name), name)
            if target not in out:
                raise SchemaError(f"manifest.json: model target {target!r} is not a listed POVM")
    except (KeyError, TypeError, AttributeError) as exc:
        raise SchemaError(f"manifest.json: malformed ({exc})") from None
    return out


def run_suite(seed: int = 0, trials: int = 500, fixtures: dict | None = None) -> dict:
    fixtures = fixtures if fixtures is not None else load_fixtures()
    streams = np.random.SeedSequence(seed).spawn(len(PROPERTIES))
    results = []
    for (name, tol, fn), ss in zip(PROPERTIES, streams):
        results.append(PropertyResult(name, float(fn(np.random.default_rng(ss), trials, fixtures)), tol))
    return {
        "seed": seed,
        "trials": trials,
        "rng": RNG_ALGORITHM,
        "properties": [r.to_json() for r in results],
        "pass": all(r.passed for r in results),
    }
