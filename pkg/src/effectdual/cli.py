"""``effectdual`` command-line front end.

Every subcommand reads JSON files and writes one JSON document to stdout (or
``--output``).  Exit codes: 0 pass, 1 property violation, 2 input error,
3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import covariance as cv
from . import jsonio
from . import matrix_core as mc
from .duality import (
    RNG_ALGORITHM,
    fit_povm_from_measurement_samples,
    fit_povm_from_quantization_samples,
    measure,
    quantize,
    random_povm,
    verify_duality_square,
)
from .effects import effect_metric
from .errors import EffectDualError, SchemaError
from .measurement_model import check_model_for, dual_model_quantize, induced_povm

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


@dataclass
class RunConfig:
    seed: int
    trials: int
    tol: float
    input: str | None
    output: str | None
    pretty: bool


class InputError(EffectDualError):
    """Command-line usage that no JSON file can fix."""


def _config(args) -> RunConfig:
    if args.trials < 1:
        raise InputError("--trials must be a positive integer")
    tol = mc.resolve_tol(args.tol)
    if not tol > 0:
        raise InputError("--tol must be positive")
    return RunConfig(args.seed, args.trials, tol, args.input, args.output, args.pretty)


def _need(value, flag: str):
    if value is None:
        raise InputError(f"{flag} is required")
    return value


def _input_doc(cfg: RunConfig):
    return jsonio.load(_need(cfg.input, "--input"))


def _emit(cfg: RunConfig, doc) -> None:
    text = jsonio.dumps(doc, pretty=cfg.pretty)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_verify_duality(cfg: RunConfig, args) -> int:
    if args.random:
        dim, outcomes = _need(args.dim, "--dim"), _need(args.outcomes, "--outcomes")
        povm = random_povm(dim, outcomes, cfg.seed)
    else:
        povm = jsonio.povm_from_json(_input_doc(cfg))
    report = verify_duality_square(povm, trials=cfg.trials, tol=cfg.tol, seed=cfg.seed)
    _emit(cfg, {**report.to_json(), "dim": povm.dim, "outcomes": len(povm.space)})
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def cmd_quantize(cfg: RunConfig, args) -> int:
    povm = jsonio.povm_from_json(_input_doc(cfg))
    f = jsonio.classical_effect_from_json(jsonio.load(_need(args.effect, "--effect")))
    _emit(cfg, jsonio.quantum_effect_to_json(quantize(povm, f)))
    return EXIT_PASS


def cmd_measure(cfg: RunConfig, args) -> int:
    povm = jsonio.povm_from_json(_input_doc(cfg))
    rho = jsonio.density_from_json(jsonio.load(_need(args.state, "--state")))
    _emit(cfg, jsonio.probability_to_json(measure(povm, rho)))
    return EXIT_PASS


def cmd_recover_povm(cfg: RunConfig, args) -> int:
    t = jsonio.transcript_from_json(_input_doc(cfg))
    if t["kind"] == "quantization":
        povm, residual = fit_povm_from_quantization_samples(t["space"], t["samples"])
    else:
        povm, residual = fit_povm_from_measurement_samples(t["space"], t["dim"], t["samples"])
    passed = residual <= cfg.tol
    _emit(
        cfg,
        {
            "kind": t["kind"],
            "povm": jsonio.povm_to_json(povm),
            "residual": residual,
            "tol": cfg.tol,
            "pass": passed,
        },
    )
    return EXIT_PASS if passed else EXIT_VIOLATION


def _seeded_system(doc, seed_path: str, tol: float) -> cv.ImprimitivitySystem:
    rep, action = jsonio.rep_action_from_json(doc)
    seed_op = jsonio.operator_from_json(jsonio.load(seed_path), "seed")
    povm = cv.build_covariant_povm(rep, action, seed_op, tol=tol)
    return cv.ImprimitivitySystem(rep, action, povm)


def cmd_check_covariance(cfg: RunConfig, args) -> int:
    doc = _input_doc(cfg)
    if args.build:
        system = _seeded_system(doc, _need(args.seed_effect, "--seed-effect"), cfg.tol)
    else:
        system = jsonio.system_from_json(doc)
    verdict = cv.covariance_triangle(system, trials=cfg.trials, tol=cfg.tol, seed=cfg.seed)
    out = verdict.to_json()
    if args.build:
        out["povm"] = jsonio.povm_to_json(system.povm)
    _emit(cfg, out)
    if not verdict.agree:
        return EXIT_INTERNAL
    return EXIT_PASS if verdict.passed else EXIT_VIOLATION


def cmd_build_covariant(cfg: RunConfig, args) -> int:
    system = _seeded_system(_input_doc(cfg), _need(args.seed_effect, "--seed-effect"), cfg.tol)
    _emit(cfg, jsonio.system_to_json(system))
    return EXIT_PASS


def cmd_model_induce(cfg: RunConfig, args) -> int:
    model = jsonio.model_from_json(_input_doc(cfg))
    _emit(cfg, jsonio.povm_to_json(induced_povm(model)))
    return EXIT_PASS


def cmd_model_check(cfg: RunConfig, args) -> int:
    model = jsonio.model_from_json(_input_doc(cfg))
    target = jsonio.povm_from_json(jsonio.load(_need(args.target, "--target")), "target")
    report = check_model_for(model, target, trials=cfg.trials, tol=cfg.tol, seed=cfg.seed)
    _emit(cfg, report.to_json())
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def cmd_dual_quantize(cfg: RunConfig, args) -> int:
    model = jsonio.model_from_json(_input_doc(cfg))
    doc = jsonio.load(_need(args.effect, "--effect"))
    if args.extended:
        space, values = jsonio.real_function_from_json(doc, "effect")
        if space != model.space:
            raise SchemaError("effect.space: does not match the pointer outcome space")
        q = dual_model_quantize(model, values, extended=True)
        vals = np.array([values[x] for x in space])
        reference = np.tensordot(vals, induced_povm(model).operators, axes=1)
    else:
        f = jsonio.classical_effect_from_json(doc, "effect")
        if f.space != model.space:
            raise SchemaError("effect.space: does not match the pointer outcome space")
        q = dual_model_quantize(model, f).operator
        reference = quantize(induced_povm(model), f).operator
    deviation = mc.max_abs_diff(q, reference)
    passed = deviation <= cfg.tol
    _emit(
        cfg,
        {
            "dim": model.system_dim,
            "operator": jsonio.matrix_to_json(q),
            "extended": bool(args.extended),
            "cross_check": {"max_deviation": deviation, "tol": cfg.tol, "pass": passed},
        },
    )
    return EXIT_PASS if passed else EXIT_VIOLATION


def cmd_metric(cfg: RunConfig, args) -> int:
    a = jsonio.effect_from_json(jsonio.load(_need(args.a, "--a")), "a")
    b = jsonio.effect_from_json(jsonio.load(_need(args.b, "--b")), "b")
    _emit(cfg, {"distance": effect_metric(a, b)})
    return EXIT_PASS


def cmd_suite(cfg: RunConfig, args) -> int:
    from .suite import load_fixtures, run_suite

    fixtures = load_fixtures(args.fixtures)
    report = run_suite(seed=cfg.seed, trials=cfg.trials, fixtures=fixtures)
    _emit(cfg, report)
    return EXIT_PASS if report["pass"] else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="primary input JSON file ('-' for stdin)")
    common.add_argument("--output", help="write the JSON report here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    common.add_argument("--trials", type=int, default=500, help="random trials (default 500)")
    common.add_argument("--tol", type=float, default=None, help="tolerance (default $EFFECTDUAL_TOL or 1e-9)")
    common.add_argument("--pretty", action="store_true", help="indent the JSON output")

    parser = argparse.ArgumentParser(
        prog="effectdual",
        description="Quantization and measurement over finite outcome spaces.",
        epilog=f"Random draws use {RNG_ALGORITHM}.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=fn)
        return p

    p = add("verify-duality", cmd_verify_duality, "check Tr[rho Q(f)] = sum f(x) M(rho)(x)")
    p.add_argument("--random", action="store_true", help="use a random POVM instead of --input")
    p.add_argument("--dim", type=int)
    p.add_argument("--outcomes", type=int)

    add("quantize", cmd_quantize, "Q(f) for a POVM (--input) and effect").add_argument("--effect")
    add("measure", cmd_measure, "M(rho) for a POVM (--input) and state").add_argument("--state")
    add("recover-povm", cmd_recover_povm, "fit a POVM to a black-box transcript")

    p = add("check-covariance", cmd_check_covariance, "run the three covariance checks")
    p.add_argument("--build", action="store_true", help="construct the POVM from --seed-effect first")
    p.add_argument("--seed-effect")
    add("build-covariant", cmd_build_covariant, "group-average a seed into a covariant POVM").add_argument(
        "--seed-effect"
    )

    add("model-induce", cmd_model_induce, "POVM induced by a measurement model")
    add("model-check", cmd_model_check, "does the model measure --target?").add_argument("--target")
    p = add("dual-quantize", cmd_dual_quantize, "quantize through the model's dual")
    p.add_argument("--effect")
    p.add_argument("--extended", action="store_true", help="accept any real-valued function")

    p = add("metric", cmd_metric, "distance between two effects")
    p.add_argument("--a")
    p.add_argument("--b")
    add("suite", cmd_suite, "run the full property suite").add_argument(
        "--fixtures", help="fixture directory (default: the shipped fixtures)"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_INPUT
    try:
        return args.handler(_config(args), args)
    except (EffectDualError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
