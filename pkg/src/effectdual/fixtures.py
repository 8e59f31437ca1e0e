"""Reference fixtures shipped as JSON under ``effectdual/fixtures``.

``python -m effectdual.fixtures DIR`` regenerates them.  ``manifest.json``
records what each file is and the verdict the suite expects from it.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import jsonio
from .covariance import (
    ImprimitivitySystem,
    build_covariant_povm,
    cyclic_group,
    natural_action,
    permutation_representation,
    regular_action,
    standard_representation,
    symmetric_group,
)
from .duality import Povm, measure, quantize
from .effects import ClassicalEffect, OutcomeSpace
from .measurement_model import trivial_model, von_neumann_model
from .states import DensityMatrix, hermitian_frame

S3_SEED = np.array([[0.7, 0.2 + 0.1j], [0.2 - 0.1j, 0.3]])


def fixture_dir() -> Path:
    return Path(str(resources.files("effectdual") / "fixtures"))


def _rotation(dim: int, angle: float) -> np.ndarray:
    v = np.eye(dim, dtype=np.complex128)
    c, s = np.cos(angle), np.sin(angle)
    v[:2, :2] = [[c, -s], [s, c]]
    return v


def _cyclic_system(n: int) -> ImprimitivitySystem:
    action = regular_action(cyclic_group(n))
    return ImprimitivitySystem(
        permutation_representation(action), action, Povm.projective(n, action.space)
    )


def _swap_first_two(p: Povm) -> Povm:
    effects = list(p.effects)
    effects[0], effects[1] = effects[1], effects[0]
    return Povm(p.space, tuple(effects))


def _conjugated(p: Povm, v: np.ndarray) -> Povm:
    return Povm(p.space, tuple(v @ e.operator @ v.conj().T for e in p.effects))


def s3_system() -> ImprimitivitySystem:
    action = natural_action(symmetric_group(3), 3)
    rep = standard_representation(action)
    return ImprimitivitySystem(rep, action, build_covariant_povm(rep, action, S3_SEED))


def systems() -> dict[str, tuple[ImprimitivitySystem, bool]]:
    """Name -> (system, expected covariance verdict)."""
    c4, c6, s3 = _cyclic_system(4), _cyclic_system(6), s3_system()
    out = {
        "c4_shift": (c4, True),
        "c4_broken": (ImprimitivitySystem(c4.rep, c4.action, _swap_first_two(c4.povm)), False),
        "c4_perturbed": (
            ImprimitivitySystem(c4.rep, c4.action, _conjugated(c4.povm, _rotation(4, 0.3))),
            False,
        ),
        "c6_shift": (c6, True),
        "c6_broken": (ImprimitivitySystem(c6.rep, c6.action, _swap_first_two(c6.povm)), False),
        "s3_covariant": (s3, True),
        "s3_broken": (
            ImprimitivitySystem(s3.rep, s3.action, _conjugated(s3.povm, _rotation(2, 0.4))),
            False,
        ),
    }
    return out


def _transcripts(p: Povm) -> dict[str, dict]:
    rng = np.random.default_rng(2024)
    q_samples = [(ClassicalEffect.indicator(p.space, x), None) for x in p.space]
    q_samples += [(ClassicalEffect(p.space, rng.uniform(size=len(p.space))), None) for _ in range(4)]
    q_samples = [(f, quantize(p, f).operator) for f, _ in q_samples]
    states = [DensityMatrix(m) for m in hermitian_frame(p.dim)]
    m_samples = [(rho, measure(p, rho)) for rho in states]
    return {
        "trine_quantization_transcript": jsonio.transcript_to_json("quantization", p.space, p.dim, q_samples),
        "trine_measurement_transcript": jsonio.transcript_to_json("measurement", p.space, p.dim, m_samples),
    }


def build_all() -> dict[str, dict]:
    """Filename -> JSON document for every shipped fixture, plus the manifest."""
    docs: dict[str, dict] = {}
    trine = Povm.trine()
    docs["trine.json"] = jsonio.povm_to_json(trine)
    docs["projective2.json"] = jsonio.povm_to_json(Povm.projective(2))
    docs["projective3.json"] = jsonio.povm_to_json(Povm.projective(3))
    docs["single_outcome.json"] = jsonio.povm_to_json(
        Povm(OutcomeSpace(("1",)), (np.eye(2),))
    )
    docs["rho_zero.json"] = jsonio.density_to_json(DensityMatrix.basis(2, 0))
    docs["f_ones_trine.json"] = jsonio.classical_effect_to_json(
        ClassicalEffect.constant(trine.space, 1.0)
    )
    docs["f_ones_pointer2.json"] = jsonio.classical_effect_to_json(
        ClassicalEffect.constant(OutcomeSpace.of_size(2), 1.0)
    )
    docs["f_ones_single.json"] = jsonio.classical_effect_to_json(
        ClassicalEffect.constant(OutcomeSpace(("1",)), 1.0)
    )
    for name, doc in _transcripts(trine).items():
        docs[f"{name}.json"] = doc

    expected_systems = {}
    for name, (sys_, ok) in systems().items():
        docs[f"{name}.json"] = jsonio.system_to_json(sys_)
        expected_systems[f"{name}.json"] = ok
    docs["seed_c4_basis.json"] = jsonio.quantum_effect_to_json(
        Povm.projective(4).effects[0]
    )
    docs["seed_s3.json"] = {"dim": 2, "operator": jsonio.matrix_to_json(S3_SEED)}

    docs["von_neumann_2.json"] = jsonio.model_to_json(von_neumann_model(2))
    docs["von_neumann_3.json"] = jsonio.model_to_json(von_neumann_model(3))
    docs["trivial_probe.json"] = jsonio.model_to_json(trivial_model(2))

    docs["manifest.json"] = {
        "povms": ["trine.json", "projective2.json", "projective3.json", "single_outcome.json"],
        "systems": expected_systems,
        "models": {
            "von_neumann_2.json": "projective2.json",
            "von_neumann_3.json": "projective3.json",
            "trivial_probe.json": "single_outcome.json",
        },
        "transcripts": {
            "trine_quantization_transcript.json": "trine.json",
            "trine_measurement_transcript.json": "trine.json",
        },
    }
    return docs


def write_fixtures(directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, doc in build_all().items():
        (directory / name).write_text(jsonio.dumps(doc, pretty=True), encoding="utf-8")


if __name__ == "__main__":
    write_fixtures(sys.argv[1] if len(sys.argv) > 1 else fixture_dir())
