import json

import numpy as np
import pytest

from effectdual import covariance as cv
from effectdual import jsonio
from effectdual.duality import Povm, measure, quantize, random_povm
from effectdual.effects import ClassicalEffect, OutcomeSpace, QuantumEffect
from effectdual.errors import NotHermitian, NotPovm, SchemaError, ValidationError
from effectdual.fixtures import build_all, fixture_dir, systems
from effectdual.measurement_model import random_model
from effectdual.states import DensityMatrix, ProbabilityVector, random_density


def through_text(doc):
    return json.loads(jsonio.dumps(doc))


def test_matrix_round_trip(rng):
    m = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    assert np.abs(jsonio.matrix_from_json(through_text(jsonio.matrix_to_json(m))) - m).max() == 0


def test_matrix_schema_errors():
    with pytest.raises(SchemaError, match=r"matrix\.data"):
        jsonio.matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(SchemaError, match=r"matrix\.rows"):
        jsonio.matrix_from_json({"rows": 0, "cols": 2, "data": []})
    with pytest.raises(SchemaError, match=r"matrix\.cols: missing"):
        jsonio.matrix_from_json({"rows": 1, "data": [[1, 0]]})
    with pytest.raises(SchemaError, match=r"data\[0\]"):
        jsonio.matrix_from_json({"rows": 1, "cols": 1, "data": [["x", 0]]})


def test_effect_and_state_round_trips(rng):
    space = OutcomeSpace(("a", "b", "c"))
    f = ClassicalEffect(space, rng.uniform(size=3))
    g = jsonio.effect_from_json(through_text(jsonio.effect_to_json(f)))
    assert g.space == space and np.abs(g.values - f.values).max() == 0
    e = QuantumEffect(np.diag([0.2, 0.7]))
    assert np.abs(jsonio.effect_from_json(through_text(jsonio.effect_to_json(e))).operator - e.operator).max() == 0
    rho = random_density(3, rng)
    assert np.abs(jsonio.density_from_json(through_text(jsonio.density_to_json(rho))).operator - rho.operator).max() == 0
    mu = ProbabilityVector(space, [0.2, 0.3, 0.5])
    assert np.abs(jsonio.probability_from_json(through_text(jsonio.probability_to_json(mu))).weights - mu.weights).max() == 0


def test_povm_round_trip(rng):
    p = random_povm(3, 4, rng)
    q = jsonio.povm_from_json(through_text(jsonio.povm_to_json(p)))
    assert q.space == p.space and np.abs(q.operators - p.operators).max() == 0


def test_povm_errors_name_the_field():
    doc = jsonio.povm_to_json(Povm.projective(2))
    doc["effects"]["1"]["data"][3] = [0.5, 0.0]
    with pytest.raises(NotPovm, match="effects do not sum to identity"):
        jsonio.povm_from_json(doc)
    doc = jsonio.povm_to_json(Povm.projective(2))
    del doc["effects"]["0"]
    with pytest.raises(SchemaError, match=r"povm\.effects: missing labels \['0'\]"):
        jsonio.povm_from_json(doc)
    doc = jsonio.povm_to_json(Povm.projective(2))
    doc["dim"] = 3
    with pytest.raises(SchemaError, match=r"povm\.effects\.0: shape"):
        jsonio.povm_from_json(doc)


def test_classical_effect_out_of_range_is_validation_error():
    with pytest.raises(ValidationError, match="effect"):
        jsonio.classical_effect_from_json({"space": ["0"], "values": {"0": 1.5}})
    with pytest.raises(SchemaError, match=r"effect\.values\.0"):
        jsonio.classical_effect_from_json({"space": ["0"], "values": {"0": "x"}})


def test_operator_from_json_requires_hermitian():
    doc = {"dim": 2, "operator": jsonio.matrix_to_json(np.array([[0, 1], [0, 0]]))}
    with pytest.raises(NotHermitian):
        jsonio.operator_from_json(doc)


def test_system_round_trip():
    for name, (sys, _) in systems().items():
        back = jsonio.system_from_json(through_text(jsonio.system_to_json(sys)))
        assert back.rep.group == sys.rep.group, name
        assert back.action.perm == sys.action.perm, name
        assert np.abs(back.povm.operators - sys.povm.operators).max() == 0, name
        assert max(np.abs(a - b).max() for a, b in zip(back.rep.matrices, sys.rep.matrices)) == 0


def test_invalid_group_table_rejected():
    doc = jsonio.group_to_json(cv.cyclic_group(3))
    doc["table"][1][1] = "0"
    with pytest.raises(ValidationError, match="group"):
        jsonio.group_from_json(doc)


def test_model_round_trip(rng):
    m = random_model(2, 2, 3, rng)
    back = jsonio.model_from_json(through_text(jsonio.model_to_json(m)))
    assert back.space == m.space
    assert max(np.abs(a - b).max() for a, b in zip(back.channel.kraus, m.channel.kraus)) == 0


def test_transcript_round_trip(rng):
    p = Povm.trine()
    rho = DensityMatrix.basis(2, 0)
    f = ClassicalEffect(p.space, [0.1, 0.5, 0.9])
    for kind, samples in (("quantization", [(f, quantize(p, f).operator)]), ("measurement", [(rho, measure(p, rho))])):
        t = jsonio.transcript_from_json(through_text(jsonio.transcript_to_json(kind, p.space, 2, samples)))
        assert t["kind"] == kind and t["dim"] == 2 and len(t["samples"]) == 1
    with pytest.raises(SchemaError, match="kind"):
        jsonio.transcript_from_json({"kind": "other", "space": ["0"], "dim": 1, "samples": []})


def test_load_reports_bad_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError, match="invalid JSON"):
        jsonio.load(bad)
    with pytest.raises(SchemaError, match="cannot read"):
        jsonio.load(tmp_path / "missing.json")


def test_dumps_is_canonical():
    assert jsonio.dumps({"b": 1, "a": [1.5, 2]}) == '{"a":[1.5,2],"b":1}\n'
    assert jsonio.dumps({"b": 1, "a": 2}, pretty=True) == '{\n  "a": 2,\n  "b": 1\n}\n'


def test_shipped_fixtures_match_generator():
    directory = fixture_dir()
    docs = build_all()
    shipped = sorted(p.name for p in directory.glob("*.json"))
    assert shipped == sorted(docs)
    for name, doc in docs.items():
        assert json.loads((directory / name).read_text()) == through_text(doc), name
