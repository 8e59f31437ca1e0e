"""JSON encoding of every value type.

Matrices are ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in row-major
order.  Decoders raise ``SchemaError`` (or the relevant validation error)
with a message that starts with the path of the offending field.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import matrix_core as mc
from .covariance import FiniteGroup, GroupAction, ImprimitivitySystem, UnitaryRepresentation
from .duality import Povm
from .effects import ClassicalEffect, OutcomeSpace, QuantumEffect
from .errors import NotHermitian, SchemaError, ValidationError
from .measurement_model import KrausChannel, MeasurementModel
from .states import DensityMatrix, ProbabilityVector


def dumps(doc: Any, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def load(path: str | Path) -> Any:
    try:
        if str(path) == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc.strerror})") from None


def _get(doc, key: str, where: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise SchemaError(f"{where}.{key}: missing field")
    return doc[key]


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise SchemaError(f"{where}: expected a positive integer, got {value!r}")
    return value


def _checked(where: str, build):
    """Run a constructor, prefixing validation messages with ``where``."""
    try:
        return build()
    except SchemaError:
        raise
    except ValidationError as exc:
        raise type(exc)(f"{where}: {exc}") from None


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(doc, where: str = "matrix") -> np.ndarray:
    rows = _int(_get(doc, "rows", where), f"{where}.rows")
    cols = _int(_get(doc, "cols", where), f"{where}.cols")
    data = _get(doc, "data", where)
    if not isinstance(data, list) or len(data) != rows * cols:
        n = len(data) if isinstance(data, list) else "non-list"
        raise SchemaError(f"{where}.data: expected {rows * cols} entries, got {n}")
    out = np.empty(rows * cols, dtype=np.complex128)
    for k, pair in enumerate(data):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        ):
            raise SchemaError(f"{where}.data[{k}]: expected [re, im]")
        out[k] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise SchemaError(f"{where}.data: non-finite entry")
    return out.reshape(rows, cols)


def space_from_json(doc, where: str = "space") -> OutcomeSpace:
    if not isinstance(doc, list) or not all(isinstance(x, str) for x in doc):
        raise SchemaError(f"{where}: expected a list of string labels")
    return _checked(where, lambda: OutcomeSpace(tuple(doc)))


def _label_map(doc, space: OutcomeSpace, where: str) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object keyed by outcome label")
    unknown = [k for k in doc if k not in space.labels]
    if unknown:
        raise SchemaError(f"{where}: unknown labels {unknown}")
    missing = [x for x in space if x not in doc]
    if missing:
        raise SchemaError(f"{where}: missing labels {missing}")
    return doc


def _real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {value!r}")
    return float(value)


def classical_effect_to_json(f: ClassicalEffect) -> dict:
    return {"space": list(f.space.labels), "values": f.as_dict()}


def classical_effect_from_json(doc, where: str = "effect") -> ClassicalEffect:
    space = space_from_json(_get(doc, "space", where), f"{where}.space")
    values = _label_map(_get(doc, "values", where), space, f"{where}.values")
    vals = {x: _real(values[x], f"{where}.values.{x}") for x in space}
    return _checked(where, lambda: ClassicalEffect.from_mapping(space, vals))


def real_function_from_json(doc, where: str = "function") -> tuple[OutcomeSpace, dict]:
    """Like a classical effect, but values may be any reals."""
    space = space_from_json(_get(doc, "space", where), f"{where}.space")
    values = _label_map(_get(doc, "values", where), space, f"{where}.values")
    return space, {x: _real(values[x], f"{where}.values.{x}") for x in space}


def quantum_effect_to_json(e: QuantumEffect) -> dict:
    return {"dim": e.dim, "operator": matrix_to_json(e.operator)}


def _dim_operator(doc, where: str) -> np.ndarray:
    dim = _int(_get(doc, "dim", where), f"{where}.dim")
    op = matrix_from_json(_get(doc, "operator", where), f"{where}.operator")
    if op.shape != (dim, dim):
        raise SchemaError(f"{where}.operator: shape {op.shape} does not match dim {dim}")
    return op


def operator_from_json(doc, where: str = "operator") -> np.ndarray:
    """A bare ``{"dim", "operator"}`` document, required to be Hermitian."""
    op = _dim_operator(doc, where)
    if not mc.is_hermitian(op):
        raise NotHermitian(f"{where}.operator: not Hermitian")
    return op


def quantum_effect_from_json(doc, where: str = "effect") -> QuantumEffect:
    op = _dim_operator(doc, where)
    return _checked(where, lambda: QuantumEffect(op))


def effect_from_json(doc, where: str = "effect"):
    """Classical or quantum effect, told apart by the fields present."""
    if isinstance(doc, dict) and "values" in doc:
        return classical_effect_from_json(doc, where)
    return quantum_effect_from_json(doc, where)


def effect_to_json(e) -> dict:
    if isinstance(e, ClassicalEffect):
        return classical_effect_to_json(e)
    return quantum_effect_to_json(e)


def density_to_json(rho: DensityMatrix) -> dict:
    return {"dim": rho.dim, "operator": matrix_to_json(rho.operator)}


def density_from_json(doc, where: str = "state") -> DensityMatrix:
    op = _dim_operator(doc, where)
    return _checked(where, lambda: DensityMatrix(op))


def probability_to_json(mu: ProbabilityVector) -> dict:
    return {"space": list(mu.space.labels), "weights": mu.as_dict()}


def probability_from_json(doc, where: str = "distribution") -> ProbabilityVector:
    space = space_from_json(_get(doc, "space", where), f"{where}.space")
    weights = _label_map(_get(doc, "weights", where), space, f"{where}.weights")
    w = {x: _real(weights[x], f"{where}.weights.{x}") for x in space}
    return _checked(where, lambda: ProbabilityVector.from_mapping(space, w))


def povm_to_json(p: Povm) -> dict:
    return {
        "space": list(p.space.labels),
        "dim": p.dim,
        "effects": {x: matrix_to_json(e.operator) for x, e in zip(p.space, p.effects)},
    }


def povm_from_json(doc, where: str = "povm") -> Povm:
    space = space_from_json(_get(doc, "space", where), f"{where}.space")
    dim = _int(_get(doc, "dim", where), f"{where}.dim")
    effects = _label_map(_get(doc, "effects", where), space, f"{where}.effects")
    ops = {}
    for x in space:
        m = matrix_from_json(effects[x], f"{where}.effects.{x}")
        if m.shape != (dim, dim):
            raise SchemaError(f"{where}.effects.{x}: shape {m.shape} does not match dim {dim}")
        ops[x] = m
    return _checked(where, lambda: Povm.from_mapping(space, ops))


def group_to_json(g: FiniteGroup) -> dict:
    return {"elements": list(g.elements), "table": g.label_table(), "identity": g.identity}


def group_from_json(doc, where: str = "group") -> FiniteGroup:
    elements = _get(doc, "elements", where)
    table = _get(doc, "table", where)
    identity = _get(doc, "identity", where)
    if not isinstance(elements, list) or not all(isinstance(g, str) for g in elements):
        raise SchemaError(f"{where}.elements: expected a list of string labels")
    if not isinstance(table, list) or not all(isinstance(row, list) for row in table):
        raise SchemaError(f"{where}.table: expected a list of rows")
    return _checked(where, lambda: FiniteGroup.from_label_table(elements, table, identity))


def representation_to_json(rep: UnitaryRepresentation) -> dict:
    return {
        "group": group_to_json(rep.group),
        "dim": rep.dim,
        "matrices": {g: matrix_to_json(u) for g, u in zip(rep.group.elements, rep.matrices)},
    }


def representation_from_json(doc, where: str = "rep") -> UnitaryRepresentation:
    group = group_from_json(_get(doc, "group", where), f"{where}.group")
    dim = _int(_get(doc, "dim", where), f"{where}.dim")
    mats = _get(doc, "matrices", where)
    if not isinstance(mats, dict):
        raise SchemaError(f"{where}.matrices: expected an object keyed by element")
    out = []
    for g in group.elements:
        if g not in mats:
            raise SchemaError(f"{where}.matrices.{g}: missing")
        m = matrix_from_json(mats[g], f"{where}.matrices.{g}")
        if m.shape != (dim, dim):
            raise SchemaError(f"{where}.matrices.{g}: shape {m.shape} does not match dim {dim}")
        out.append(m)
    return _checked(where, lambda: UnitaryRepresentation(group, tuple(out)))


def action_to_json(a: GroupAction) -> dict:
    return {"space": list(a.space.labels), "map": a.as_map()}


def action_from_json(doc, group: FiniteGroup, where: str = "action") -> GroupAction:
    space = space_from_json(_get(doc, "space", where), f"{where}.space")
    mapping = _get(doc, "map", where)
    if not isinstance(mapping, dict):
        raise SchemaError(f"{where}.map: expected an object keyed by element")
    return _checked(where, lambda: GroupAction.from_map(group, space, mapping))


def system_to_json(sys: ImprimitivitySystem) -> dict:
    return {
        "rep": representation_to_json(sys.rep),
        "action": action_to_json(sys.action),
        "povm": povm_to_json(sys.povm),
    }


def system_from_json(doc, where: str = "system") -> ImprimitivitySystem:
    rep = representation_from_json(_get(doc, "rep", where), f"{where}.rep")
    action = action_from_json(_get(doc, "action", where), rep.group, f"{where}.action")
    povm = povm_from_json(_get(doc, "povm", where), f"{where}.povm")
    return _checked(where, lambda: ImprimitivitySystem(rep, action, povm))


def rep_action_from_json(doc, where: str = "system") -> tuple[UnitaryRepresentation, GroupAction]:
    """Representation and action only; a ``povm`` field, if present, is ignored."""
    rep = representation_from_json(_get(doc, "rep", where), f"{where}.rep")
    action = action_from_json(_get(doc, "action", where), rep.group, f"{where}.action")
    return rep, action


def channel_to_json(ch: KrausChannel) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "kraus": [matrix_to_json(k) for k in ch.kraus]}


def channel_from_json(doc, where: str = "channel") -> KrausChannel:
    dim_in = _int(_get(doc, "dim_in", where), f"{where}.dim_in")
    dim_out = _int(_get(doc, "dim_out", where), f"{where}.dim_out")
    kraus = _get(doc, "kraus", where)
    if not isinstance(kraus, list) or not kraus:
        raise SchemaError(f"{where}.kraus: expected a non-empty list of matrices")
    ops = tuple(matrix_from_json(k, f"{where}.kraus[{i}]") for i, k in enumerate(kraus))
    return _checked(where, lambda: KrausChannel(dim_in, dim_out, ops))


def model_to_json(m: MeasurementModel) -> dict:
    return {
        "system_dim": m.system_dim,
        "probe_dim": m.probe_dim,
        "probe_state": density_to_json(m.probe_state),
        "channel": channel_to_json(m.channel),
        "pointer": povm_to_json(m.pointer),
    }


def model_from_json(doc, where: str = "model") -> MeasurementModel:
    system_dim = _int(_get(doc, "system_dim", where), f"{where}.system_dim")
    probe_dim = _int(_get(doc, "probe_dim", where), f"{where}.probe_dim")
    probe_state = density_from_json(_get(doc, "probe_state", where), f"{where}.probe_state")
    channel = channel_from_json(_get(doc, "channel", where), f"{where}.channel")
    pointer = povm_from_json(_get(doc, "pointer", where), f"{where}.pointer")
    return _checked(
        where, lambda: MeasurementModel(system_dim, probe_dim, probe_state, channel, pointer)
    )


# Transcripts record input/output pairs of a black-box map:
#   {"kind": "quantization", "space": [...], "dim": d,
#    "samples": [{"input": <classical effect>, "output": <matrix>}, ...]}
#   {"kind": "measurement", "space": [...], "dim": d,
#    "samples": [{"input": <density>, "output": <probability vector>}, ...]}
def transcript_from_json(doc, where: str = "transcript") -> dict:
    kind = _get(doc, "kind", where)
    if kind not in ("quantization", "measurement"):
        raise SchemaError(f"{where}.kind: expected 'quantization' or 'measurement', got {kind!r}")
    space = space_from_json(_get(doc, "space", where), f"{where}.space")
    dim = _int(_get(doc, "dim", where), f"{where}.dim")
    samples = _get(doc, "samples", where)
    if not isinstance(samples, list) or not samples:
        raise SchemaError(f"{where}.samples: expected a non-empty list")
    pairs = []
    for k, s in enumerate(samples):
        at = f"{where}.samples[{k}]"
        if kind == "quantization":
            f = classical_effect_from_json(_get(s, "input", at), f"{at}.input")
            if f.space != space:
                raise SchemaError(f"{at}.input.space: does not match the transcript space")
            out = matrix_from_json(_get(s, "output", at), f"{at}.output")
            if out.shape != (dim, dim):
                raise SchemaError(f"{at}.output: shape {out.shape} does not match dim {dim}")
            pairs.append((f, out))
        else:
            rho = density_from_json(_get(s, "input", at), f"{at}.input")
            if rho.dim != dim:
                raise SchemaError(f"{at}.input.dim: does not match dim {dim}")
            mu = probability_from_json(_get(s, "output", at), f"{at}.output")
            if mu.space != space:
                raise SchemaError(f"{at}.output.space: does not match the transcript space")
            pairs.append((rho, mu))
    return {"kind": kind, "space": space, "dim": dim, "samples": pairs}


def transcript_to_json(kind: str, space: OutcomeSpace, dim: int, samples) -> dict:
    out = []
    for inp, outp in samples:
        if kind == "quantization":
            out.append({"input": classical_effect_to_json(inp), "output": matrix_to_json(outp)})
        else:
            out.append({"input": density_to_json(inp), "output": probability_to_json(outp)})
    return {"kind": kind, "space": list(space.labels), "dim": dim, "samples": out}
