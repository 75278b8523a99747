"""JSON model, automaton and partition documents.

Probabilities may be written as JSON numbers or as strings (``"0.475"``,
``"19/40"``); numbers are read through :class:`~fractions.Fraction` so the
decimal that was written is the value used. Problems are reported with a
``line:column`` location for syntax errors and a JSON path otherwise.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional

from .abstraction import Partition
from .errors import DanglingReference, ModelError
from .models import Pomdp, Waz, validate_pomdp

DUMMY_INITIAL = "init_dist"


def _loads(text: str):
    try:
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ModelError(exc.msg, f"{exc.lineno}:{exc.colno}") from None


def _prob(value, where) -> Fraction:
    if isinstance(value, bool):
        raise ModelError("expected a probability, found a boolean", where)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ModelError(f"cannot read {value!r} as an exact probability", where) from None
    raise ModelError(f"expected a probability, found {type(value).__name__}", where)


def _field(doc: Mapping, key: str, kind, where: str = "$"):
    if key not in doc:
        raise ModelError(f"missing field {key!r}", where)
    value = doc[key]
    if not isinstance(value, kind):
        raise ModelError(f"field {key!r} has the wrong type", f"{where}.{key}")
    return value


def _names(doc, key) -> List[str]:
    items = _field(doc, key, list)
    for i, x in enumerate(items):
        if not isinstance(x, str):
            raise ModelError("expected a string", f"$.{key}[{i}]")
    if len(set(items)) != len(items):
        raise ModelError("duplicate entries", f"$.{key}")
    return items


def _states(doc):
    ids, labels, extra = [], {}, {}
    for i, entry in enumerate(_field(doc, "states", list)):
        where = f"$.states[{i}]"
        if isinstance(entry, str):
            entry = {"id": entry}
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise ModelError("a state needs a string 'id'", where)
        sid = entry["id"]
        if sid in labels:
            raise DanglingReference(f"duplicate state {sid!r}", where)
        ids.append(sid)
        labs = entry.get("labels", [])
        if not isinstance(labs, list) or not all(isinstance(x, str) for x in labs):
            raise ModelError("labels must be a list of strings", f"{where}.labels")
        labels[sid] = frozenset(labs)
        extra[sid] = entry
    return ids, labels, extra


def _transitions(doc, states, actions, key="transitions"):
    table: Dict[str, Dict[str, Dict[str, Fraction]]] = {}
    known_s, known_a = set(states), set(actions)
    for i, row in enumerate(_field(doc, key, list)):
        where = f"$.{key}[{i}]"
        if not isinstance(row, list) or len(row) != 4:
            raise ModelError("a transition is [source, action, target, probability]", where)
        s, a, t, p = row
        for name, pool, what in ((s, known_s, "state"), (a, known_a, "action"), (t, known_s, "state")):
            if name not in pool:
                raise DanglingReference(f"unknown {what} {name!r}", where)
        cell = table.setdefault(s, {}).setdefault(a, {})
        if t in cell:
            raise ModelError(f"duplicate transition ({s}, {a}, {t})", where)
        cell[t] = _prob(p, f"{where}[3]")
    return table


def pomdp_from_dict(doc: Mapping[str, Any]) -> Pomdp:
    if not isinstance(doc, dict):
        raise ModelError("expected a JSON object", "$")
    kind = doc.get("kind", "pomdp")
    if kind != "pomdp":
        raise ModelError(f"expected kind 'pomdp', found {kind!r}", "$.kind")
    states, labels, _ = _states(doc)
    actions = _names(doc, "actions")
    observations = _names(doc, "observations")
    transition = _transitions(doc, states, actions)
    obs_fn: Dict[str, Dict[str, Fraction]] = {}
    for i, row in enumerate(_field(doc, "observation_function", list)):
        where = f"$.observation_function[{i}]"
        if not isinstance(row, list) or len(row) != 3:
            raise ModelError("an observation entry is [state, observation, probability]", where)
        s, z, p = row
        if s not in labels:
            raise DanglingReference(f"unknown state {s!r}", where)
        if z not in observations:
            raise DanglingReference(f"unknown observation {z!r}", where)
        obs_fn.setdefault(s, {})[z] = _prob(p, f"{where}[2]")
    dummy = False
    if "initial_distribution" in doc:
        if "initial" in doc:
            raise ModelError("give either 'initial' or 'initial_distribution', not both", "$")
        dist = _field(doc, "initial_distribution", dict)
        row = {}
        for s, p in dist.items():
            if s not in labels:
                raise DanglingReference(f"unknown state {s!r}", f"$.initial_distribution.{s}")
            row[s] = _prob(p, f"$.initial_distribution.{s}")
        if DUMMY_INITIAL in labels:
            raise ModelError(f"state id {DUMMY_INITIAL!r} is reserved with initial_distribution", "$.states")
        initial = DUMMY_INITIAL
        states = [initial, *states]
        labels[initial] = frozenset()
        transition[initial] = {a: dict(row) for a in actions}
        obs_fn[initial] = {observations[0]: Fraction(1)}
        dummy = True
    else:
        initial = _field(doc, "initial", str)
    try:
        return validate_pomdp(Pomdp(tuple(states), initial, tuple(actions), transition, tuple(observations),
                                    obs_fn, labels, dummy_initial=dummy))
    except ModelError as exc:
        if exc.where and not exc.where.startswith("$"):
            raise type(exc)(str(exc).split(": ", 1)[-1], f"$.{exc.where}") from None
        raise


def waz_from_dict(doc: Mapping[str, Any]) -> Waz:
    if not isinstance(doc, dict):
        raise ModelError("expected a JSON object", "$")
    if doc.get("kind") != "waz":
        raise ModelError(f"expected kind 'waz', found {doc.get('kind')!r}", "$.kind")
    states, labels, extra = _states(doc)
    actions = _names(doc, "actions")
    observations = _names(doc, "observations")
    z_label = {}
    for i, s in enumerate(states):
        z = extra[s].get("z")
        if not isinstance(z, str):
            raise ModelError("a weighted-automaton state needs a string 'z' label", f"$.states[{i}]")
        if z not in observations:
            raise DanglingReference(f"unknown observation label {z!r}", f"$.states[{i}].z")
        z_label[s] = z
    transition = _transitions(doc, states, actions)
    for s, by_a in transition.items():
        for a, row in by_a.items():
            for t, w in row.items():
                if not 0 <= w <= 1:
                    raise ModelError(f"weight T({s},{a},{t}) = {w} outside [0,1]", "$.transitions")
    initial = _field(doc, "initial", str)
    if initial not in labels:
        raise DanglingReference(f"initial state {initial!r} is not declared", "$.initial")
    return Waz(tuple(states), initial, tuple(actions), transition, tuple(observations), z_label, labels)


def load_model(text: str):
    """Parse a POMDP or weighted-automaton document according to its ``kind``."""
    doc = _loads(text)
    if isinstance(doc, dict) and doc.get("kind") == "waz":
        return waz_from_dict(doc)
    return pomdp_from_dict(doc)


def read_model(path: str):
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())


def load_partition(text: str, system: Waz) -> Partition:
    doc = _loads(text)
    if not isinstance(doc, dict) or "blocks" not in doc:
        raise ModelError("expected an object with a 'blocks' field", "$")
    blocks = doc["blocks"]
    if isinstance(blocks, dict):
        blocks = list(blocks.values())
    if not isinstance(blocks, list):
        raise ModelError("'blocks' must be a list or an object of lists", "$.blocks")
    for i, b in enumerate(blocks):
        if not isinstance(b, list) or not all(isinstance(s, str) for s in b):
            raise ModelError("a block is a list of state ids", f"$.blocks[{i}]")
    return Partition.from_blocks(system, blocks)


def read_partition(path: str, system: Waz) -> Partition:
    with open(path, encoding="utf-8") as fh:
        return load_partition(fh.read(), system)


def fraction_text(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def waz_to_dict(system: Waz, partition: Optional[Partition] = None) -> Dict[str, Any]:
    states = []
    for i, s in enumerate(system.states):
        entry: Dict[str, Any] = {"id": s, "z": system.z_label[s], "labels": sorted(system.labels.get(s, ()))}
        if partition is not None:
            entry["members"] = list(partition.blocks[i])
        states.append(entry)
    transitions = []
    for s in system.states:
        for a in system.actions:
            for t in system.states:
                w = system.T(s, a, t)
                if w:
                    transitions.append([s, a, t, fraction_text(w)])
    return {"kind": "waz", "states": states, "initial": system.initial, "actions": list(system.actions),
            "observations": list(system.observations), "transitions": transitions}


def pomdp_to_dict(model: Pomdp) -> Dict[str, Any]:
    transitions = []
    for s in model.states:
        for a in model.actions:
            for t in model.states:
                p = model.T(s, a, t)
                if p:
                    transitions.append([s, a, t, fraction_text(p)])
    obs = [[s, z, fraction_text(model.O(s, z))] for s in model.states for z in model.observations if model.O(s, z)]
    return {"kind": "pomdp",
            "states": [{"id": s, "labels": sorted(model.labels.get(s, ()))} for s in model.states],
            "initial": model.initial, "actions": list(model.actions), "observations": list(model.observations),
            "transitions": transitions, "observation_function": obs}


def _flat(value) -> bool:
    if isinstance(value, list):
        return all(not isinstance(x, (list, dict)) for x in value)
    if isinstance(value, dict):
        return "id" in value and all(_flat(v) if isinstance(v, list) else not isinstance(v, dict)
                                     for v in value.values())
    return True


def _emit(value, indent: int) -> str:
    if _flat(value):
        return json.dumps(value, ensure_ascii=False, separators=(", ", ": "))
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(value, list):
        if not value:
            return "[]"
        return "[\n" + ",\n".join(inner + _emit(v, indent + 1) for v in value) + "\n" + pad + "]"
    items = [f"{inner}{json.dumps(k, ensure_ascii=False)}: {_emit(v, indent + 1)}" for k, v in value.items()]
    return "{\n" + ",\n".join(items) + "\n" + pad + "}" if items else "{}"


def dumps(doc: Mapping[str, Any]) -> str:
    """Indented JSON that keeps scalar rows and state entries on one line."""
    return _emit(doc, 0) + "\n"
