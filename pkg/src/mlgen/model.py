"""SysML-lite model: stereotypes, blocks, state machines and the JSON loader.

The interchange format is a single JSON document::

    {"stereotypes": [...], "blocks": [...], "stateMachines": [...]}

Everything is validated structurally at load time. Mandatory stereotype
properties are *not* enforced here; see :meth:`Model.missing_mandatory`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Union

from .errors import InheritanceCycleError, ModelError, UnresolvedReferenceError

SEP = "::"
ROOT_STEREOTYPE = "ML"
KWARGS_PREFIX = "**"

STEREOTYPE_KINDS = ("ml-task", "data")
VALUE_TYPES = ("string", "number", "boolean", "reference")


@dataclass(frozen=True, order=True)
class QualifiedName:
    path: tuple[str, ...]

    def __post_init__(self):
        if not self.path:
            raise ValueError("qualified name needs at least one segment")
        for seg in self.path:
            if not seg or SEP in seg:
                raise ValueError(f"bad qualified name segment {seg!r}")

    @classmethod
    def parse(cls, text: str) -> "QualifiedName":
        return cls(tuple(text.split(SEP)))

    @property
    def name(self) -> str:
        return self.path[-1]

    def __str__(self):
        return SEP.join(self.path)


@dataclass(frozen=True)
class Reference:
    target: QualifiedName

    def __str__(self):
        return str(self.target)


Primitive = Union[str, int, float, bool]
AttributeValue = Union[Primitive, Reference]


@dataclass(frozen=True)
class PropertyDef:
    name: str
    type: str
    mandatory: bool = False
    default: Primitive | None = None


@dataclass(frozen=True)
class StereotypeDef:
    name: str
    kind: str
    parents: tuple[str, ...] = ()
    properties: tuple[PropertyDef, ...] = ()

    def own_property(self, name):
        for p in self.properties:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class StereotypeApplication:
    stereotype: str
    values: Mapping[str, AttributeValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Attribute:
    name: str
    value: AttributeValue
    stereotypes: tuple[StereotypeApplication, ...] = ()

    @property
    def is_kwarg(self) -> bool:
        return self.name.startswith(KWARGS_PREFIX)


@dataclass(frozen=True)
class Block:
    qualified_name: QualifiedName
    name: str
    applied_stereotypes: tuple[StereotypeApplication, ...] = ()
    attributes: tuple[Attribute, ...] = ()
    parts: tuple[QualifiedName, ...] = ()
    comments: tuple[str, ...] = ()

    def application(self, stereotype: str) -> StereotypeApplication | None:
        for app in self.applied_stereotypes:
            if app.stereotype == stereotype:
                return app
        return None

    def attribute(self, name: str) -> Attribute | None:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None


@dataclass(frozen=True)
class State:
    name: str
    order: int
    block: QualifiedName


@dataclass(frozen=True)
class StateMachine:
    name: str
    states: tuple[State, ...]

    def ordered_states(self) -> list[State]:
        return sorted(self.states, key=lambda s: s.order)


def render_value(value: AttributeValue) -> str:
    """Text form of a primitive: shortest round-trip numbers, Python booleans."""
    if isinstance(value, Reference):
        return str(value.target)
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, (int, float)):
        return repr(value)
    return value


class Model:
    """A fully linked, immutable model."""

    def __init__(self, stereotypes: Iterable[StereotypeDef], blocks: Iterable[Block],
                 machines: Iterable[StateMachine] = ()):
        self.stereotypes: dict[str, StereotypeDef] = {}
        for st in stereotypes:
            if st.name in self.stereotypes:
                raise ModelError(f"duplicate stereotype {st.name!r}")
            self.stereotypes[st.name] = st
        self.blocks: dict[QualifiedName, Block] = {}
        for b in blocks:
            if b.qualified_name in self.blocks:
                raise ModelError(f"duplicate qualified name {str(b.qualified_name)!r}")
            self.blocks[b.qualified_name] = b
        self.machines: tuple[StateMachine, ...] = tuple(machines)
        self._linear: dict[str, tuple[str, ...]] = {}
        self._validate()

    # -- lookup -----------------------------------------------------------

    def block(self, name: QualifiedName | str) -> Block:
        if isinstance(name, str):
            name = QualifiedName.parse(name)
        try:
            return self.blocks[name]
        except KeyError:
            raise UnresolvedReferenceError(str(name)) from None

    def stereotype(self, name: str) -> StereotypeDef:
        try:
            return self.stereotypes[name]
        except KeyError:
            raise UnresolvedReferenceError(name) from None

    def machine(self, name: str | None = None) -> StateMachine:
        """Machine by name; with no name, the only machine in the model."""
        if name is None:
            if len(self.machines) != 1:
                names = ", ".join(m.name for m in self.machines) or "none"
                raise ModelError(
                    f"model has {len(self.machines)} state machines ({names}); "
                    "select one by name")
            return self.machines[0]
        for m in self.machines:
            if m.name == name:
                return m
        raise UnresolvedReferenceError(name)

    # -- stereotypes ------------------------------------------------------

    def linearize(self, stereotype: str) -> tuple[str, ...]:
        """Resolution order of ``stereotype`` and its ancestors.

        Depth-first over parents in declaration order; when an ancestor is
        reached along several paths only its last occurrence is kept, so a
        shared base always comes after every stereotype deriving from it.
        Earlier entries win when looking up a property.
        """
        if stereotype not in self._linear:
            visits: list[str] = []

            def walk(name):
                visits.append(name)
                for parent in self.stereotype(name).parents:
                    walk(parent)

            walk(stereotype)
            seen = set()
            order = []
            for name in reversed(visits):
                if name not in seen:
                    seen.add(name)
                    order.append(name)
            self._linear[stereotype] = tuple(reversed(order))
        return self._linear[stereotype]

    def is_a(self, stereotype: str, ancestor: str) -> bool:
        return ancestor in self.linearize(stereotype)

    def property_defs(self, stereotype: str) -> dict[str, PropertyDef]:
        """Effective PropertyDefs, ancestors' properties listed first."""
        chain = self.linearize(stereotype)
        winner: dict[str, PropertyDef] = {}
        for name in chain:
            for p in self.stereotypes[name].properties:
                winner.setdefault(p.name, p)
        ordered: dict[str, PropertyDef] = {}
        for name in reversed(chain):
            for p in self.stereotypes[name].properties:
                if p.name not in ordered:
                    ordered[p.name] = winner[p.name]
        return ordered

    def effective_properties(self, block: Block, stereotype: str
                             ) -> dict[str, tuple[PropertyDef, AttributeValue | None]]:
        app = block.application(stereotype)
        if app is None:
            raise ModelError(
                f"stereotype {stereotype!r} is not applied to {block.qualified_name}")
        return {name: (pdef, app.values.get(name))
                for name, pdef in self.property_defs(stereotype).items()}

    def missing_mandatory(self, block: Block) -> list[tuple[str, str]]:
        """(stereotype, property) pairs that are mandatory but unassigned."""
        missing = []
        for app in block.applied_stereotypes:
            if self.stereotypes[app.stereotype].kind != "ml-task":
                continue
            for name, (pdef, value) in self.effective_properties(block, app.stereotype).items():
                if pdef.mandatory and value is None:
                    missing.append((app.stereotype, name))
        return missing

    # -- composition ------------------------------------------------------

    def connected_inputs(self, block: Block) -> list[Block]:
        return [self.blocks[q] for q in block.parts]

    # -- validation -------------------------------------------------------

    def _validate(self):
        self._check_stereotypes()
        for b in self.blocks.values():
            self._check_block(b)
        self._check_parts_acyclic()
        for m in self.machines:
            orders = set()
            for s in m.states:
                if s.order < 0 or s.order in orders:
                    raise ModelError(f"state {s.name!r}: order {s.order} is negative or repeated",
                                     f"stateMachine {m.name}")
                orders.add(s.order)
                if s.block not in self.blocks:
                    raise UnresolvedReferenceError(str(s.block), f"state {m.name}::{s.name}")

    def _check_stereotypes(self):
        for st in self.stereotypes.values():
            where = f"stereotype {st.name}"
            if st.kind not in STEREOTYPE_KINDS:
                raise ModelError(f"unknown kind {st.kind!r}", where)
            for parent in st.parents:
                if parent not in self.stereotypes:
                    raise UnresolvedReferenceError(parent, where)
            for p in st.properties:
                if p.name.startswith(KWARGS_PREFIX):
                    raise ModelError(f"property {p.name!r}: '**' names are only legal on blocks",
                                     where)
        # cycle detection (iterative colouring keeps the cycle path)
        state: dict[str, int] = {}
        for root in self.stereotypes:
            if state.get(root):
                continue
            stack = [(root, iter(self.stereotypes[root].parents))]
            path = [root]
            state[root] = 1
            while stack:
                name, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[name] = 2
                    stack.pop()
                    path.pop()
                elif state.get(nxt) == 1:
                    raise InheritanceCycleError(path[path.index(nxt):] + [nxt])
                elif not state.get(nxt):
                    state[nxt] = 1
                    stack.append((nxt, iter(self.stereotypes[nxt].parents)))
                    path.append(nxt)
        for st in self.stereotypes.values():
            if st.kind == "ml-task" and not self.is_a(st.name, ROOT_STEREOTYPE):
                raise ModelError(f"ml-task stereotype must inherit from {ROOT_STEREOTYPE!r}",
                                 f"stereotype {st.name}")

    def _check_application(self, app: StereotypeApplication, where: str):
        if app.stereotype not in self.stereotypes:
            raise UnresolvedReferenceError(app.stereotype, where)
        defs = self.property_defs(app.stereotype)
        for key, value in app.values.items():
            if key not in defs:
                raise ModelError(f"{app.stereotype!r} has no property {key!r}", where)
            _check_type(defs[key], value, f"{where}: {app.stereotype}.{key}")
            if isinstance(value, Reference) and value.target not in self.blocks:
                raise UnresolvedReferenceError(str(value.target), where)

    def _check_block(self, b: Block):
        where = f"block {b.qualified_name}"
        if b.name.startswith(KWARGS_PREFIX):
            raise ModelError("block names may not start with '**'", where)
        for app in b.applied_stereotypes:
            self._check_application(app, where)
        names = set()
        for attr in b.attributes:
            if attr.name in names:
                raise ModelError(f"duplicate attribute {attr.name!r}", where)
            names.add(attr.name)
            if isinstance(attr.value, Reference) and attr.value.target not in self.blocks:
                raise UnresolvedReferenceError(str(attr.value.target), f"{where}.{attr.name}")
            for app in attr.stereotypes:
                self._check_application(app, f"{where}.{attr.name}")
                if self.stereotypes[app.stereotype].kind != "data":
                    raise ModelError(f"{app.stereotype!r} is not a data stereotype",
                                     f"{where}.{attr.name}")
        for part in b.parts:
            if part not in self.blocks:
                raise UnresolvedReferenceError(str(part), where)

    def _check_parts_acyclic(self):
        state: dict[QualifiedName, int] = {}

        def visit(q, path):
            state[q] = 1
            path.append(q)
            for part in self.blocks[q].parts:
                if state.get(part) == 1:
                    cyc = path[path.index(part):] + [part]
                    raise InheritanceCycleError([str(x) for x in cyc], "parts")
                if not state.get(part):
                    visit(part, path)
            path.pop()
            state[q] = 2

        for q in self.blocks:
            if not state.get(q):
                visit(q, [])


def _check_type(pdef: PropertyDef, value, where):
    ok = {
        "string": lambda v: isinstance(v, str),
        "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "boolean": lambda v: isinstance(v, bool),
        "reference": lambda v: isinstance(v, Reference),
    }[pdef.type](value)
    if not ok:
        raise ModelError(f"value {value!r} does not match type {pdef.type!r}", where)


# -- JSON interchange -------------------------------------------------------

class _Reader:
    """Small helper that type-checks JSON nodes and tracks their location."""

    def __init__(self, where: str):
        self.where = where

    def fail(self, msg, where=None):
        raise ModelError(msg, where or self.where)

    def obj(self, node, where, required=(), optional=()):
        if not isinstance(node, dict):
            self.fail("expected an object", where)
        unknown = set(node) - set(required) - set(optional)
        if unknown:
            self.fail(f"unknown keys {sorted(unknown)}", where)
        for key in required:
            if key not in node:
                self.fail(f"missing key {key!r}", where)
        return node

    def list(self, node, where):
        if not isinstance(node, list):
            self.fail("expected an array", where)
        return node

    def str(self, node, where):
        if not isinstance(node, str) or not node:
            self.fail("expected a non-empty string", where)
        return node

    def qname(self, node, where):
        try:
            return QualifiedName.parse(self.str(node, where))
        except ValueError as exc:
            self.fail(str(exc), where)


def _value(r: _Reader, node, where) -> AttributeValue:
    if isinstance(node, dict):
        r.obj(node, where, required=("ref",))
        return Reference(r.qname(node["ref"], where + ".ref"))
    if isinstance(node, (str, int, float, bool)):
        return node
    r.fail("expected a primitive or {\"ref\": ...}", where)


def _application(r: _Reader, node, where) -> StereotypeApplication:
    if isinstance(node, str):
        return StereotypeApplication(r.str(node, where), {})
    r.obj(node, where, required=("stereotype",), optional=("values",))
    values = node.get("values", {})
    if not isinstance(values, dict):
        r.fail("expected an object", where + ".values")
    return StereotypeApplication(
        r.str(node["stereotype"], where + ".stereotype"),
        {k: _value(r, v, f"{where}.values.{k}") for k, v in values.items()})


def _stereotype(r: _Reader, node, where) -> StereotypeDef:
    r.obj(node, where, required=("name", "kind"), optional=("parents", "properties"))
    props = []
    for i, p in enumerate(r.list(node.get("properties", []), where + ".properties")):
        pw = f"{where}.properties[{i}]"
        r.obj(p, pw, required=("name", "type"), optional=("mandatory", "default"))
        if p["type"] not in VALUE_TYPES:
            r.fail(f"unknown property type {p['type']!r}", pw)
        mandatory = p.get("mandatory", False)
        if not isinstance(mandatory, bool):
            r.fail("'mandatory' must be a boolean", pw)
        default = p.get("default")
        pdef = PropertyDef(r.str(p["name"], pw + ".name"), p["type"], mandatory, default)
        if default is not None:
            if mandatory:
                r.fail("mandatory properties cannot carry a default", pw)
            if p["type"] == "reference":
                r.fail("reference properties cannot carry a default", pw)
            _check_type(pdef, default, pw)
        props.append(pdef)
    return StereotypeDef(
        r.str(node["name"], where + ".name"),
        node["kind"],
        tuple(r.str(x, f"{where}.parents[{i}]")
              for i, x in enumerate(r.list(node.get("parents", []), where + ".parents"))),
        tuple(props))


def _block(r: _Reader, node, where) -> Block:
    r.obj(node, where, required=("qualifiedName",),
          optional=("name", "appliedStereotypes", "attributes", "parts", "comments"))
    qn = r.qname(node["qualifiedName"], where + ".qualifiedName")
    name = node.get("name", qn.name)
    if name != qn.name:
        r.fail(f"name {name!r} differs from last segment of {str(qn)!r}", where)
    attrs = []
    for i, a in enumerate(r.list(node.get("attributes", []), where + ".attributes")):
        aw = f"{where}.attributes[{i}]"
        r.obj(a, aw, required=("name",), optional=("value", "ref", "stereotypes"))
        if ("value" in a) == ("ref" in a):
            r.fail("attribute needs exactly one of 'value' or 'ref'", aw)
        value = (Reference(r.qname(a["ref"], aw + ".ref")) if "ref" in a
                 else _value(r, a["value"], aw + ".value"))
        if isinstance(value, dict):
            r.fail("use 'ref' for references", aw)
        attrs.append(Attribute(
            r.str(a["name"], aw + ".name"), value,
            tuple(_application(r, s, f"{aw}.stereotypes[{j}]")
                  for j, s in enumerate(r.list(a.get("stereotypes", []), aw + ".stereotypes")))))
    comments = r.list(node.get("comments", []), where + ".comments")
    for i, c in enumerate(comments):
        if not isinstance(c, str):
            r.fail("comments must be strings", f"{where}.comments[{i}]")
    return Block(
        qn, name,
        tuple(_application(r, s, f"{where}.appliedStereotypes[{i}]")
              for i, s in enumerate(r.list(node.get("appliedStereotypes", []),
                                           where + ".appliedStereotypes"))),
        tuple(attrs),
        tuple(r.qname(p, f"{where}.parts[{i}]")
              for i, p in enumerate(r.list(node.get("parts", []), where + ".parts"))),
        tuple(comments))


def _machine(r: _Reader, node, where) -> StateMachine:
    r.obj(node, where, required=("name", "states"))
    states = []
    for i, s in enumerate(r.list(node["states"], where + ".states")):
        sw = f"{where}.states[{i}]"
        r.obj(s, sw, required=("name", "order", "block"))
        if not isinstance(s["order"], int) or isinstance(s["order"], bool):
            r.fail("'order' must be an integer", sw)
        states.append(State(r.str(s["name"], sw + ".name"), s["order"],
                            r.qname(s["block"], sw + ".block")))
    return StateMachine(r.str(node["name"], where + ".name"), tuple(states))


def model_from_dict(doc: Any) -> Model:
    r = _Reader("model")
    r.obj(doc, "$", optional=("stereotypes", "blocks", "stateMachines"))
    return Model(
        [_stereotype(r, n, f"$.stereotypes[{i}]")
         for i, n in enumerate(r.list(doc.get("stereotypes", []), "$.stereotypes"))],
        [_block(r, n, f"$.blocks[{i}]")
         for i, n in enumerate(r.list(doc.get("blocks", []), "$.blocks"))],
        [_machine(r, n, f"$.stateMachines[{i}]")
         for i, n in enumerate(r.list(doc.get("stateMachines", []), "$.stateMachines"))])


def load_model(data: bytes | str) -> Model:
    """Parse and link a ``*.model.json`` document."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelError(f"not UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return model_from_dict(doc)


def _dump_value(v: AttributeValue):
    return {"ref": str(v.target)} if isinstance(v, Reference) else v


def _dump_app(app: StereotypeApplication):
    return {"stereotype": app.stereotype,
            "values": {k: _dump_value(v) for k, v in app.values.items()}}


def model_to_dict(model: Model) -> dict:
    """Canonical JSON-ready form; ``model_from_dict`` inverts it."""
    stereotypes = []
    for st in model.stereotypes.values():
        props = []
        for p in st.properties:
            d = {"name": p.name, "type": p.type, "mandatory": p.mandatory}
            if p.default is not None:
                d["default"] = p.default
            props.append(d)
        stereotypes.append({"name": st.name, "kind": st.kind,
                            "parents": list(st.parents), "properties": props})
    blocks = []
    for b in model.blocks.values():
        attrs = []
        for a in b.attributes:
            d = {"name": a.name}
            if isinstance(a.value, Reference):
                d["ref"] = str(a.value.target)
            else:
                d["value"] = a.value
            d["stereotypes"] = [_dump_app(s) for s in a.stereotypes]
            attrs.append(d)
        blocks.append({
            "qualifiedName": str(b.qualified_name), "name": b.name,
            "appliedStereotypes": [_dump_app(s) for s in b.applied_stereotypes],
            "attributes": attrs,
            "parts": [str(p) for p in b.parts],
            "comments": list(b.comments)})
    machines = [{"name": m.name,
                 "states": [{"name": s.name, "order": s.order, "block": str(s.block)}
                            for s in m.states]}
                for m in model.machines]
    return {"stereotypes": stereotypes, "blocks": blocks, "stateMachines": machines}


def dump_model(model: Model) -> bytes:
    return json.dumps(model_to_dict(model), indent=2, ensure_ascii=False).encode("utf-8") + b"\n"
