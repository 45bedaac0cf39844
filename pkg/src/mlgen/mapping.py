"""Mapping configuration: which template renders which block, and how."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import MappingError
from .model import Block, Model

TOP_KEYS = ("trimEmptyLines", "constants", "stereotypeMappings", "nameMappings")
ENTRY_KEYS = ("template", "properties", "modelCommands")

BY_NAME = "byName"
BY_STEREOTYPE = "byStereotype"


@dataclass(frozen=True)
class MappingEntry:
    template: str
    properties: dict[str, str] = field(default_factory=dict)
    model_commands: dict[str, str] = field(default_factory=dict)

    def targets(self) -> list[str]:
        """Template variables this entry binds, properties first."""
        return list(self.properties.values()) + list(self.model_commands.values())


@dataclass(frozen=True)
class MappingConfig:
    trim_empty_lines: bool = False
    constants: dict[str, str] = field(default_factory=dict)
    stereotype_mappings: dict[str, MappingEntry] = field(default_factory=dict)
    name_mappings: dict[str, MappingEntry] = field(default_factory=dict)

    def entries(self):
        """All (section, key, entry) triples in file order."""
        for key, entry in self.stereotype_mappings.items():
            yield "stereotypeMappings", key, entry
        for key, entry in self.name_mappings.items():
            yield "nameMappings", key, entry


class Selection(NamedTuple):
    entry: MappingEntry
    provenance: str
    # the nameMappings / stereotypeMappings key that matched
    key: str
    # the stereotype actually applied to the block (None for byName)
    applied: str | None = None


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise MappingError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _str_map(node, where) -> dict[str, str]:
    if not isinstance(node, dict):
        raise MappingError(f"{where}: expected an object")
    for k, v in node.items():
        if not isinstance(v, str) or not v:
            raise MappingError(f"{where}.{k}: expected a non-empty string")
    return dict(node)


def _entry(node, where) -> MappingEntry:
    if not isinstance(node, dict):
        raise MappingError(f"{where}: expected an object")
    unknown = sorted(set(node) - set(ENTRY_KEYS))
    if unknown:
        raise MappingError(f"{where}: unknown keys {unknown}")
    if not isinstance(node.get("template"), str) or not node["template"]:
        raise MappingError(f"{where}.template: expected a non-empty string")
    entry = MappingEntry(
        node["template"],
        _str_map(node.get("properties", {}), where + ".properties"),
        _str_map(node.get("modelCommands", {}), where + ".modelCommands"))
    seen: dict[str, str] = {}
    for source, var in list(entry.properties.items()) + list(entry.model_commands.items()):
        if var in seen:
            raise MappingError(
                f"{where}: template variable {var!r} is bound by both "
                f"{seen[var]!r} and {source!r}")
        seen[var] = source
    return entry


def parse_mapping(data: bytes | str) -> MappingConfig:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise MappingError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise MappingError("$: expected an object")
    unknown = sorted(set(doc) - set(TOP_KEYS))
    if unknown:
        raise MappingError(f"$: unknown keys {unknown}")
    trim = doc.get("trimEmptyLines", False)
    if not isinstance(trim, bool):
        raise MappingError("$.trimEmptyLines: expected a boolean")

    def section(key):
        node = doc.get(key, {})
        if not isinstance(node, dict):
            raise MappingError(f"$.{key}: expected an object")
        return {k: _entry(v, f"$.{key}.{k}") for k, v in node.items()}

    return MappingConfig(
        trim,
        _str_map(doc.get("constants", {}), "$.constants"),
        section("stereotypeMappings"),
        section("nameMappings"))


def select_mapping(config: MappingConfig, model: Model, block: Block) -> Selection:
    """Pick the entry for ``block``: name mapping first, then stereotypes.

    For each applied stereotype the inheritance chain is walked from the
    stereotype itself upwards and the nearest mapped ancestor wins. Two
    applied stereotypes resolving to different mappings is an error.
    """
    if block.name in config.name_mappings:
        return Selection(config.name_mappings[block.name], BY_NAME, block.name)
    found: list[tuple[str, str]] = []
    for app in block.applied_stereotypes:
        for st in model.linearize(app.stereotype):
            if st in config.stereotype_mappings:
                found.append((app.stereotype, st))
                break
    keys = {key for _, key in found}
    if not found:
        applied = ", ".join(a.stereotype for a in block.applied_stereotypes) or "none"
        raise MappingError(
            f"no mapping for block {block.qualified_name} (stereotypes: {applied})")
    if len(keys) > 1:
        desc = " and ".join(f"{a!r} (via {k!r})" for a, k in found)
        raise MappingError(
            f"ambiguous mapping for block {block.qualified_name}: {desc}; "
            "add a nameMappings entry to disambiguate")
    applied, key = found[0]
    return Selection(config.stereotype_mappings[key], BY_STEREOTYPE, key, applied)
