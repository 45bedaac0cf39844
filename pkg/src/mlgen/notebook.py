"""Compose snippets into notebook cells and write nbformat 4 JSON."""

from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .errors import GenerationError
from .textscan import balance_issues

MARKDOWN = "markdown"
CODE = "code"


@dataclass(frozen=True)
class Cell:
    kind: str
    source: str


@dataclass
class Notebook:
    cells: list[Cell] = field(default_factory=list)
    kernel_name: str | None = None


def _blank(line: str) -> bool:
    return not line.strip()


def trim_blank_lines(text: str) -> str:
    """Drop leading/trailing blank lines and collapse inner runs to one."""
    out: list[str] = []
    for line in text.split("\n"):
        if _blank(line) and (not out or _blank(out[-1])):
            continue
        out.append(line)
    while out and _blank(out[-1]):
        out.pop()
    return "\n".join(out)


def compose(registry, config=None, kernel_name: str | None = None) -> Notebook:
    """Cells in execution order, all hoisted imports deduplicated into cell 0."""
    trim_empty_lines = bool(config and config.trim_empty_lines)
    imports: list[str] = []
    seen = set()
    cells: list[Cell] = []
    for ctx in registry.ordered():
        if ctx.snippet is None:
            raise GenerationError("context has no rendered snippet", ctx.block_ref)
        for line in ctx.snippet.imports:
            key = line.strip()
            if key not in seen:
                seen.add(key)
                imports.append(key)
        for comment in ctx.comments:
            cells.append(Cell(MARKDOWN, comment))
        body = ctx.snippet.body
        body = trim_blank_lines(body) if trim_empty_lines else body.rstrip("\n")
        cells.append(Cell(CODE, body))
    if imports:
        cells.insert(0, Cell(CODE, "\n".join(imports)))
    return Notebook(cells, kernel_name)


def _source_lines(text: str) -> list[str]:
    return text.splitlines(keepends=True)


def notebook_to_dict(nb: Notebook) -> dict:
    cells = []
    for i, cell in enumerate(nb.cells):
        d = {"cell_type": cell.kind, "id": f"cell-{i}", "metadata": {},
             "source": _source_lines(cell.source)}
        if cell.kind == CODE:
            d["execution_count"] = None
            d["outputs"] = []
        cells.append(d)
    metadata = {}
    if nb.kernel_name:
        metadata["kernelspec"] = {"display_name": nb.kernel_name, "name": nb.kernel_name}
    return {"cells": cells, "metadata": metadata, "nbformat": 4, "nbformat_minor": 5}


def serialize(nb: Notebook) -> bytes:
    text = json.dumps(notebook_to_dict(nb), indent=1, sort_keys=True, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def validate_syntax(path, validator_command: str | None = None) -> list[str]:
    """Best-effort checks on a written notebook; problems become warnings."""
    warnings = []
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    for i, cell in enumerate(doc.get("cells", [])):
        if cell.get("cell_type") != CODE:
            continue
        for issue in balance_issues("".join(cell.get("source", []))):
            warnings.append(f"cell {i}: {issue}")
    if validator_command:
        argv = [arg.replace("{file}", str(path)) for arg in shlex.split(validator_command)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True)
        except (FileNotFoundError, PermissionError) as exc:
            warnings.append(f"validator {argv[0]!r} could not be run: {exc}")
        else:
            if proc.returncode != 0:
                output = (proc.stdout + proc.stderr).strip()
                warnings.append(f"validator exited with status {proc.returncode}: {output}")
    return warnings
