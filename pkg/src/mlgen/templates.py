"""Placeholder templates and snippet post-processing.

Template grammar (bit-exact)::

    ${name}               mandatory variable
    ${(name, default)}    optional variable; a double-quoted default is
                          unquoted, a bare one runs to the closing paren
    **kwargs              anchor for '**'-prefixed block attributes
"""

from __future__ import annotations

import keyword
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

from .errors import MissingVariableError, TemplateError
from .textscan import logical_lines, top_level_assignment_target

EXTENSION = ".tmpl"
KWARGS_ANCHOR = "**kwargs"
OUTPUT_DIRECTIVE = "#@output"

_NAME = re.compile(r"[^\s${}(),\"]+")
_IMPORT = re.compile(r"^(import\s+\S|from\s+\S+\s+import\b)")
_DIRECTIVE = re.compile(r"^[ \t]*#@output[ \t]+(\S+)[ \t]*$")


@dataclass(frozen=True)
class Literal:
    raw: str


@dataclass(frozen=True)
class Var:
    name: str
    raw: str


@dataclass(frozen=True)
class VarDefault:
    name: str
    default: str
    raw: str


@dataclass(frozen=True)
class KwargsAnchor:
    raw: str = KWARGS_ANCHOR


Segment = Union[Literal, Var, VarDefault, KwargsAnchor]


@dataclass(frozen=True)
class Template:
    name: str
    segments: tuple[Segment, ...]

    def source(self) -> str:
        return "".join(s.raw for s in self.segments)

    def variables(self) -> list[str]:
        names = []
        for s in self.segments:
            if isinstance(s, (Var, VarDefault)) and s.name not in names:
                names.append(s.name)
        return names

    def mandatory_variables(self) -> list[str]:
        optional = {s.name for s in self.segments if isinstance(s, VarDefault)}
        return [s.name for s in self.segments
                if isinstance(s, Var) and s.name not in optional]

    @property
    def has_anchor(self) -> bool:
        return any(isinstance(s, KwargsAnchor) for s in self.segments)


@dataclass
class Snippet:
    body: str
    imports: list[str] = field(default_factory=list)
    output_var: str | None = None
    source_block: object = None
    template: str | None = None


def _where(text, pos, name):
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return f"{name or '<template>'}:{line}:{col}"


def parse_template(text: str, name: str = "") -> Template:
    segments: list[Segment] = []
    lit_start = 0
    i = 0
    n = len(text)

    def flush(upto):
        if upto > lit_start:
            segments.append(Literal(text[lit_start:upto]))

    def fail(msg, pos):
        raise TemplateError(f"{_where(text, pos, name)}: {msg}")

    def skip_ws(j):
        while j < n and text[j] in " \t":
            j += 1
        return j

    while i < n:
        if text.startswith(KWARGS_ANCHOR, i):
            if any(isinstance(s, KwargsAnchor) for s in segments):
                fail("a template may contain only one **kwargs anchor", i)
            flush(i)
            segments.append(KwargsAnchor())
            i += len(KWARGS_ANCHOR)
            lit_start = i
            continue
        if not text.startswith("${", i):
            i += 1
            continue
        start = i
        j = skip_ws(i + 2)
        if j < n and text[j] == "(":
            m = _NAME.match(text, skip_ws(j + 1))
            if not m:
                fail("expected a variable name", j + 1)
            var = m.group()
            j = skip_ws(m.end())
            if j >= n or text[j] != ",":
                fail("expected ',' between variable name and default", j)
            j = skip_ws(j + 1)
            if j < n and text[j] == '"':
                buf = []
                j += 1
                while j < n and text[j] != '"':
                    if text[j] == "\\" and j + 1 < n:
                        j += 1
                    buf.append(text[j])
                    j += 1
                if j >= n:
                    fail("unterminated quoted default", start)
                default = "".join(buf)
                j = skip_ws(j + 1)
            else:
                k = text.find(")", j)
                if k < 0 or "\n" in text[j:k]:
                    fail("unterminated default", start)
                default = text[j:k].rstrip()
                j = k
            if j >= n or text[j] != ")":
                fail("expected ')' after default", j)
            j = skip_ws(j + 1)
            if j >= n or text[j] != "}":
                fail("expected '}'", j)
            flush(start)
            segments.append(VarDefault(var, default, text[start:j + 1]))
        else:
            m = _NAME.match(text, j)
            if not m:
                fail("expected a variable name", j)
            j = skip_ws(m.end())
            if j >= n or text[j] != "}":
                fail("expected '}'", j)
            flush(start)
            segments.append(Var(m.group(), text[start:j + 1]))
        i = j + 1
        lit_start = i
    flush(n)
    return Template(name, tuple(segments))


def template_path(root, name: str) -> Path:
    return Path(root) / (name + EXTENSION)


def load_template(root, name: str) -> Template:
    path = template_path(root, name)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise TemplateError(f"template {name!r} not found (looked for {path})") from None
    return parse_template(text, name)


def render(template: Template, bindings: Mapping[str, str],
           kwargs: Sequence[tuple[str, str]] | Mapping[str, str] = (),
           block=None) -> str:
    """Fill placeholders; kwargs render as ``name=value`` pairs at the anchor."""
    if isinstance(kwargs, Mapping):
        kwargs = list(kwargs.items())
    out = []
    for seg in template.segments:
        if isinstance(seg, Literal):
            out.append(seg.raw)
        elif isinstance(seg, Var):
            if seg.name not in bindings:
                raise MissingVariableError(seg.name, template.name,
                                           None if block is None else str(block))
            out.append(bindings[seg.name])
        elif isinstance(seg, VarDefault):
            out.append(bindings.get(seg.name, seg.default))
        else:
            out.append(", ".join(f"{k.removeprefix('**')}={v}" for k, v in kwargs))
    return "".join(out)


def extract_imports(rendered: str) -> tuple[list[str], str]:
    """Cut top-level ``import x`` / ``from x import y`` statements out of the text.

    Only statements starting in column 0 are moved; a parenthesised or
    backslash-continued import is moved as a whole.
    """
    lines = rendered.split("\n")
    imports = []
    drop = set()
    for ll in logical_lines(rendered):
        if ll.top_level and _IMPORT.match(ll.text):
            imports.append(ll.text)
            drop.update(range(ll.first, ll.last + 1))
    body = "\n".join(line for i, line in enumerate(lines) if i not in drop)
    return imports, body


def is_import_line(line: str) -> bool:
    return bool(_IMPORT.match(line))


def extract_output(rendered: str) -> tuple[str | None, str]:
    """Output variable of a snippet and the body without any directive line.

    An ``#@output name`` line wins; otherwise the target of the last
    top-level assignment is used.
    """
    lines = rendered.split("\n")
    directive = None
    kept = []
    for line in lines:
        m = _DIRECTIVE.match(line)
        if m:
            directive = m.group(1)
        else:
            kept.append(line)
    body = "\n".join(kept)
    if directive is not None:
        return directive, body
    target = None
    for ll in logical_lines(body):
        if not ll.top_level:
            continue
        lhs = top_level_assignment_target(ll.text)
        if lhs and not keyword.iskeyword(lhs.split()[0].rstrip(":")):
            target = lhs
    return target, body
