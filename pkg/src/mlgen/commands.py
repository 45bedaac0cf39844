"""Model-command navigation language.

    command   := source "." scope "." accessor index? ("." step index?)*
    source    := "THIS" | "CONNECTED" ("[" selector ("," selector)* "]")?
    selector  := "Name" "=" STRING | "Nr" "=" INT | "StereotypeName" "=" STRING
               | "AttributeValue" "=" "{" STRING ":" STRING ("," ...)* "}"
               | "OUTPUT_Name" "=" STRING
    scope     := "BLOCK" | "STEREOTYPE" "[" STRING "]"
    accessor  := "NAME" | "ATTRIBUTES" | "STEREOTYPEofATTRIBUTE" "[" STRING "]" | "OUTPUT"
    step      := "NAME" | "ATTRIBUTES" | "STEREOTYPEofATTRIBUTE" "[" STRING "]"
    index     := "[" INT "]"

Steps may only follow ATTRIBUTES or STEREOTYPEofATTRIBUTE, and NAME ends
the chain.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .errors import CommandEvalError, CommandSyntaxError
from .model import Attribute, Block, Reference, StereotypeApplication, render_value

THIS = "THIS"
CONNECTED = "CONNECTED"
BLOCK = "BLOCK"
STEREOTYPE = "STEREOTYPE"
NAME = "NAME"
ATTRIBUTES = "ATTRIBUTES"
STEREOTYPE_OF_ATTRIBUTE = "STEREOTYPEofATTRIBUTE"
OUTPUT = "OUTPUT"

SELECTOR_KEYS = ("Name", "Nr", "StereotypeName", "AttributeValue", "OUTPUT_Name")


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Selector:
    name: str | None = None
    nr: int = 0
    stereotype_name: str | None = None
    attribute_value: tuple[tuple[str, str], ...] | None = None
    output_name: str | None = None


@dataclass(frozen=True)
class Source:
    kind: str  # THIS | CONNECTED
    selector: Selector | None = None


@dataclass(frozen=True)
class Scope:
    kind: str  # BLOCK | STEREOTYPE
    stereotype: str | None = None


@dataclass(frozen=True)
class Step:
    kind: str  # NAME | ATTRIBUTES | STEREOTYPEofATTRIBUTE | OUTPUT
    argument: str | None = None
    index: int | None = None


@dataclass(frozen=True)
class CommandAst:
    source: Source
    scope: Scope
    accessor: Step
    chain: tuple[Step, ...] = ()

    @property
    def terminal_index(self) -> int | None:
        return (self.chain[-1] if self.chain else self.accessor).index


# -- lexer -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>-?\d+)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<open_string>")
  | (?P<punct>[.\[\]=,{}:])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    value: object
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise CommandSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind == "open_string":
            raise CommandSyntaxError("unterminated string", pos, text)
        if kind == "string":
            tokens.append(Token("string", re.sub(r"\\(.)", r"\1", m.group()[1:-1]), pos))
        elif kind == "int":
            tokens.append(Token("int", int(m.group()), pos))
        elif kind == "ident":
            tokens.append(Token("ident", m.group(), pos))
        elif kind == "punct":
            tokens.append(Token(m.group(), m.group(), pos))
        pos = m.end()
    tokens.append(Token("eof", None, len(text)))
    return tokens


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.tok
        raise CommandSyntaxError(msg, tok.pos, self.text)

    def take(self, kind, what=None):
        tok = self.tok
        if tok.kind != kind:
            got = "end of input" if tok.kind == "eof" else repr(tok.value)
            self.fail(f"expected {what or kind}, got {got}")
        self.i += 1
        return tok

    def at(self, kind):
        return self.tok.kind == kind

    def keyword(self, allowed, what):
        tok = self.tok
        if tok.kind != "ident":
            got = "end of input" if tok.kind == "eof" else repr(tok.value)
            self.fail(f"expected {what}, got {got}")
        if tok.value not in allowed:
            self.fail(f"unknown keyword {tok.value!r} (expected {what})")
        self.i += 1
        return tok.value

    def string_arg(self, what):
        self.take("[", f"'[' with {what}")
        value = self.take("string", f"quoted {what}").value
        self.take("]", "']'")
        return value

    def index(self):
        if self.at("["):
            self.i += 1
            tok = self.take("int", "integer index")
            if tok.value < 0:
                self.fail("index must be non-negative", tok)
            self.take("]", "']'")
            return tok.value
        return None

    def selector(self) -> Selector:
        fields = {}
        self.i += 1  # '['
        if self.at("]"):
            self.i += 1
            return Selector()
        while True:
            key_tok = self.tok
            key = self.keyword(SELECTOR_KEYS, "selector key " + "/".join(SELECTOR_KEYS))
            if key in fields:
                self.fail(f"duplicate selector key {key!r}", key_tok)
            self.take("=", "'='")
            if key == "Nr":
                tok = self.take("int", "integer")
                if tok.value < 0:
                    self.fail("Nr must be non-negative", tok)
                fields[key] = tok.value
            elif key == "AttributeValue":
                self.take("{", "'{'")
                pairs = []
                while True:
                    k = self.take("string", "quoted attribute name").value
                    self.take(":", "':'")
                    pairs.append((k, self.take("string", "quoted value").value))
                    if self.at(","):
                        self.i += 1
                        continue
                    self.take("}", "'}'")
                    break
                fields[key] = tuple(pairs)
            else:
                fields[key] = self.take("string", "quoted string").value
            if self.at(","):
                self.i += 1
                continue
            self.take("]", "']' closing the selector")
            break
        return Selector(fields.get("Name"), fields.get("Nr", 0), fields.get("StereotypeName"),
                        fields.get("AttributeValue"), fields.get("OUTPUT_Name"))

    def step(self, allowed, what) -> Step:
        kind = self.keyword(allowed, what)
        arg = self.string_arg("attribute name") if kind == STEREOTYPE_OF_ATTRIBUTE else None
        return Step(kind, arg, self.index())

    def parse(self) -> CommandAst:
        keywords = [t for t in self.tokens if t.kind == "ident" and t.value not in SELECTOR_KEYS]
        if len(keywords) < 3:
            raise CommandSyntaxError(
                f"a command needs at least three keywords, found {len(keywords)}",
                len(self.text), self.text)
        src = self.keyword((THIS, CONNECTED), "THIS or CONNECTED")
        source = Source(src)
        if src == CONNECTED:
            source = Source(src, self.selector() if self.at("[") else Selector())
        self.take(".", "'.'")
        sc = self.keyword((BLOCK, STEREOTYPE), "BLOCK or STEREOTYPE")
        scope = Scope(sc, self.string_arg("stereotype name") if sc == STEREOTYPE else None)
        self.take(".", "'.'")
        accessor = self.step((NAME, ATTRIBUTES, STEREOTYPE_OF_ATTRIBUTE, OUTPUT),
                             "NAME, ATTRIBUTES, STEREOTYPEofATTRIBUTE or OUTPUT")
        chain = []
        last = accessor
        while self.at("."):
            if last.kind in (NAME, OUTPUT):
                self.fail(f"nothing may follow {last.kind}")
            self.i += 1
            last = self.step((NAME, ATTRIBUTES, STEREOTYPE_OF_ATTRIBUTE),
                             "NAME, ATTRIBUTES or STEREOTYPEofATTRIBUTE")
            chain.append(last)
        if not self.at("eof"):
            self.fail(f"unexpected {self.tok.value!r}")
        return CommandAst(source, scope, accessor, tuple(chain))


def parse_command(text: str) -> CommandAst:
    return _Parser(text).parse()


# -- canonical text ----------------------------------------------------------

def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _fmt_step(step: Step) -> str:
    out = step.kind
    if step.argument is not None:
        out += f"[{_quote(step.argument)}]"
    if step.index is not None:
        out += f"[{step.index}]"
    return out


def format_command(ast: CommandAst) -> str:
    parts = []
    if ast.source.kind == THIS:
        parts.append(THIS)
    else:
        sel = ast.source.selector or Selector()
        args = []
        if sel.name is not None:
            args.append(f"Name={_quote(sel.name)}")
        if sel.nr:
            args.append(f"Nr={sel.nr}")
        if sel.stereotype_name is not None:
            args.append(f"StereotypeName={_quote(sel.stereotype_name)}")
        if sel.attribute_value is not None:
            inner = ", ".join(f"{_quote(k)}: {_quote(v)}" for k, v in sel.attribute_value)
            args.append(f"AttributeValue={{{inner}}}")
        if sel.output_name is not None:
            args.append(f"OUTPUT_Name={_quote(sel.output_name)}")
        parts.append(f"{CONNECTED}[{', '.join(args)}]" if args else CONNECTED)
    if ast.scope.kind == BLOCK:
        parts.append(BLOCK)
    else:
        parts.append(f"{STEREOTYPE}[{_quote(ast.scope.stereotype)}]")
    parts.append(_fmt_step(ast.accessor))
    parts.extend(_fmt_step(s) for s in ast.chain)
    return ".".join(parts)


# -- evaluation --------------------------------------------------------------

CommandValue = Union[str, list]


@dataclass(frozen=True)
class _AttrNode:
    name: str
    value: object  # AttributeValue
    stereotypes: tuple[StereotypeApplication, ...] = ()
    owner: str = ""


@dataclass(frozen=True)
class _StereoNode:
    """A stereotype applied to a block or an attribute, with its values."""
    name: str
    values: tuple = field(default_factory=tuple)  # ((prop, value), ...)
    owner: str = ""


def _stereo_node(model, app: StereotypeApplication, owner) -> _StereoNode:
    values = []
    for prop, pdef in model.property_defs(app.stereotype).items():
        value = app.values.get(prop, pdef.default)
        if value is not None:
            values.append((prop, value))
    return _StereoNode(app.stereotype, tuple(values), owner)


def connected_candidates(selector: Selector, current, registry) -> list:
    """Connected contexts of ``current`` passing every given filter, in order."""
    model = registry.model
    out = []
    for qn in current.connected:
        ctx = registry[qn]
        block = model.blocks[qn]
        if selector.name is not None and block.name != selector.name:
            continue
        if selector.stereotype_name is not None and not any(
                model.is_a(a.stereotype, selector.stereotype_name)
                for a in block.applied_stereotypes):
            continue
        if selector.attribute_value is not None and not all(
                k in ctx.attributes and _text(model, ctx.attributes[k]) == v
                for k, v in selector.attribute_value):
            continue
        if selector.output_name is not None and (
                ctx.snippet is None or ctx.snippet.output_var != selector.output_name):
            continue
        out.append(ctx)
    return out


def _text(model, value) -> str:
    if isinstance(value, Reference):
        target = model.blocks.get(value.target)
        if target is None:
            raise CommandEvalError(f"dangling reference {value.target}")
        return target.name
    return render_value(value)


def _pick(value, index, what):
    if index is None:
        return value
    if not isinstance(value, list):
        raise CommandEvalError(f"{what} is not a list; cannot select [{index}]")
    if index >= len(value):
        raise CommandEvalError(f"index [{index}] out of range for {what} "
                               f"(length {len(value)})")
    return value[index]


class _Evaluator:
    def __init__(self, registry):
        self.registry = registry
        self.model = registry.model

    def name_of(self, node):
        if isinstance(node, Block):
            return node.name
        if isinstance(node, (_StereoNode, _AttrNode)):
            return node.name
        raise CommandEvalError("NAME needs a block, stereotype or attribute")

    def attributes_of(self, node):
        if isinstance(node, list):
            raise CommandEvalError("ATTRIBUTES applied to an unindexed list; select with [n]")
        if isinstance(node, Block):
            return [_AttrNode(a.name, a.value, a.stereotypes, str(node.qualified_name))
                    for a in node.attributes if not a.is_kwarg]
        if isinstance(node, _StereoNode):
            return [_AttrNode(k, v, (), node.owner) for k, v in node.values]
        if isinstance(node, _AttrNode):
            if isinstance(node.value, Reference):
                return self.attributes_of(self.model.block(node.value.target))
            raise CommandEvalError(
                f"attribute {node.name!r} of {node.owner} holds a primitive; "
                "ATTRIBUTES needs a block reference")
        raise CommandEvalError("ATTRIBUTES is not applicable here")

    def stereotype_of_attribute(self, node, attr_name):
        if isinstance(node, list):
            raise CommandEvalError(
                "STEREOTYPEofATTRIBUTE applied to an unindexed list; select with [n]")
        if isinstance(node, _AttrNode) and isinstance(node.value, Reference):
            node = self.model.block(node.value.target)
        if not isinstance(node, Block):
            raise CommandEvalError(
                f"STEREOTYPEofATTRIBUTE[{attr_name!r}] needs a block's attributes")
        attr: Attribute | None = node.attribute(attr_name)
        if attr is None or attr.is_kwarg:
            raise CommandEvalError(f"block {node.qualified_name} has no attribute {attr_name!r}")
        owner = f"{node.qualified_name}.{attr_name}"
        found = [_stereo_node(self.model, app, owner) for app in attr.stereotypes]
        if not found:
            raise CommandEvalError(f"attribute {owner} has no data stereotype")
        return found[0] if len(found) == 1 else found

    def apply(self, node, step: Step, block: Block):
        if step.kind == NAME:
            value = self.name_of(node)
        elif step.kind == ATTRIBUTES:
            value = self.attributes_of(node)
        elif step.kind == STEREOTYPE_OF_ATTRIBUTE:
            value = self.stereotype_of_attribute(node, step.argument)
        else:  # OUTPUT
            ctx = self.registry[block.qualified_name]
            if ctx.snippet is None:
                raise CommandEvalError(
                    f"OUTPUT of {block.qualified_name} requested before its snippet "
                    "was rendered (forward reference)")
            if ctx.snippet.output_var is None:
                raise CommandEvalError(f"snippet of {block.qualified_name} declares no output")
            value = ctx.snippet.output_var
        return _pick(value, step.index, step.kind)

    def materialize(self, node) -> CommandValue:
        if isinstance(node, list):
            return [self.materialize(n) for n in node]
        if isinstance(node, str):
            return node
        if isinstance(node, _AttrNode):
            return _text(self.model, node.value)
        return self.name_of(node)

    def run(self, ast: CommandAst, current) -> CommandValue:
        if ast.source.kind == THIS:
            target = current
        else:
            sel = ast.source.selector or Selector()
            cands = connected_candidates(sel, current, self.registry)
            if not cands:
                raise CommandEvalError(
                    f"{format_command(ast)}: no connected block of {current.block_ref} "
                    "matches the selector")
            if sel.nr >= len(cands):
                raise CommandEvalError(
                    f"{format_command(ast)}: Nr={sel.nr} out of range "
                    f"({len(cands)} matching blocks)")
            target = cands[sel.nr]
        block = self.model.blocks[target.block_ref]
        if ast.scope.kind == BLOCK:
            node = block
        else:
            app = block.application(ast.scope.stereotype)
            if app is None:
                raise CommandEvalError(
                    f"stereotype {ast.scope.stereotype!r} is not applied to {block.qualified_name}")
            node = _stereo_node(self.model, app, str(block.qualified_name))
        node = self.apply(node, ast.accessor, block)
        for step in ast.chain:
            node = self.apply(node, step, block)
        return self.materialize(node)


def eval_command(ast: CommandAst | str, current, registry) -> CommandValue:
    """Evaluate against ``current`` (a BlockContext) within ``registry``."""
    if isinstance(ast, str):
        ast = parse_command(ast)
    return _Evaluator(registry).run(ast, current)


def as_text(value: CommandValue, command: str = "") -> str:
    if isinstance(value, list):
        raise CommandEvalError(
            f"{command or 'command'} yields a list of {len(value)} values; "
            "select one with [n]")
    return value
