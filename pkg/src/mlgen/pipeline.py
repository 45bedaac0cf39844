"""End-to-end generation: contexts -> mapping -> template -> bindings -> notebook."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .commands import as_text, eval_command, parse_command
from .contexts import BlockContext, ContextRegistry, build_contexts, materialize
from .errors import (CommandSyntaxError, GenerationError, MappingError, MissingVariableError,
                     MlgenError)
from .mapping import BY_NAME, MappingConfig, Selection, select_mapping
from .model import Model
from .notebook import compose, serialize, validate_syntax
from .templates import Snippet, Template, extract_imports, extract_output, load_template, render

@dataclass
class GenerateOptions:
    machine: str | None = None
    kernel: str | None = None
    validate_cmd: str | None = None
    strict: bool = False


@dataclass
class BlockReport:
    qualified_name: str
    template: str
    provenance: str


@dataclass
class GenerationReport:
    output: str
    contexts_processed: int = 0
    cells_emitted: int = 0
    warnings: list[str] = field(default_factory=list)
    per_block: list[BlockReport] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"wrote {self.output}: {self.contexts_processed} contexts, "
                 f"{self.cells_emitted} cells, {len(self.warnings)} warnings"]
        for i, b in enumerate(self.per_block):
            lines.append(f"  [{i}] {b.qualified_name}  template={b.template}  ({b.provenance})")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines) + "\n"


class StrictModeError(GenerationError):
    def __init__(self, report: GenerationReport):
        self.report = report
        super().__init__(f"{len(report.warnings)} warning(s) in strict mode")


class Renderer:
    """Renders contexts one by one; templates are cached per name."""

    def __init__(self, registry: ContextRegistry, config: MappingConfig, template_root):
        self.registry = registry
        self.model = registry.model
        self.config = config
        self.template_root = template_root
        self._templates: dict[str, Template] = {}
        self.warnings: list[str] = []
        self.selections: dict = {}

    def template(self, name: str) -> Template:
        if name not in self._templates:
            self._templates[name] = load_template(self.template_root, name)
        return self._templates[name]

    def property_value(self, ctx: BlockContext, sel: Selection, prop: str):
        """Raw value for a mapped property, or None if it stays unbound."""
        block = self.model.blocks[ctx.block_ref]
        if sel.provenance == BY_NAME:
            if prop in ctx.attributes:
                return ctx.attributes[prop]
            known = any(prop in self.model.property_defs(a.stereotype)
                        for a in block.applied_stereotypes)
            if not known:
                raise GenerationError(
                    f"nameMappings.{sel.key}: block has no attribute or stereotype "
                    f"property {prop!r}", ctx.block_ref)
            return None
        props = self.model.effective_properties(block, sel.applied)
        if prop not in props:
            raise GenerationError(
                f"stereotypeMappings.{sel.key}: stereotype {sel.applied!r} has no "
                f"property {prop!r}", ctx.block_ref)
        pdef, value = props[prop]
        return pdef.default if value is None else value

    def bindings(self, ctx: BlockContext, sel: Selection) -> dict[str, str]:
        bound: dict[str, str] = {}
        for prop, var in sel.entry.properties.items():
            value = self.property_value(ctx, sel, prop)
            if value is not None:
                bound[var] = materialize(value, self.registry, ctx)
        for command, var in sel.entry.model_commands.items():
            bound[var] = as_text(eval_command(parse_command(command), ctx, self.registry), command)
        for var, value in self.config.constants.items():
            bound.setdefault(var, value)
        return bound

    def render_context(self, ctx: BlockContext) -> Snippet:
        block = self.model.blocks[ctx.block_ref]
        try:
            missing = self.model.missing_mandatory(block)
            if missing:
                desc = ", ".join(f"{s}.{p}" for s, p in missing)
                raise GenerationError(f"mandatory properties unassigned: {desc}", ctx.block_ref)
            sel = select_mapping(self.config, self.model, block)
            self.selections[ctx.block_ref] = sel
            tmpl = self.template(sel.entry.template)
            kwargs = [(k, materialize(v, self.registry, ctx)) for k, v in ctx.kwargs]
            if kwargs and not tmpl.has_anchor:
                self.warnings.append(
                    f"{ctx.block_ref}: template {tmpl.name!r} has no **kwargs anchor; "
                    f"ignored {', '.join(k for k, _ in kwargs)}")
            text = render(tmpl, self.bindings(ctx, sel), kwargs, block=ctx.block_ref)
        except (GenerationError, MissingVariableError):
            raise
        except MlgenError as exc:
            raise GenerationError(str(exc), ctx.block_ref) from exc
        output, text = extract_output(text)
        imports, body = extract_imports(text)
        snippet = Snippet(body, imports, output, ctx.block_ref, tmpl.name)
        ctx.snippet = snippet
        return snippet

    def render_all(self, upto: int | None = None):
        for ctx in self.registry.ordered():
            if upto is not None and ctx.execution_order >= upto:
                break
            self.render_context(ctx)


def generate(model: Model, mapping: MappingConfig, template_root, out,
             options: GenerateOptions | None = None) -> GenerationReport:
    options = options or GenerateOptions()
    machine = model.machine(options.machine)
    registry = build_contexts(model, machine)
    renderer = Renderer(registry, mapping, template_root)
    renderer.render_all()
    nb = compose(registry, mapping, options.kernel)
    out = Path(out)
    out.write_bytes(serialize(nb))
    warnings = renderer.warnings + validate_syntax(out, options.validate_cmd)
    report = GenerationReport(
        str(out), len(registry), len(nb.cells), warnings,
        [BlockReport(str(c.block_ref), c.snippet.template,
                     renderer.selections[c.block_ref].provenance)
         for c in registry.ordered()])
    if options.strict and warnings:
        raise StrictModeError(report)
    return report


def _entry_diagnostics(model: Model, config: MappingConfig, template_root, templates):
    diags = []
    for section, key, entry in config.entries():
        where = f"{section}.{key}"
        if section == "stereotypeMappings" and key not in model.stereotypes:
            diags.append(f"{where}: stereotype {key!r} is not defined in the model")
        for command in entry.model_commands:
            try:
                parse_command(command)
            except CommandSyntaxError as exc:
                diags.append(f"{where}: bad model command {command!r}: {exc}")
        try:
            if entry.template not in templates:
                templates[entry.template] = load_template(template_root, entry.template)
            tmpl = templates[entry.template]
        except MlgenError as exc:
            diags.append(f"{where}: {exc}")
            continue
        used = set(tmpl.variables())
        for var in entry.targets():
            if var not in used:
                diags.append(f"{where}: variable {var!r} does not occur in template "
                             f"{entry.template!r}")
    return diags


def check(model: Model, mapping: MappingConfig, template_root,
          machine: str | None = None) -> list[str]:
    """Static diagnostics; an empty list means ``generate`` will not fail."""
    templates: dict[str, Template] = {}
    diags = _entry_diagnostics(model, mapping, template_root, templates)
    try:
        machines = [model.machine(machine)] if machine else list(model.machines)
    except MlgenError as exc:
        return diags + [str(exc)]
    if not machines:
        diags.append("model has no state machine")
    for m in machines:
        registry = build_contexts(model, m)
        for ctx in registry.ordered():
            block = model.blocks[ctx.block_ref]
            qn = ctx.block_ref
            for st, prop in model.missing_mandatory(block):
                diags.append(f"block {qn}: stereotype {st!r}: mandatory property "
                             f"{prop!r} is unassigned")
            try:
                sel = select_mapping(mapping, model, block)
            except MappingError as exc:
                diags.append(str(exc))
                continue
            tmpl = templates.get(sel.entry.template)
            if tmpl is None:
                continue
            renderer = Renderer(registry, mapping, template_root)
            bound = set(mapping.constants) | set(sel.entry.model_commands.values())
            for prop, var in sel.entry.properties.items():
                try:
                    if renderer.property_value(ctx, sel, prop) is not None:
                        bound.add(var)
                except GenerationError as exc:
                    diags.append(str(exc))
            for var in tmpl.mandatory_variables():
                if var not in bound:
                    diags.append(f"block {qn}: template {tmpl.name!r} variable {var!r} "
                                 "has no value")
    if diags:
        return diags
    # a dry run catches what static inspection cannot (command evaluation)
    for m in machines:
        try:
            Renderer(build_contexts(model, m), mapping, template_root).render_all()
        except MlgenError as exc:
            diags.append(str(exc))
    return diags
