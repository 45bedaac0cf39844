"""Block contexts: the intermediate model between the SysML-lite model and code."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import GenerationError, ModelError
from .model import AttributeValue, Model, QualifiedName, Reference, StateMachine, render_value
from .templates import Snippet


@dataclass
class BlockContext:
    block_ref: QualifiedName
    comments: tuple[str, ...]
    connected: tuple[QualifiedName, ...]
    # own attributes and stereotype property values; values stay unresolved
    attributes: dict[str, AttributeValue]
    execution_order: int
    kwargs: tuple[tuple[str, AttributeValue], ...] = ()
    snippet: Snippet | None = None

    @property
    def name(self) -> str:
        return self.block_ref.name


class ContextRegistry:
    """Insertion-ordered map of qualified name to context; one per block."""

    def __init__(self, model: Model):
        self.model = model
        self._contexts: dict[QualifiedName, BlockContext] = {}

    def __getitem__(self, qn: QualifiedName | str) -> BlockContext:
        if isinstance(qn, str):
            qn = QualifiedName.parse(qn)
        try:
            return self._contexts[qn]
        except KeyError:
            raise GenerationError(f"no context for block {qn}") from None

    def __contains__(self, qn) -> bool:
        if isinstance(qn, str):
            qn = QualifiedName.parse(qn)
        return qn in self._contexts

    def __iter__(self) -> Iterator[BlockContext]:
        return iter(self._contexts.values())

    def __len__(self):
        return len(self._contexts)

    def add(self, ctx: BlockContext):
        if ctx.block_ref in self._contexts:
            raise GenerationError(f"duplicate context for {ctx.block_ref}")
        self._contexts[ctx.block_ref] = ctx

    def ordered(self) -> list[BlockContext]:
        return sorted(self._contexts.values(), key=lambda c: c.execution_order)


def _context(model: Model, qn: QualifiedName, order: int) -> BlockContext:
    block = model.blocks[qn]
    attrs: dict[str, AttributeValue] = {}
    # stereotype property values shadow same-named own attributes
    for app in block.applied_stereotypes:
        for prop, (pdef, value) in model.effective_properties(block, app.stereotype).items():
            if value is None:
                value = pdef.default
            if value is not None and prop not in attrs:
                attrs[prop] = value
    for attr in block.attributes:
        if not attr.is_kwarg and attr.name not in attrs:
            attrs[attr.name] = attr.value
    kwargs = tuple((a.name, a.value) for a in block.attributes if a.is_kwarg)
    return BlockContext(qn, block.comments, block.parts, attrs, order, kwargs)


def build_contexts_from(model: Model, roots: Iterable[QualifiedName]) -> ContextRegistry:
    """Contexts for ``roots`` and everything they are composed of, inputs first."""
    registry = ContextRegistry(model)
    on_path: list[QualifiedName] = []

    def visit(qn):
        if qn in registry:
            return
        if qn in on_path:
            cyc = on_path[on_path.index(qn):] + [qn]
            raise ModelError("part-of cycle: " + " -> ".join(map(str, cyc)))
        if qn not in model.blocks:
            raise ModelError(f"unresolved block {qn}")
        on_path.append(qn)
        for part in model.blocks[qn].parts:
            visit(part)
        on_path.pop()
        registry.add(_context(model, qn, len(registry)))

    for root in roots:
        visit(root)
    return registry


def build_contexts(model: Model, machine: StateMachine) -> ContextRegistry:
    return build_contexts_from(model, (s.block for s in machine.ordered_states()))


def resolve_attribute(context: BlockContext, name: str, registry: ContextRegistry) -> str:
    """Text value of an attribute; references become the referenced block's name."""
    if name not in context.attributes:
        raise GenerationError(f"block {context.block_ref} has no attribute {name!r}",
                              context.block_ref)
    return materialize(context.attributes[name], registry, context)


def materialize(value: AttributeValue, registry: ContextRegistry, context=None) -> str:
    if isinstance(value, Reference):
        target = registry.model.blocks.get(value.target)
        if target is None:
            raise GenerationError(f"dangling reference {value.target}",
                                  None if context is None else context.block_ref)
        return target.name
    return render_value(value)
