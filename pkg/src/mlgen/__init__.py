"""Template-driven generation of Jupyter notebooks from SysML-lite ML models."""

from .commands import eval_command, format_command, parse_command
from .contexts import BlockContext, ContextRegistry, build_contexts, resolve_attribute
from .errors import MlgenError
from .mapping import MappingConfig, MappingEntry, parse_mapping, select_mapping
from .model import Model, QualifiedName, dump_model, load_model
from .notebook import Cell, Notebook, compose, serialize, validate_syntax
from .pipeline import GenerateOptions, GenerationReport, check, generate
from .templates import (extract_imports, extract_output, load_template, parse_template,
                        render)

__all__ = [
    "BlockContext", "Cell", "ContextRegistry", "GenerateOptions", "GenerationReport",
    "MappingConfig", "MappingEntry", "MlgenError", "Model", "Notebook", "QualifiedName",
    "build_contexts", "check", "compose", "dump_model", "eval_command", "extract_imports",
    "extract_output", "format_command", "generate", "load_model", "load_template",
    "parse_command", "parse_mapping", "parse_template", "render", "resolve_attribute",
    "select_mapping", "serialize", "validate_syntax",
]
