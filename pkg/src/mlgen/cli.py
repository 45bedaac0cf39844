"""mlgen command line: generate, check, inspect, eval."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .commands import eval_command, parse_command
from .contexts import build_contexts, build_contexts_from
from .errors import MlgenError
from .mapping import parse_mapping
from .model import QualifiedName, load_model, render_value
from .pipeline import GenerateOptions, Renderer, StrictModeError, check, generate

TEMPLATES_ENV = "MLGEN_TEMPLATES"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlgen", description=(
        "Generate Jupyter notebooks from SysML-lite ML task models."))
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mapping=True):
        sp.add_argument("--model", required=True, help="*.model.json file")
        if mapping:
            sp.add_argument("--mapping", required=True, help="mapping configuration JSON")
            sp.add_argument("--templates", help=f"template root (default: ${TEMPLATES_ENV})")
        sp.add_argument("--machine", help="state machine name (default: the only one)")

    g = sub.add_parser("generate", help="write a notebook")
    common(g)
    g.add_argument("--out", required=True, help="output .ipynb path")
    g.add_argument("--kernel", help="kernelspec name recorded in the notebook")
    g.add_argument("--validate-cmd", help="external validator; '{file}' is replaced by the path")
    g.add_argument("--strict", action="store_true", help="treat warnings as errors")
    g.add_argument("--report", help="also write the report as JSON to this file")

    c = sub.add_parser("check", help="report problems without generating")
    common(c)

    i = sub.add_parser("inspect", help="show blocks or block contexts")
    i.add_argument("what", choices=("blocks", "contexts"))
    common(i, mapping=False)

    e = sub.add_parser("eval", help="evaluate one model command against a block")
    e.add_argument("--model", required=True)
    e.add_argument("--block", required=True, help="qualified name, e.g. P::TrainSplit")
    e.add_argument("--command", required=True, help="model command text")
    e.add_argument("--machine")
    e.add_argument("--mapping", help="render predecessor snippets so OUTPUT resolves")
    e.add_argument("--templates")
    return p


def _templates(args, parser) -> str:
    root = args.templates or os.environ.get(TEMPLATES_ENV)
    if not root:
        parser.error(f"--templates is required when ${TEMPLATES_ENV} is not set")
    return root


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise MlgenError(f"cannot read {path}: {exc.strerror}") from None


def _inspect(args, out):
    model = load_model(_read(args.model))
    if args.what == "blocks":
        for b in model.blocks.values():
            stereo = ", ".join(a.stereotype for a in b.applied_stereotypes) or "-"
            parts = ", ".join(str(q) for q in b.parts) or "-"
            print(f"{b.qualified_name}  stereotypes=[{stereo}]  parts=[{parts}]", file=out)
        for m in model.machines:
            for s in m.ordered_states():
                print(f"state {m.name}::{s.name} order={s.order} -> {s.block}", file=out)
        return
    registry = build_contexts(model, model.machine(args.machine))
    for ctx in registry.ordered():
        print(f"[{ctx.execution_order}] {ctx.block_ref}", file=out)
        print(f"    connected: {', '.join(str(q) for q in ctx.connected) or '-'}", file=out)
        for name, value in ctx.attributes.items():
            print(f"    {name} = {render_value(value)}", file=out)
        for name, value in ctx.kwargs:
            print(f"    {name} = {render_value(value)}", file=out)
        print(f"    comments: {len(ctx.comments)}", file=out)


def _eval(args, parser, out):
    model = load_model(_read(args.model))
    target = QualifiedName.parse(args.block)
    model.block(target)
    registry = None
    if model.machines:
        registry = build_contexts(model, model.machine(args.machine))
    if registry is None or target not in registry:
        registry = build_contexts_from(model, [target])
    ast = parse_command(args.command)
    ctx = registry[target]
    if args.mapping:
        renderer = Renderer(registry, parse_mapping(_read(args.mapping)),
                            _templates(args, parser))
        renderer.render_all(upto=ctx.execution_order)
    value = eval_command(ast, ctx, registry)
    if isinstance(value, list):
        for item in value:
            print(item, file=out)
    else:
        print(value, file=out)


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            root = _templates(args, parser)
            options = GenerateOptions(args.machine, args.kernel, args.validate_cmd, args.strict)
            try:
                report = generate(load_model(_read(args.model)),
                                  parse_mapping(_read(args.mapping)), root, args.out, options)
            except StrictModeError as exc:
                report = exc.report
                failed = True
            else:
                failed = False
            sys.stderr.write(report.to_text())
            if args.report:
                Path(args.report).write_text(report.to_json(), encoding="utf-8")
            if failed:
                print("error: warnings are fatal with --strict", file=sys.stderr)
                return 1
            return 0
        if args.command == "check":
            root = _templates(args, parser)
            diags = check(load_model(_read(args.model)), parse_mapping(_read(args.mapping)),
                          root, args.machine)
            for d in diags:
                print(d, file=sys.stderr)
            return 1 if diags else 0
        if args.command == "inspect":
            _inspect(args, sys.stdout)
            return 0
        _eval(args, parser, sys.stdout)
        return 0
    except MlgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
