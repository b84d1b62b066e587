"""Command line front end.

    umlpp new FILE                     create an empty project document
    umlpp check FILE [--json]          evaluate everything, print the report
    umlpp eval FILE --context OBJ EXPR evaluate an expression, read-only
    umlpp invoke FILE --object OBJ --op NAME [--arg k=v ...]
    umlpp serve FILE [--port N] [--ui-dir DIR] [--no-autosave]

Exit codes: 0 clean, 1 violations present, 2 load/parse error, 3 usage error.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date
from pathlib import Path

from umlpp import document, engine
from umlpp.errors import (
    ArityMismatch,
    LoadError,
    ModelError,
    ParseError,
    TypeCheckError,
    UnknownFeature,
)
from umlpp.lang.evaluate import evaluate, is_undefined
from umlpp.lang.parser import parse as parse_expr
from umlpp.lang.typecheck import typecheck
from umlpp.model import Project
from umlpp.values import EnumValue, Money, ObjectRef

EXIT_CLEAN = 0
EXIT_VIOLATIONS = 1
EXIT_LOAD_ERROR = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="umlpp", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_new = sub.add_parser("new", help="write an empty project document")
    p_new.add_argument("file")

    p_check = sub.add_parser("check", help="load and report all findings")
    p_check.add_argument("file")
    p_check.add_argument("--json", action="store_true")

    p_eval = sub.add_parser("eval", help="evaluate an expression")
    p_eval.add_argument("file")
    p_eval.add_argument("--context", required=True,
                        help="object name bound to self")
    p_eval.add_argument("expr")

    p_invoke = sub.add_parser("invoke", help="run an operation")
    p_invoke.add_argument("file")
    p_invoke.add_argument("--object", required=True, dest="object_name")
    p_invoke.add_argument("--op", required=True)
    p_invoke.add_argument("--arg", action="append", default=[],
                          metavar="NAME=VALUE")

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    p_serve.add_argument("file")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui-dir", default=None)
    p_serve.add_argument("--no-autosave", action="store_true")
    return parser


def _load(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise LoadError("syntax", "", f"cannot read {path}: {exc}")
    return document.load(data)


def render_value(value, project: Project) -> str:
    """Human-facing rendering: strings verbatim, money as '12.50 EUR',
    objects by name, collections bracketed."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (int, str)):
        return str(value)
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, Money):
        return str(value)
    if isinstance(value, EnumValue):
        enum = project.enumerations.get(value.enumeration)
        return f"{enum.name if enum else value.enumeration}::{value.literal}"
    if isinstance(value, ObjectRef):
        obj = project.objects.get(value.object_id)
        return obj.name if obj else value.object_id
    if isinstance(value, tuple):
        return "[" + ", ".join(render_value(v, project) for v in value) + "]"
    return str(value)


def cmd_new(args) -> int:
    path = Path(args.file)
    if path.exists():
        print(f"refusing to overwrite existing file {path}", file=sys.stderr)
        return EXIT_USAGE
    name = path.name
    for suffix in (".umlpp.json", ".json"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    project = Project(name or "untitled")
    path.write_bytes(document.save(project, []))
    return EXIT_CLEAN


def cmd_check(args) -> int:
    project, _layouts = _load(args.file)
    engine.recompute_derived(project)
    report, monitors = engine.full_report(project)
    if args.json:
        sys.stdout.buffer.write(document.export_report(report, "json"))
    else:
        sys.stdout.buffer.write(
            document.export_report(report, "text", project=project))
    return EXIT_VIOLATIONS if report.entries else EXIT_CLEAN


def cmd_eval(args) -> int:
    project, _layouts = _load(args.file)
    obj = project.object_by_name(args.context)
    if obj is None:
        print(f"unknown context object {args.context!r}", file=sys.stderr)
        return EXIT_USAGE
    tree = parse_expr(args.expr)
    typecheck(tree, project, obj.class_id)
    result = evaluate(tree, engine.make_context(project, obj.id))
    if is_undefined(result):
        print(f"undefined: {result.reason}")
    else:
        print(render_value(result, project))
    return EXIT_CLEAN


def _parse_arg_value(project: Project, text: str):
    """Argument literals use expression syntax; a bare name may also be an
    object name."""
    obj = project.object_by_name(text)
    if obj is not None:
        return ObjectRef(obj.id)
    tree = parse_expr(text)
    ctx = engine.make_context(project, None)
    result = evaluate(tree, ctx)
    if is_undefined(result):
        raise UsageError(f"cannot evaluate argument {text!r}: {result.reason}")
    return result


def cmd_invoke(args) -> int:
    project, _layouts = _load(args.file)
    obj = project.object_by_name(args.object_name)
    if obj is None:
        print(f"unknown object {args.object_name!r}", file=sys.stderr)
        return EXIT_USAGE
    resolution = engine.resolve_feature(project, obj.id, args.op, "operation")
    if not resolution.found:
        print(f"'{args.object_name}' has no operation {args.op!r}",
              file=sys.stderr)
        return EXIT_USAGE
    owner = project.require_class(resolution.owner)
    op = next(o for o in owner.operations if o.name == args.op)
    given: dict[str, object] = {}
    for raw in args.arg:
        if "=" not in raw:
            raise UsageError(f"--arg needs NAME=VALUE, got {raw!r}")
        key, _, value_text = raw.partition("=")
        try:
            given[key] = _parse_arg_value(project, value_text)
        except (ParseError, TypeCheckError) as exc:
            raise UsageError(f"bad value for {key!r}: {exc.message}")
    expected = [p.name for p in op.params]
    if sorted(given) != sorted(expected):
        print(f"{args.op}() expects argument(s): "
              f"{', '.join(expected) if expected else '(none)'}",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        result = engine.invoke(project, obj.id, args.op,
                               [given[name] for name in expected])
    except (ArityMismatch, UnknownFeature, ModelError) as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_USAGE
    if is_undefined(result):
        print(f"undefined: {result.reason}")
    else:
        print(render_value(result, project))
    return EXIT_CLEAN


def cmd_serve(args) -> int:
    from umlpp.service import serve
    from umlpp.workspace import Workspace

    ws = Workspace.open(args.file, autosave=not args.no_autosave)
    try:
        serve(ws, port=args.port, ui_dir=args.ui_dir, host=args.host)
    except OSError as exc:
        print(f"cannot bind port {args.port}: {exc}", file=sys.stderr)
        return EXIT_LOAD_ERROR
    return EXIT_CLEAN


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "new":
            return cmd_new(args)
        if args.command == "check":
            return cmd_check(args)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "invoke":
            return cmd_invoke(args)
        if args.command == "serve":
            return cmd_serve(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LoadError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_LOAD_ERROR
    except (ParseError, TypeCheckError) as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_LOAD_ERROR
    except ModelError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_LOAD_ERROR
    return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
