"""HTTP/JSON service driving the live model.

Every mutating call answers with the fresh violation report and monitor
snapshot piggybacked on the result, so a client can keep its banner current
without a second round trip. All mutations funnel through the workspace's
single-writer lock; GET endpoints never change the revision.

Error bodies are ``{"error": {"code", "message", "path"}}`` with codes equal
to the kernel error names. 404 unknown ids, 409 name/link conflicts, 422
validation and type errors.
"""

from __future__ import annotations

import json

from starlette.applications import Starlette
from starlette.requests import Request
from starlette.responses import JSONResponse, Response
from starlette.routing import Route

from umlpp import document, engine, kernel
from umlpp.errors import (
    DuplicateLink,
    LoadError,
    ModelError,
    NameTaken,
    UnknownElement,
    UnknownFeature,
)
from umlpp.kernel import CLEAR, MigrationSummary, RenameSummary
from umlpp.lang.parser import parse as parse_expr
from umlpp.lang.typecheck import typecheck
from umlpp.model import Multiplicity, Project, TypeRef
from umlpp.workspace import Workspace

NOT_FOUND = (UnknownElement, UnknownFeature)
CONFLICT = (NameTaken, DuplicateLink)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


def _error_response(request: Request, status: int, code: str, message: str):
    return JSONResponse(
        {"error": {"code": code, "message": message,
                   "path": request.url.path}},
        status_code=status)


def _status_for(exc: ModelError) -> int:
    if isinstance(exc, NOT_FOUND):
        return 404
    if isinstance(exc, CONFLICT):
        return 409
    return 422


async def _body(request: Request) -> dict:
    try:
        data = json.loads(await request.body() or b"{}")
    except json.JSONDecodeError as exc:
        raise ApiError(422, "BadRequest", f"invalid JSON body: {exc}")
    if not isinstance(data, dict):
        raise ApiError(422, "BadRequest", "request body must be a JSON object")
    return data


def _require(body: dict, key: str):
    if key not in body:
        raise ApiError(422, "BadRequest", f"missing field {key!r}")
    return body[key]


def _typeref(ws: Workspace, data) -> TypeRef:
    """Accepts the document encoding or a bare name (data type, enumeration
    or class)."""
    if isinstance(data, str):
        def resolve(project: Project):
            from umlpp.model import BUILTIN_DATATYPES
            if data in BUILTIN_DATATYPES:
                return TypeRef.datatype(data)
            enum = project.enum_by_name(data)
            if enum is not None:
                return TypeRef.enumeration(enum.id)
            cls = project.class_by_name(data)
            if cls is not None:
                return TypeRef.to_class(cls.id)
            raise ApiError(422, "BadRequest", f"unknown type {data!r}")
        return ws.read(resolve)
    try:
        return document._typeref_from_json(data, "/type")
    except LoadError as exc:
        raise ApiError(422, "BadRequest", exc.message)


def _value(data):
    try:
        return document.value_from_json(data, "/value")
    except LoadError as exc:
        raise ApiError(422, "TypeMismatch", exc.message)


def _multiplicity(text) -> Multiplicity:
    try:
        return document._mult_from_str(text, "/multiplicity")
    except LoadError as exc:
        raise ApiError(422, "BadMultiplicity", exc.message)


# -- summaries to JSON -------------------------------------------------------

def _migration_json(m: MigrationSummary) -> dict:
    return {"touchedObjects": m.touched_objects, "addedSlots": m.added_slots,
            "removedSlots": m.removed_slots,
            "cleared": [list(x) for x in m.cleared],
            "coerced": [list(x) for x in m.coerced],
            "unbound": [list(x) for x in m.unbound],
            "removedLinks": list(m.removed_links),
            "rewritten": [{"host": r.host, "field": r.field,
                           "source": r.source} for r in m.rewritten]}


def _rename_json(r: RenameSummary) -> dict:
    return {"element": r.element, "oldName": r.old_name, "newName": r.new_name,
            "rewritten": [{"host": s.host, "field": s.field,
                           "source": s.source} for s in r.rewritten]}


def create_app(ws: Workspace) -> Starlette:
    def mutation_response(result, revision, report, monitors):
        return JSONResponse({
            "result": result,
            "revision": revision,
            "report": document.report_to_json(report),
            "monitors": document.monitors_to_json(monitors),
        })

    def run_mutation(fn, op: str = ""):
        result, revision, report, monitors = ws.mutate(fn, op=op)
        return mutation_response(result, revision, report, monitors)

    # -- reads ---------------------------------------------------------------

    def get_project(request: Request):
        return JSONResponse(ws.read(
            lambda p: document.document_dict(p, ws.layouts)))

    def get_palette(request: Request):
        return JSONResponse(ws.read(
            lambda p: [{"id": cid, "name": name}
                       for cid, name in kernel.palette(p)]))

    def get_report(request: Request):
        with ws.lock:
            return JSONResponse({
                "revision": ws.revision,
                "report": document.report_to_json(ws.report),
                "monitors": document.monitors_to_json(ws.monitors),
            })

    # -- classes -------------------------------------------------------------

    async def post_classes(request: Request):
        body = await _body(request)
        name = _require(body, "name")

        def fn(p: Project):
            cls = kernel.create_class(p, name,
                                      abstract=bool(body.get("abstract", False)),
                                      superclass=body.get("superclass"))
            return document._class_to_json(cls)
        return run_mutation(fn, "create_class")

    async def patch_class(request: Request):
        cid = request.path_params["cid"]
        body = await _body(request)

        def fn(p: Project):
            cls = p.require_class(cid)
            out = {}
            if "name" in body:
                out["renamed"] = _rename_json(
                    kernel.rename_element(p, cid, body["name"]))
            if "abstract" in body:
                kernel.set_abstract(p, cid, bool(body["abstract"]))
            if "superclass" in body:
                out["migration"] = _migration_json(
                    kernel.set_generalization(p, cid, body["superclass"]))
            out["class"] = document._class_to_json(cls)
            return out
        return run_mutation(fn, "update_class")

    async def delete_class(request: Request):
        cid = request.path_params["cid"]

        def fn(p: Project):
            kernel.remove_class(p, cid)
            return {"deleted": cid}
        return run_mutation(fn, "remove_class")

    # -- class features ------------------------------------------------------

    def _owned_feature(p: Project, cid: str, fid: str, kind: str):
        hit = p.find_feature(fid)
        if hit is None or hit[2] != kind or hit[0].id != cid:
            raise UnknownElement(f"class has no {kind} with id {fid!r}")
        return hit[1]

    async def post_attributes(request: Request):
        cid = request.path_params["cid"]
        body = await _body(request)
        name = _require(body, "name")
        tref = _typeref(ws, _require(body, "type"))

        def fn(p: Project):
            attr, migration = kernel.add_attribute(
                p, cid, name, tref, derived=bool(body.get("derived", False)),
                derivation=body.get("derivation"))
            return {"attribute": document._attribute_to_json(attr),
                    "migration": _migration_json(migration)}
        return run_mutation(fn, "add_attribute")

    async def patch_attribute(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]
        body = await _body(request)
        tref = _typeref(ws, body["type"]) if "type" in body else None

        def fn(p: Project):
            attr = _owned_feature(p, cid, fid, "attribute")
            summaries = []
            if "name" in body:
                summaries.append(kernel.update_attribute(p, fid,
                                                         rename=body["name"]))
            if tref is not None:
                summaries.append(kernel.update_attribute(p, fid, retype=tref))
            if "derived" in body:
                derivation = body.get("derivation")
                summaries.append(kernel.update_attribute(
                    p, fid, set_derived=(bool(body["derived"]), derivation)))
            merged = MigrationSummary()
            for s in summaries:
                merged.touched_objects += s.touched_objects
                merged.cleared.extend(s.cleared)
                merged.coerced.extend(s.coerced)
                merged.rewritten.extend(s.rewritten)
            return {"attribute": document._attribute_to_json(attr),
                    "migration": _migration_json(merged)}
        return run_mutation(fn, "update_attribute")

    async def delete_attribute(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]

        def fn(p: Project):
            _owned_feature(p, cid, fid, "attribute")
            migration = kernel.remove_attribute(p, fid)
            return {"deleted": fid, "migration": _migration_json(migration)}
        return run_mutation(fn, "remove_attribute")

    async def post_operations(request: Request):
        cid = request.path_params["cid"]
        body = await _body(request)
        name = _require(body, "name")
        params = [(p["name"], _typeref(ws, p["type"]))
                  for p in body.get("params", [])]
        return_type = _typeref(ws, _require(body, "returnType"))

        def fn(p: Project):
            op = kernel.add_operation(
                p, cid, name, params, return_type, _require(body, "body"),
                monitored=bool(body.get("monitored", False)))
            return document._operation_to_json(op)
        return run_mutation(fn, "add_operation")

    async def patch_operation(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]
        body = await _body(request)
        params = ([(q["name"], _typeref(ws, q["type"]))
                   for q in body["params"]] if "params" in body else None)
        return_type = (_typeref(ws, body["returnType"])
                       if "returnType" in body else None)

        def fn(p: Project):
            _owned_feature(p, cid, fid, "operation")
            out = {}
            if "name" in body:
                out["renamed"] = _rename_json(
                    kernel.rename_element(p, fid, body["name"]))
            kernel.update_operation(
                p, fid, body.get("body"), return_type, params,
                body.get("monitored"))
            return out or {"updated": fid}
        return run_mutation(fn, "update_operation")

    async def delete_operation(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]

        def fn(p: Project):
            _owned_feature(p, cid, fid, "operation")
            kernel.remove_operation(p, fid)
            return {"deleted": fid}
        return run_mutation(fn, "remove_operation")

    async def post_constraints(request: Request):
        cid = request.path_params["cid"]
        body = await _body(request)

        def fn(p: Project):
            con = kernel.add_constraint(p, cid, _require(body, "name"),
                                        _require(body, "body"),
                                        _require(body, "message"))
            return {"id": con.id, "name": con.name, "body": con.body_src,
                    "message": con.message_src}
        return run_mutation(fn, "add_constraint")

    async def patch_constraint(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]
        body = await _body(request)

        def fn(p: Project):
            _owned_feature(p, cid, fid, "constraint")
            if "name" in body:
                kernel.rename_element(p, fid, body["name"])
            con = kernel.update_constraint(p, fid, body.get("body"),
                                           body.get("message"))
            return {"id": con.id, "name": con.name, "body": con.body_src,
                    "message": con.message_src}
        return run_mutation(fn, "update_constraint")

    async def delete_constraint(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]

        def fn(p: Project):
            _owned_feature(p, cid, fid, "constraint")
            kernel.remove_constraint(p, fid)
            return {"deleted": fid}
        return run_mutation(fn, "remove_constraint")

    async def post_delegations(request: Request):
        cid = request.path_params["cid"]
        body = await _body(request)

        def fn(p: Project):
            dele = kernel.declare_delegation(p, cid, _require(body, "name"),
                                             _require(body, "target"))
            return {"id": dele.id, "name": dele.name, "target": dele.target}
        return run_mutation(fn, "declare_delegation")

    async def patch_delegation(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]
        body = await _body(request)

        def fn(p: Project):
            dele = _owned_feature(p, cid, fid, "delegation")
            if "name" in body:
                kernel.rename_element(p, fid, body["name"])
            if "target" in body:
                kernel.update_delegation(p, fid, body["target"])
            return {"id": dele.id, "name": dele.name, "target": dele.target}
        return run_mutation(fn, "update_delegation")

    async def delete_delegation(request: Request):
        cid, fid = request.path_params["cid"], request.path_params["fid"]

        def fn(p: Project):
            _owned_feature(p, cid, fid, "delegation")
            migration = kernel.remove_delegation(p, fid)
            return {"deleted": fid, "migration": _migration_json(migration)}
        return run_mutation(fn, "remove_delegation")

    # -- associations, enumerations ------------------------------------------

    async def post_associations(request: Request):
        body = await _body(request)
        ends = _require(body, "ends")
        if not isinstance(ends, list) or len(ends) != 2:
            raise ApiError(422, "BadRequest", "an association needs exactly "
                                              "two ends")
        parsed = [(_require(e, "class"), _require(e, "role"),
                   _multiplicity(_require(e, "multiplicity"))) for e in ends]

        def fn(p: Project):
            assoc = kernel.create_association(p, _require(body, "name"),
                                              parsed[0], parsed[1])
            return {"id": assoc.id, "name": assoc.name,
                    "ends": [{"class": e.class_id, "role": e.role,
                              "multiplicity": str(e.multiplicity)}
                             for e in assoc.ends]}
        return run_mutation(fn, "create_association")

    async def post_enumerations(request: Request):
        body = await _body(request)

        def fn(p: Project):
            enum = kernel.create_enumeration(p, _require(body, "name"),
                                             _require(body, "literals"))
            return {"id": enum.id, "name": enum.name,
                    "literals": list(enum.literals)}
        return run_mutation(fn, "create_enumeration")

    # -- objects ---------------------------------------------------------------

    async def post_objects(request: Request):
        body = await _body(request)
        class_ref = _require(body, "class")
        name = _require(body, "name")

        def fn(p: Project):
            cls = p.classes.get(class_ref) or p.class_by_name(class_ref)
            if cls is None:
                raise UnknownElement(f"no class {class_ref!r}")
            obj = kernel.instantiate(p, cls.id, name)
            if body.get("diagram"):
                layout = next((d for d in ws.layouts
                               if d.name == body["diagram"]), None)
                if layout is None:
                    from umlpp.model import DiagramLayout
                    layout = DiagramLayout(body["diagram"])
                    ws.layouts.append(layout)
                from umlpp.model import DiagramNode
                layout.nodes.append(DiagramNode(obj.id,
                                                int(body.get("x", 0)),
                                                int(body.get("y", 0))))
            return document._object_to_json(p, obj)
        return run_mutation(fn, "instantiate")

    async def delete_object(request: Request):
        oid = request.path_params["oid"]

        def fn(p: Project):
            migration = kernel.remove_object(p, oid)
            for layout in ws.layouts:
                layout.nodes = [n for n in layout.nodes if n.element != oid]
            return {"deleted": oid, "migration": _migration_json(migration)}
        return run_mutation(fn, "remove_object")

    async def patch_slot(request: Request):
        oid = request.path_params["oid"]
        attr_name = request.path_params["attr"]
        body = await _body(request)
        if "set" in body:
            value = _value(body["set"])
        elif body.get("clear") is True:
            value = CLEAR
        else:
            raise ApiError(422, "BadRequest",
                           'body must be {"set": <value>} or {"clear": true}')

        def fn(p: Project):
            kernel.set_slot(p, oid, attr_name, value)
            return document._object_to_json(p, p.require_object(oid))
        return run_mutation(fn, "set_slot")

    async def patch_delegate(request: Request):
        oid = request.path_params["oid"]
        name = request.path_params["name"]
        body = await _body(request)

        def fn(p: Project):
            kernel.set_delegate(p, oid, name, _require(body, "target"))
            return document._object_to_json(p, p.require_object(oid))
        return run_mutation(fn, "set_delegate")

    async def post_invoke(request: Request):
        oid = request.path_params["oid"]
        op_name = request.path_params["op"]
        body = await _body(request)
        args = [_value(a) for a in body.get("args", [])]
        with ws.lock:
            result = engine.invoke(ws.project, oid, op_name, args)
            return JSONResponse({
                "result": document.result_to_json(result),
                "revision": ws.revision,
                "report": document.report_to_json(ws.report),
                "monitors": document.monitors_to_json(ws.monitors),
            })

    # -- links ------------------------------------------------------------------

    async def post_links(request: Request):
        body = await _body(request)

        def fn(p: Project):
            link = kernel.create_link(p, _require(body, "association"),
                                      _require(body, "end1"),
                                      _require(body, "end2"))
            return {"id": link.id, "association": link.association,
                    "end1": link.end1, "end2": link.end2}
        return run_mutation(fn, "create_link")

    async def delete_link(request: Request):
        lid = request.path_params["lid"]

        def fn(p: Project):
            kernel.remove_link(p, lid)
            return {"deleted": lid}
        return run_mutation(fn, "remove_link")

    # -- eval, diagrams -----------------------------------------------------------

    async def post_eval(request: Request):
        body = await _body(request)
        context = _require(body, "context")
        expr = _require(body, "expr")
        with ws.lock:
            p = ws.project
            obj = p.objects.get(context) or p.object_by_name(context)
            if obj is None:
                return _error_response(request, 404, "UnknownObject",
                                       f"no object {context!r}")
            tree = parse_expr(expr)
            descriptor = typecheck(tree, p, obj.class_id)
            from umlpp.lang.evaluate import evaluate
            result = evaluate(tree, engine.make_context(p, obj.id))
            return JSONResponse({"result": document.result_to_json(result),
                                 "type": str(descriptor),
                                 "revision": ws.revision})

    async def patch_diagram_node(request: Request):
        name = request.path_params["name"]
        element = request.path_params["element"]
        body = await _body(request)
        x, y = _require(body, "x"), _require(body, "y")
        if not all(isinstance(v, int) and not isinstance(v, bool)
                   for v in (x, y)):
            raise ApiError(422, "BadRequest", "x and y must be integers")
        result, revision, report, monitors = ws.place_node(name, element, x, y)
        return mutation_response(
            {"element": element, "x": x, "y": y}, revision, report, monitors)

    routes = [
        Route("/api/project", get_project, methods=["GET"]),
        Route("/api/palette", get_palette, methods=["GET"]),
        Route("/api/report", get_report, methods=["GET"]),
        Route("/api/classes", post_classes, methods=["POST"]),
        Route("/api/classes/{cid}", patch_class, methods=["PATCH"]),
        Route("/api/classes/{cid}", delete_class, methods=["DELETE"]),
        Route("/api/classes/{cid}/attributes", post_attributes,
              methods=["POST"]),
        Route("/api/classes/{cid}/attributes/{fid}", patch_attribute,
              methods=["PATCH"]),
        Route("/api/classes/{cid}/attributes/{fid}", delete_attribute,
              methods=["DELETE"]),
        Route("/api/classes/{cid}/operations", post_operations,
              methods=["POST"]),
        Route("/api/classes/{cid}/operations/{fid}", patch_operation,
              methods=["PATCH"]),
        Route("/api/classes/{cid}/operations/{fid}", delete_operation,
              methods=["DELETE"]),
        Route("/api/classes/{cid}/constraints", post_constraints,
              methods=["POST"]),
        Route("/api/classes/{cid}/constraints/{fid}", patch_constraint,
              methods=["PATCH"]),
        Route("/api/classes/{cid}/constraints/{fid}", delete_constraint,
              methods=["DELETE"]),
        Route("/api/classes/{cid}/delegations", post_delegations,
              methods=["POST"]),
        Route("/api/classes/{cid}/delegations/{fid}", patch_delegation,
              methods=["PATCH"]),
        Route("/api/classes/{cid}/delegations/{fid}", delete_delegation,
              methods=["DELETE"]),
        Route("/api/associations", post_associations, methods=["POST"]),
        Route("/api/enumerations", post_enumerations, methods=["POST"]),
        Route("/api/objects", post_objects, methods=["POST"]),
        Route("/api/objects/{oid}", delete_object, methods=["DELETE"]),
        Route("/api/objects/{oid}/slots/{attr}", patch_slot,
              methods=["PATCH"]),
        Route("/api/objects/{oid}/delegates/{name}", patch_delegate,
              methods=["PATCH"]),
        Route("/api/objects/{oid}/invoke/{op}", post_invoke,
              methods=["POST"]),
        Route("/api/links", post_links, methods=["POST"]),
        Route("/api/links/{lid}", delete_link, methods=["DELETE"]),
        Route("/api/eval", post_eval, methods=["POST"]),
        Route("/api/diagrams/{name}/nodes/{element}", patch_diagram_node,
              methods=["PATCH"]),
    ]

    async def api_error(request: Request, exc: ApiError):
        return _error_response(request, exc.status, exc.code, exc.message)

    async def model_error(request: Request, exc: ModelError):
        return _error_response(request, _status_for(exc), exc.code,
                               exc.message)

    return Starlette(routes=routes,
                     exception_handlers={ApiError: api_error,
                                         ModelError: model_error})


def serve(ws: Workspace, port: int, ui_dir: str | None = None,
          host: str = "127.0.0.1"):
    import uvicorn
    from starlette.staticfiles import StaticFiles

    app = create_app(ws)
    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port, log_level="warning")
