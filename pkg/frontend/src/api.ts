// Thin typed client over /api. Mutations run through a depth-1 queue: each
// request waits for the previous response, matching the single-user page
// contract.

import type {
  MutationResponse,
  PaletteEntry,
  ProjectDocument,
  ReportResponse,
  ValueJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "HttpError";
  let message = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, code, message);
}

export class Api {
  private queue: Promise<unknown> = Promise.resolve();

  constructor(public base: string = "") {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const resp = await fetch(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  /** Serializes mutating calls: at most one in flight. */
  private mutate(method: string, path: string, body?: unknown): Promise<MutationResponse> {
    const run = () => this.request<MutationResponse>(method, path, body);
    const next = this.queue.then(run, run);
    this.queue = next.catch(() => undefined);
    return next;
  }

  // -- reads ---------------------------------------------------------------

  getProject(): Promise<ProjectDocument> {
    return this.request("GET", "/api/project");
  }

  getPalette(): Promise<PaletteEntry[]> {
    return this.request("GET", "/api/palette");
  }

  getReport(): Promise<ReportResponse> {
    return this.request("GET", "/api/report");
  }

  evaluate(context: string, expr: string): Promise<{ result: unknown; type: string }> {
    return this.request("POST", "/api/eval", { context, expr });
  }

  // -- classes and features ---------------------------------------------------

  createClass(name: string, abstract = false, superclass?: string) {
    return this.mutate("POST", "/api/classes", { name, abstract, superclass });
  }

  patchClass(id: string, patch: Record<string, unknown>) {
    return this.mutate("PATCH", `/api/classes/${id}`, patch);
  }

  deleteClass(id: string) {
    return this.mutate("DELETE", `/api/classes/${id}`);
  }

  addAttribute(classId: string, body: Record<string, unknown>) {
    return this.mutate("POST", `/api/classes/${classId}/attributes`, body);
  }

  addOperation(classId: string, body: Record<string, unknown>) {
    return this.mutate("POST", `/api/classes/${classId}/operations`, body);
  }

  addConstraint(classId: string, body: Record<string, unknown>) {
    return this.mutate("POST", `/api/classes/${classId}/constraints`, body);
  }

  addDelegation(classId: string, body: Record<string, unknown>) {
    return this.mutate("POST", `/api/classes/${classId}/delegations`, body);
  }

  patchFeature(classId: string, kind: string, featureId: string,
               patch: Record<string, unknown>) {
    return this.mutate("PATCH", `/api/classes/${classId}/${kind}/${featureId}`, patch);
  }

  deleteFeature(classId: string, kind: string, featureId: string) {
    return this.mutate("DELETE", `/api/classes/${classId}/${kind}/${featureId}`);
  }

  createAssociation(body: Record<string, unknown>) {
    return this.mutate("POST", "/api/associations", body);
  }

  createEnumeration(name: string, literals: string[]) {
    return this.mutate("POST", "/api/enumerations", { name, literals });
  }

  // -- objects ---------------------------------------------------------------

  createObject(cls: string, name: string, diagram?: string, x?: number, y?: number) {
    return this.mutate("POST", "/api/objects", { class: cls, name, diagram, x, y });
  }

  deleteObject(id: string) {
    return this.mutate("DELETE", `/api/objects/${id}`);
  }

  setSlot(objectId: string, attr: string, value: ValueJson) {
    return this.mutate("PATCH", `/api/objects/${objectId}/slots/${attr}`, { set: value });
  }

  clearSlot(objectId: string, attr: string) {
    return this.mutate("PATCH", `/api/objects/${objectId}/slots/${attr}`, { clear: true });
  }

  setDelegate(objectId: string, name: string, target: string | null) {
    return this.mutate("PATCH", `/api/objects/${objectId}/delegates/${name}`, { target });
  }

  invoke(objectId: string, op: string, args: ValueJson[] = []) {
    return this.mutate("POST", `/api/objects/${objectId}/invoke/${op}`, { args });
  }

  // -- links and layout ---------------------------------------------------------

  createLink(association: string, end1: string, end2: string) {
    return this.mutate("POST", "/api/links", { association, end1, end2 });
  }

  deleteLink(id: string) {
    return this.mutate("DELETE", `/api/links/${id}`);
  }

  moveNode(diagram: string, element: string, x: number, y: number) {
    return this.mutate("PATCH", `/api/diagrams/${diagram}/nodes/${element}`, { x, y });
  }
}
