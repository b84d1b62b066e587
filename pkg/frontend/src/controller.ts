// Interaction handlers shared by the DOM layer and the smoke tests: every
// user gesture becomes one API call whose response refreshes the store.

import { Api, ApiError } from "./api.js";
import type { Store } from "./store.js";
import type { ResultJson } from "./types.js";
import {
  classById,
  effectiveAttributes,
  resultText,
  shapeSlotInput,
  suggestObjectName,
} from "./viewmodel.js";

export type ErrorSink = (message: string) => void;

async function run(
  store: Store,
  onError: ErrorSink,
  call: () => Promise<{ result: unknown; revision: number; report: any; monitors: any }>,
): Promise<boolean> {
  try {
    const resp = await call();
    await store.applyMutation(resp as any);
    return true;
  } catch (err) {
    if (err instanceof ApiError) {
      onError(`${err.code}: ${err.message}`);
      return false;
    }
    throw err;
  }
}

/** Palette drop: instantiate with the first free suggested name and place
 * the node where it was dropped. */
export async function dropClass(
  api: Api,
  store: Store,
  classId: string,
  x: number,
  y: number,
  onError: ErrorSink,
): Promise<string | null> {
  const doc = store.doc;
  if (!doc) {
    return null;
  }
  const cls = classById(doc, classId);
  if (!cls) {
    onError(`unknown class ${classId}`);
    return null;
  }
  const name = suggestObjectName(doc, cls.name);
  let created: string | null = null;
  const ok = await run(store, onError, async () => {
    const resp = await api.createObject(cls.id, name, store.diagram, x, y);
    created = (resp.result as { id: string }).id;
    return resp;
  });
  return ok ? created : null;
}

export async function createClass(
  api: Api,
  store: Store,
  name: string,
  abstract: boolean,
  onError: ErrorSink,
): Promise<boolean> {
  return run(store, onError, () => api.createClass(name, abstract));
}

/** Inline slot edit: empty text clears, anything else is shaped to the
 * attribute's declared type and sent; the server has the last word. */
export async function editSlot(
  api: Api,
  store: Store,
  objectId: string,
  attrName: string,
  text: string,
  onError: ErrorSink,
): Promise<boolean> {
  const doc = store.doc;
  if (!doc) {
    return false;
  }
  if (text.trim() === "") {
    return run(store, onError, () => api.clearSlot(objectId, attrName));
  }
  const obj = doc.objects.find((o) => o.id === objectId);
  if (!obj) {
    onError(`unknown object ${objectId}`);
    return false;
  }
  const attr = effectiveAttributes(doc, obj.class).find((a) => a.name === attrName);
  if (!attr) {
    onError(`unknown attribute ${attrName}`);
    return false;
  }
  const value = shapeSlotInput(doc, attr.type, text);
  if (value === null) {
    onError(`cannot read ${JSON.stringify(text)} as ${attr.type.kind === "datatype" ? attr.type.name : attr.type.kind}`);
    return false;
  }
  return run(store, onError, () => api.setSlot(objectId, attrName, value));
}

export async function invokeOperation(
  api: Api,
  store: Store,
  objectId: string,
  opName: string,
  onError: ErrorSink,
): Promise<string | null> {
  try {
    const resp = await api.invoke(objectId, opName, []);
    await store.applyMutation(resp);
    const result = resp.result as ResultJson;
    return store.doc ? resultText(store.doc, result) : null;
  } catch (err) {
    if (err instanceof ApiError) {
      onError(`${err.code}: ${err.message}`);
      return null;
    }
    throw err;
  }
}

export async function bindDelegate(
  api: Api,
  store: Store,
  objectId: string,
  delegation: string,
  targetName: string | null,
  onError: ErrorSink,
): Promise<boolean> {
  const doc = store.doc;
  if (!doc) {
    return false;
  }
  let targetId: string | null = null;
  if (targetName !== null && targetName !== "") {
    const target = doc.objects.find((o) => o.name === targetName);
    if (!target) {
      onError(`unknown object ${targetName}`);
      return false;
    }
    targetId = target.id;
  }
  return run(store, onError, () => api.setDelegate(objectId, delegation, targetId));
}

export async function moveNode(
  api: Api,
  store: Store,
  element: string,
  x: number,
  y: number,
  onError: ErrorSink,
): Promise<boolean> {
  return run(store, onError, () => api.moveNode(store.diagram, element, x, y));
}
