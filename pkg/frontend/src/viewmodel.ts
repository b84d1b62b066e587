// Pure projections from server state to view structures. No requests, no
// DOM, no model semantics: values and findings are rendered exactly as the
// server reported them.

import type {
  ClassEntry,
  DiagramEntry,
  MonitorsJson,
  ObjectEntry,
  ProjectDocument,
  ReportJson,
  ResultJson,
  TypeRefJson,
  ValueJson,
} from "./types.js";

export interface CompartmentLine {
  text: string;
  slotAttr?: string; // inline-editable slot, keyed by attribute name
  monitorChip?: boolean;
}

export interface Compartment {
  title: string | null;
  lines: CompartmentLine[];
}

export interface NodeView {
  element: string;
  kind: "class" | "object";
  x: number;
  y: number;
  title: string;
  underlined: boolean; // objects: name:Class per convention
  grayTitle: boolean; // objects get the gray name compartment
  italicTitle: boolean; // abstract classes
  compartments: Compartment[];
}

export interface EdgeView {
  kind: "association" | "link" | "generalization" | "delegation" | "instance-of";
  from: string;
  to: string;
  label: string;
  fromLabel?: string; // multiplicity / role at the source end
  toLabel?: string;
  dashed: boolean;
  hollowArrow: boolean;
}

export interface BannerItem {
  objectId: string;
  text: string;
  status: "violated" | "not-evaluable";
}

export function classById(doc: ProjectDocument, id: string): ClassEntry | undefined {
  return doc.classes.find((c) => c.id === id);
}

export function objectById(doc: ProjectDocument, id: string): ObjectEntry | undefined {
  return doc.objects.find((o) => o.id === id);
}

export function enumById(doc: ProjectDocument, id: string) {
  return doc.enumerations.find((e) => e.id === id);
}

export function superclassChain(doc: ProjectDocument, classId: string): ClassEntry[] {
  const chain: ClassEntry[] = [];
  const seen = new Set<string>();
  let cur: string | null = classId;
  while (cur && !seen.has(cur)) {
    seen.add(cur);
    const cls = classById(doc, cur);
    if (!cls) {
      break;
    }
    chain.push(cls);
    cur = cls.superclass;
  }
  return chain;
}

export function effectiveAttributes(doc: ProjectDocument, classId: string) {
  return superclassChain(doc, classId)
    .reverse()
    .flatMap((c) => c.attributes);
}

export function effectiveOperations(doc: ProjectDocument, classId: string) {
  return superclassChain(doc, classId)
    .reverse()
    .flatMap((c) => c.operations);
}

export function effectiveDelegations(doc: ProjectDocument, classId: string) {
  return superclassChain(doc, classId)
    .reverse()
    .flatMap((c) => c.delegations);
}

export function typeText(doc: ProjectDocument, tref: TypeRefJson): string {
  if (tref.kind === "datatype") {
    return tref.name;
  }
  if (tref.kind === "enumeration") {
    return enumById(doc, tref.enumeration)?.name ?? tref.enumeration;
  }
  return classById(doc, tref.class)?.name ?? tref.class;
}

export function valueText(doc: ProjectDocument, value: ValueJson): string {
  switch (value.kind) {
    case "string":
      return `'${value.v}'`;
    case "integer":
    case "float":
      return String(value.v);
    case "boolean":
      return value.v ? "true" : "false";
    case "date":
      return value.v;
    case "monetary":
      return `${value.amount} ${value.currency}`;
    case "enum": {
      const enumeration = enumById(doc, value.enumeration);
      return `${enumeration?.name ?? value.enumeration}::${value.literal}`;
    }
    case "ref":
      return objectById(doc, value.object)?.name ?? value.object;
  }
}

export function resultText(doc: ProjectDocument, result: ResultJson): string {
  // undefined monitored values display as a dash, not as an error
  if (result.kind === "undefined") {
    return "—";
  }
  return valueText(doc, result.value);
}

// -- node views ---------------------------------------------------------------

function classNode(doc: ProjectDocument, cls: ClassEntry, x: number, y: number): NodeView {
  const attributes: CompartmentLine[] = effectiveAttributes(doc, cls.id).map(
    (a) => ({
      text: `${a.derived ? "/ " : ""}${a.name}: ${typeText(doc, a.type)}`,
    }),
  );
  const operations: CompartmentLine[] = effectiveOperations(doc, cls.id).map(
    (o) => {
      const params = o.params
        .map((p) => `${p.name}: ${typeText(doc, p.type)}`)
        .join(", ");
      const flag = o.monitored ? " ⊙" : "";
      return { text: `${o.name}(${params}): ${typeText(doc, o.returnType)}${flag}` };
    },
  );
  const compartments: Compartment[] = [
    { title: null, lines: attributes },
    { title: null, lines: operations },
  ];
  const constraints = superclassChain(doc, cls.id)
    .reverse()
    .flatMap((c) => c.constraints);
  if (constraints.length > 0) {
    // the extra compartment exists only when constraints are present
    compartments.push({
      title: "constraints",
      lines: constraints.map((c) => ({ text: `${c.name}: ${c.body}` })),
    });
  }
  return {
    element: cls.id,
    kind: "class",
    x,
    y,
    title: cls.name,
    underlined: false,
    grayTitle: false,
    italicTitle: cls.abstract,
    compartments,
  };
}

function objectNode(
  doc: ProjectDocument,
  monitors: MonitorsJson,
  obj: ObjectEntry,
  x: number,
  y: number,
): NodeView {
  const cls = classById(doc, obj.class);
  const slots: CompartmentLine[] = effectiveAttributes(doc, obj.class).map((attr) => {
    const slot = obj.slots[attr.name];
    let shown = "?";
    if (slot && slot.state !== "unset") {
      shown = slot.value !== undefined ? valueText(doc, slot.value) : "—";
      if (slot.state === "computed") {
        shown = `${shown} (computed)`;
      }
    }
    return { text: `${attr.name} = ${shown}`, slotAttr: attr.name };
  });
  const compartments: Compartment[] = [{ title: null, lines: slots }];
  const ops = effectiveOperations(doc, obj.class).filter((o) => o.monitored);
  if (ops.length > 0) {
    const byOperation = new Map(
      monitors.entries
        .filter((m) => m.object === obj.id)
        .map((m) => [m.operation, m.result] as const),
    );
    compartments.push({
      title: "monitors",
      lines: ops.map((o) => {
        const result = byOperation.get(o.id);
        const shown = result ? resultText(doc, result) : "—";
        return { text: `${o.name}() = ${shown}`, monitorChip: true };
      }),
    });
  }
  return {
    element: obj.id,
    kind: "object",
    x,
    y,
    title: `${obj.name}:${cls?.name ?? obj.class}`,
    underlined: true,
    grayTitle: true,
    italicTitle: false,
    compartments,
  };
}

export function diagramByName(doc: ProjectDocument, name: string): DiagramEntry | undefined {
  return doc.diagrams.find((d) => d.name === name);
}

export function buildNodeViews(
  doc: ProjectDocument,
  monitors: MonitorsJson,
  diagramName: string,
): NodeView[] {
  const layout = diagramByName(doc, diagramName);
  if (!layout) {
    return [];
  }
  const views: NodeView[] = [];
  for (const node of layout.nodes) {
    const cls = classById(doc, node.element);
    if (cls) {
      views.push(classNode(doc, cls, node.x, node.y));
      continue;
    }
    const obj = objectById(doc, node.element);
    if (obj) {
      views.push(objectNode(doc, monitors, obj, node.x, node.y));
    }
  }
  return views;
}

// -- edges ---------------------------------------------------------------

export function buildEdges(
  doc: ProjectDocument,
  diagramName: string,
  showInstanceOf: boolean,
): EdgeView[] {
  const layout = diagramByName(doc, diagramName);
  if (!layout) {
    return [];
  }
  const placed = new Set(layout.nodes.map((n) => n.element));
  const edges: EdgeView[] = [];
  for (const assoc of doc.associations) {
    const [e1, e2] = assoc.ends;
    if (placed.has(e1.class) && placed.has(e2.class)) {
      edges.push({
        kind: "association",
        from: e1.class,
        to: e2.class,
        label: assoc.name,
        fromLabel: `${e1.role} ${e1.multiplicity}`,
        toLabel: `${e2.role} ${e2.multiplicity}`,
        dashed: false,
        hollowArrow: false,
      });
    }
  }
  for (const link of doc.links) {
    if (placed.has(link.end1) && placed.has(link.end2)) {
      const assoc = doc.associations.find((a) => a.id === link.association);
      edges.push({
        kind: "link",
        from: link.end1,
        to: link.end2,
        label: assoc?.name ?? "",
        dashed: false,
        hollowArrow: false,
      });
    }
  }
  for (const cls of doc.classes) {
    if (cls.superclass && placed.has(cls.id) && placed.has(cls.superclass)) {
      edges.push({
        kind: "generalization",
        from: cls.id,
        to: cls.superclass,
        label: "",
        dashed: false,
        hollowArrow: true,
      });
    }
    for (const dele of cls.delegations) {
      if (placed.has(cls.id) && placed.has(dele.target)) {
        edges.push({
          kind: "delegation",
          from: cls.id,
          to: dele.target,
          label: dele.name,
          dashed: true,
          hollowArrow: false,
        });
      }
    }
  }
  if (showInstanceOf) {
    for (const obj of doc.objects) {
      if (placed.has(obj.id) && placed.has(obj.class)) {
        edges.push({
          kind: "instance-of",
          from: obj.id,
          to: obj.class,
          label: "instance of",
          dashed: true,
          hollowArrow: false,
        });
      }
    }
  }
  return edges;
}

// -- banner ---------------------------------------------------------------

export function bannerItems(doc: ProjectDocument, report: ReportJson): BannerItem[] {
  return report.entries.map((entry) => ({
    objectId: entry.object,
    text: `${objectById(doc, entry.object)?.name ?? entry.object}: ${entry.message}`,
    status: entry.status,
  }));
}

// -- naming and input shaping -----------------------------------------------

export function takenNames(doc: ProjectDocument): Set<string> {
  const names = new Set<string>();
  for (const c of doc.classes) {
    names.add(c.name);
  }
  for (const o of doc.objects) {
    names.add(o.name);
  }
  for (const e of doc.enumerations) {
    names.add(e.name);
  }
  return names;
}

/** First free name of the form ticket1, ticket2, ... for a class Ticket. */
export function suggestObjectName(doc: ProjectDocument, className: string): string {
  const base = className.charAt(0).toLowerCase() + className.slice(1);
  const taken = takenNames(doc);
  for (let i = 1; ; i++) {
    const candidate = `${base}${i}`;
    if (!taken.has(candidate)) {
      return candidate;
    }
  }
}

/** Shapes user text into a wire value for the attribute's declared type.
 * Validation stays on the server; this is string-to-JSON shaping only. */
export function shapeSlotInput(
  doc: ProjectDocument,
  tref: TypeRefJson,
  text: string,
): ValueJson | null {
  const trimmed = text.trim();
  if (tref.kind === "enumeration") {
    const literal = trimmed.includes("::")
      ? trimmed.split("::").pop() ?? trimmed
      : trimmed;
    return { kind: "enum", enumeration: tref.enumeration, literal };
  }
  if (tref.kind === "class") {
    const target = doc.objects.find((o) => o.name === trimmed);
    return target ? { kind: "ref", object: target.id } : null;
  }
  switch (tref.name) {
    case "String":
      return { kind: "string", v: trimmed.replace(/^'|'$/g, "") };
    case "Integer": {
      const n = Number(trimmed);
      return Number.isInteger(n) && trimmed !== "" ? { kind: "integer", v: n } : null;
    }
    case "Float": {
      const n = Number(trimmed);
      return Number.isFinite(n) && trimmed !== "" ? { kind: "float", v: n } : null;
    }
    case "Boolean":
      if (trimmed === "true" || trimmed === "false") {
        return { kind: "boolean", v: trimmed === "true" };
      }
      return null;
    case "Date":
      return /^\d{4}-\d{2}-\d{2}$/.test(trimmed)
        ? { kind: "date", v: trimmed }
        : null;
    case "MonetaryValue": {
      const m = trimmed.match(/^(-?\d+(?:\.\d+)?)\s+([A-Z]{3})$/);
      return m ? { kind: "monetary", amount: m[1], currency: m[2] } : null;
    }
    default:
      return null;
  }
}
