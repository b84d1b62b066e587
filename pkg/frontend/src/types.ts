// Wire formats of the /api endpoints and the project document.

export type ValueJson =
  | { kind: "string"; v: string }
  | { kind: "integer"; v: number }
  | { kind: "float"; v: number }
  | { kind: "boolean"; v: boolean }
  | { kind: "date"; v: string }
  | { kind: "monetary"; amount: string; currency: string }
  | { kind: "enum"; enumeration: string; literal: string }
  | { kind: "ref"; object: string };

export type TypeRefJson =
  | { kind: "datatype"; name: string }
  | { kind: "enumeration"; enumeration: string }
  | { kind: "class"; class: string };

export interface AttributeEntry {
  id: string;
  name: string;
  type: TypeRefJson;
  derived: boolean;
  derivation?: string;
}

export interface OperationEntry {
  id: string;
  name: string;
  params: { name: string; type: TypeRefJson }[];
  returnType: TypeRefJson;
  body: string;
  monitored: boolean;
}

export interface ConstraintEntry {
  id: string;
  name: string;
  body: string;
  message: string;
}

export interface DelegationEntry {
  id: string;
  name: string;
  target: string;
}

export interface ClassEntry {
  id: string;
  name: string;
  abstract: boolean;
  superclass: string | null;
  delegations: DelegationEntry[];
  attributes: AttributeEntry[];
  operations: OperationEntry[];
  constraints: ConstraintEntry[];
}

export interface SlotEntry {
  state: "unset" | "entered" | "computed";
  value?: ValueJson;
}

export interface ObjectEntry {
  id: string;
  name: string;
  class: string;
  slots: Record<string, SlotEntry>;
  delegates: Record<string, string>;
}

export interface AssociationEnd {
  class: string;
  role: string;
  multiplicity: string;
}

export interface AssociationEntry {
  id: string;
  name: string;
  ends: AssociationEnd[];
}

export interface EnumerationEntry {
  id: string;
  name: string;
  literals: string[];
}

export interface LinkEntry {
  id: string;
  association: string;
  end1: string;
  end2: string;
}

export interface DiagramNodeEntry {
  element: string;
  x: number;
  y: number;
}

export interface DiagramEntry {
  name: string;
  nodes: DiagramNodeEntry[];
}

export interface ProjectDocument {
  formatVersion: number;
  projectName: string;
  enumerations: EnumerationEntry[];
  classes: ClassEntry[];
  associations: AssociationEntry[];
  objects: ObjectEntry[];
  links: LinkEntry[];
  diagrams: DiagramEntry[];
}

export interface ReportSource {
  kind: "constraint" | "multiplicity" | "conformance";
  constraint?: string;
  association?: string;
  end?: string;
  conformance?: string;
}

export interface ReportEntry {
  object: string;
  source: ReportSource;
  status: "violated" | "not-evaluable";
  message: string;
}

export interface ReportJson {
  revision: number;
  entries: ReportEntry[];
}

export type ResultJson =
  | { kind: "value"; value: ValueJson }
  | { kind: "undefined"; reason: string };

export interface MonitorEntry {
  object: string;
  operation: string;
  result: ResultJson;
}

export interface MonitorsJson {
  entries: MonitorEntry[];
}

export interface MutationResponse {
  result: unknown;
  revision: number;
  report: ReportJson;
  monitors: MonitorsJson;
}

export interface ReportResponse {
  revision: number;
  report: ReportJson;
  monitors: MonitorsJson;
}

export interface PaletteEntry {
  id: string;
  name: string;
}
