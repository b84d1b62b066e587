// Client state. Everything displayed derives from the last server response:
// the document from the latest GET /api/project, report and monitors from
// the latest mutation response (or report poll). No model semantics here.

import type { Api } from "./api.js";
import type {
  MonitorsJson,
  MutationResponse,
  ProjectDocument,
  ReportJson,
} from "./types.js";

export type Listener = () => void;

export class Store {
  doc: ProjectDocument | null = null;
  report: ReportJson = { revision: 0, entries: [] };
  monitors: MonitorsJson = { entries: [] };
  revision = 0;
  diagram = "main";
  selected: string | null = null;
  showInstanceOf = true;
  private listeners: Listener[] = [];

  constructor(private api: Api) {}

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) {
      fn();
    }
  }

  async refresh(): Promise<void> {
    this.doc = await this.api.getProject();
    const polled = await this.api.getReport();
    this.report = polled.report;
    this.monitors = polled.monitors;
    this.revision = polled.revision;
    this.emit();
  }

  /** Fold a mutation response in: banner state comes straight from the
   * piggybacked report, structure from a fresh document fetch. */
  async applyMutation(resp: MutationResponse): Promise<void> {
    this.report = resp.report;
    this.monitors = resp.monitors;
    this.revision = resp.revision;
    this.doc = await this.api.getProject();
    this.emit();
  }

  select(element: string | null): void {
    this.selected = element;
    this.emit();
  }

  setDiagram(name: string): void {
    this.diagram = name;
    this.emit();
  }

  toggleInstanceOf(): void {
    this.showInstanceOf = !this.showInstanceOf;
    this.emit();
  }
}
