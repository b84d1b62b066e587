// SVG diagram: class and object boxes with compartments, association /
// link / generalization / delegation / instance-of edges. Dragging moves a
// node locally and persists the position once, on drag end. Rendering is
// wrapped so a bad frame logs instead of taking the page down.

import type { EdgeView, NodeView } from "./viewmodel.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_WIDTH = 190;
const LINE_HEIGHT = 17;
const TITLE_HEIGHT = 24;

export interface CanvasCallbacks {
  onSelect(element: string | null): void;
  onMove(element: string, x: number, y: number): void;
  onDropClass(classId: string, x: number, y: number): void;
  onEditSlot(objectId: string, attr: string, current: string): void;
}

interface DragState {
  element: string;
  offsetX: number;
  offsetY: number;
  node: SVGGElement;
  moved: boolean;
}

export function nodeHeight(view: NodeView): number {
  let lines = 0;
  for (const compartment of view.compartments) {
    lines += Math.max(1, compartment.lines.length);
  }
  return TITLE_HEIGHT + lines * LINE_HEIGHT + view.compartments.length * 8;
}

export class Canvas {
  private svg: SVGSVGElement;
  private drag: DragState | null = null;
  private positions = new Map<string, { x: number; y: number }>();

  constructor(
    private host: HTMLElement,
    private callbacks: CanvasCallbacks,
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.classList.add("diagram");
    this.svg.addEventListener("pointerdown", (ev) => {
      if (ev.target === this.svg) {
        this.callbacks.onSelect(null);
      }
    });
    this.svg.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
    this.svg.addEventListener("pointerup", (ev) => this.onPointerUp(ev));
    this.svg.addEventListener("dragover", (ev) => {
      if (ev.dataTransfer?.types.includes("text/umlpp-class")) {
        ev.preventDefault();
      }
    });
    this.svg.addEventListener("drop", (ev) => {
      const classId = ev.dataTransfer?.getData("text/umlpp-class");
      if (classId) {
        ev.preventDefault();
        const point = this.toDiagramPoint(ev.clientX, ev.clientY);
        this.callbacks.onDropClass(classId, point.x, point.y);
      }
    });
    host.appendChild(this.svg);
  }

  private toDiagramPoint(clientX: number, clientY: number) {
    const rect = this.svg.getBoundingClientRect();
    return { x: Math.round(clientX - rect.left), y: Math.round(clientY - rect.top) };
  }

  render(nodes: NodeView[], edges: EdgeView[], selected: string | null): void {
    try {
      this.doRender(nodes, edges, selected);
    } catch (err) {
      console.error("diagram render failed", err);
    }
  }

  private doRender(nodes: NodeView[], edges: EdgeView[], selected: string | null): void {
    this.svg.replaceChildren();
    this.positions.clear();
    this.svg.appendChild(this.defs());
    const sizes = new Map<string, { w: number; h: number }>();
    for (const node of nodes) {
      this.positions.set(node.element, { x: node.x, y: node.y });
      sizes.set(node.element, { w: NODE_WIDTH, h: nodeHeight(node) });
    }
    const edgeLayer = document.createElementNS(SVG_NS, "g");
    this.svg.appendChild(edgeLayer);
    for (const edge of edges) {
      const from = this.positions.get(edge.from);
      const to = this.positions.get(edge.to);
      if (!from || !to) {
        continue;
      }
      const sizeFrom = sizes.get(edge.from)!;
      const sizeTo = sizes.get(edge.to)!;
      edgeLayer.appendChild(
        this.edge(edge,
                  { x: from.x + sizeFrom.w / 2, y: from.y + sizeFrom.h / 2 },
                  { x: to.x + sizeTo.w / 2, y: to.y + sizeTo.h / 2 }),
      );
    }
    for (const node of nodes) {
      this.svg.appendChild(this.node(node, node.element === selected));
    }
  }

  private defs(): SVGDefsElement {
    const defs = document.createElementNS(SVG_NS, "defs");
    defs.innerHTML = `
      <marker id="arrow-open" viewBox="0 0 12 12" refX="11" refY="6"
              markerWidth="9" markerHeight="9" orient="auto-start-reverse">
        <path d="M1,1 L11,6 L1,11" fill="none" stroke="#444"/>
      </marker>
      <marker id="arrow-hollow" viewBox="0 0 14 14" refX="13" refY="7"
              markerWidth="13" markerHeight="13" orient="auto-start-reverse">
        <path d="M1,1 L13,7 L1,13 Z" fill="white" stroke="#444"/>
      </marker>`;
    return defs;
  }

  private edge(edge: EdgeView, a: { x: number; y: number }, b: { x: number; y: number }) {
    const group = document.createElementNS(SVG_NS, "g");
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("class", `edge edge-${edge.kind}`);
    if (edge.dashed) {
      line.setAttribute("stroke-dasharray", "6 4");
    }
    if (edge.hollowArrow) {
      line.setAttribute("marker-end", "url(#arrow-hollow)");
    } else if (edge.kind === "instance-of") {
      line.setAttribute("marker-end", "url(#arrow-open)");
    }
    group.appendChild(line);
    const mid = { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 };
    if (edge.label) {
      group.appendChild(this.edgeText(edge.label, mid.x, mid.y - 5, "edge-label"));
    }
    if (edge.fromLabel) {
      group.appendChild(this.edgeText(edge.fromLabel,
                                      a.x + (b.x - a.x) * 0.22,
                                      a.y + (b.y - a.y) * 0.22 - 4,
                                      "edge-end-label"));
    }
    if (edge.toLabel) {
      group.appendChild(this.edgeText(edge.toLabel,
                                      a.x + (b.x - a.x) * 0.78,
                                      a.y + (b.y - a.y) * 0.78 - 4,
                                      "edge-end-label"));
    }
    return group;
  }

  private edgeText(text: string, x: number, y: number, cls: string) {
    const el = document.createElementNS(SVG_NS, "text");
    el.setAttribute("x", String(x));
    el.setAttribute("y", String(y));
    el.setAttribute("class", cls);
    el.textContent = text;
    return el;
  }

  private node(view: NodeView, selected: boolean): SVGGElement {
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("transform", `translate(${view.x}, ${view.y})`);
    group.setAttribute("class",
                       `node node-${view.kind}${selected ? " node-selected" : ""}`);
    const height = nodeHeight(view);
    const box = document.createElementNS(SVG_NS, "rect");
    box.setAttribute("width", String(NODE_WIDTH));
    box.setAttribute("height", String(height));
    box.setAttribute("class", "node-box");
    group.appendChild(box);

    const titleBg = document.createElementNS(SVG_NS, "rect");
    titleBg.setAttribute("width", String(NODE_WIDTH));
    titleBg.setAttribute("height", String(TITLE_HEIGHT));
    // gray name compartment marks an object at a glance
    titleBg.setAttribute("class",
                         view.grayTitle ? "node-title-gray" : "node-title-plain");
    group.appendChild(titleBg);

    const title = document.createElementNS(SVG_NS, "text");
    title.setAttribute("x", String(NODE_WIDTH / 2));
    title.setAttribute("y", "16");
    title.setAttribute("text-anchor", "middle");
    title.setAttribute(
      "class",
      `node-title${view.underlined ? " underlined" : ""}` +
        `${view.italicTitle ? " italic" : ""}`,
    );
    title.textContent = view.title;
    group.appendChild(title);

    let y = TITLE_HEIGHT;
    for (const compartment of view.compartments) {
      const rule = document.createElementNS(SVG_NS, "line");
      rule.setAttribute("x1", "0");
      rule.setAttribute("x2", String(NODE_WIDTH));
      rule.setAttribute("y1", String(y));
      rule.setAttribute("y2", String(y));
      rule.setAttribute("class", "compartment-rule");
      group.appendChild(rule);
      y += 4;
      if (compartment.title) {
        const label = document.createElementNS(SVG_NS, "text");
        label.setAttribute("x", String(NODE_WIDTH / 2));
        label.setAttribute("y", String(y + 11));
        label.setAttribute("text-anchor", "middle");
        label.setAttribute("class", "compartment-title");
        label.textContent = `«${compartment.title}»`;
        group.appendChild(label);
        y += LINE_HEIGHT;
      }
      for (const line of compartment.lines) {
        const text = document.createElementNS(SVG_NS, "text");
        text.setAttribute("x", "8");
        text.setAttribute("y", String(y + 12));
        text.setAttribute(
          "class",
          `compartment-line${line.monitorChip ? " monitor-chip" : ""}` +
            `${line.slotAttr ? " slot-line" : ""}`,
        );
        text.textContent = line.text;
        if (line.slotAttr) {
          const attr = line.slotAttr;
          text.addEventListener("dblclick", (ev) => {
            ev.stopPropagation();
            this.callbacks.onEditSlot(view.element, attr, line.text);
          });
        }
        group.appendChild(text);
        y += LINE_HEIGHT;
      }
      if (compartment.lines.length === 0) {
        y += LINE_HEIGHT;
      }
      y += 4;
    }

    group.addEventListener("pointerdown", (ev) => {
      ev.stopPropagation();
      this.callbacks.onSelect(view.element);
      const point = this.toDiagramPoint(ev.clientX, ev.clientY);
      this.drag = {
        element: view.element,
        offsetX: point.x - view.x,
        offsetY: point.y - view.y,
        node: group,
        moved: false,
      };
      this.svg.setPointerCapture(ev.pointerId);
    });
    return group;
  }

  private onPointerMove(ev: PointerEvent): void {
    if (!this.drag) {
      return;
    }
    const point = this.toDiagramPoint(ev.clientX, ev.clientY);
    const x = Math.max(0, point.x - this.drag.offsetX);
    const y = Math.max(0, point.y - this.drag.offsetY);
    this.drag.moved = true;
    this.drag.node.setAttribute("transform", `translate(${x}, ${y})`);
    this.positions.set(this.drag.element, { x, y });
  }

  private onPointerUp(ev: PointerEvent): void {
    if (!this.drag) {
      return;
    }
    const drag = this.drag;
    this.drag = null;
    if (drag.moved) {
      // one PATCH per completed drag, not a stream of them
      const pos = this.positions.get(drag.element)!;
      this.callbacks.onMove(drag.element, Math.round(pos.x), Math.round(pos.y));
    }
  }
}
