import { describe, expect, it } from "vitest";

import type { MonitorsJson, ProjectDocument, ReportJson } from "../src/types.js";
import {
  bannerItems,
  buildEdges,
  buildNodeViews,
  shapeSlotInput,
  suggestObjectName,
  valueText,
} from "../src/viewmodel.js";

function fixture(): ProjectDocument {
  return {
    formatVersion: 1,
    projectName: "cinema",
    enumerations: [{ id: "e1", name: "Genre", literals: ["Horror", "Comedy"] }],
    classes: [
      {
        id: "c1",
        name: "Ticket",
        abstract: false,
        superclass: null,
        delegations: [],
        attributes: [
          { id: "a1", name: "price",
            type: { kind: "datatype", name: "MonetaryValue" }, derived: false },
        ],
        operations: [
          { id: "o1", name: "total", params: [],
            returnType: { kind: "datatype", name: "MonetaryValue" },
            body: "self.price", monitored: true },
        ],
        constraints: [
          { id: "k1", name: "positivePrice", body: "self.price.amount() > 0",
            message: "'bad'" },
        ],
      },
      {
        id: "c2",
        name: "Screening",
        abstract: false,
        superclass: null,
        delegations: [],
        attributes: [],
        operations: [],
        constraints: [],
      },
    ],
    associations: [
      { id: "s1", name: "Admits",
        ends: [{ class: "c1", role: "tickets", multiplicity: "*" },
               { class: "c2", role: "screening", multiplicity: "1" }] },
    ],
    objects: [
      { id: "t1", name: "ticket1", class: "c1",
        slots: { price: { state: "unset" } }, delegates: {} },
      { id: "s9", name: "screening1", class: "c2", slots: {}, delegates: {} },
    ],
    links: [{ id: "l1", association: "s1", end1: "t1", end2: "s9" }],
    diagrams: [
      { name: "main",
        nodes: [{ element: "c1", x: 10, y: 10 },
                { element: "c2", x: 300, y: 10 },
                { element: "t1", x: 10, y: 220 },
                { element: "s9", x: 300, y: 220 }] },
    ],
  };
}

const noMonitors: MonitorsJson = { entries: [] };

describe("node views", () => {
  it("classes get a constraint compartment only when constraints exist", () => {
    const nodes = buildNodeViews(fixture(), noMonitors, "main");
    const ticket = nodes.find((n) => n.element === "c1")!;
    const screening = nodes.find((n) => n.element === "c2")!;
    expect(ticket.compartments).toHaveLength(3);
    expect(ticket.compartments[2].title).toBe("constraints");
    expect(screening.compartments).toHaveLength(2);
  });

  it("object titles are underlined name:Class on a gray compartment", () => {
    const nodes = buildNodeViews(fixture(), noMonitors, "main");
    const obj = nodes.find((n) => n.element === "t1")!;
    expect(obj.title).toBe("ticket1:Ticket");
    expect(obj.underlined).toBe(true);
    expect(obj.grayTitle).toBe(true);
    const cls = nodes.find((n) => n.element === "c1")!;
    expect(cls.grayTitle).toBe(false);
  });

  it("unset slots show as ?, monitored values as chips", () => {
    const doc = fixture();
    const monitors: MonitorsJson = {
      entries: [{ object: "t1", operation: "o1",
                  result: { kind: "undefined", reason: "unset" } }],
    };
    const nodes = buildNodeViews(doc, monitors, "main");
    const obj = nodes.find((n) => n.element === "t1")!;
    expect(obj.compartments[0].lines[0].text).toBe("price = ?");
    expect(obj.compartments[1].lines[0].text).toBe("total() = —");
    doc.objects[0].slots.price = {
      state: "entered",
      value: { kind: "monetary", amount: "12.50", currency: "EUR" },
    };
    monitors.entries[0].result = {
      kind: "value",
      value: { kind: "monetary", amount: "12.50", currency: "EUR" },
    };
    const updated = buildNodeViews(doc, monitors, "main");
    const fresh = updated.find((n) => n.element === "t1")!;
    expect(fresh.compartments[0].lines[0].text).toBe("price = 12.50 EUR");
    expect(fresh.compartments[1].lines[0].text).toBe("total() = 12.50 EUR");
  });
});

describe("edges", () => {
  it("associations carry role and multiplicity labels", () => {
    const edges = buildEdges(fixture(), "main", true);
    const assoc = edges.find((e) => e.kind === "association")!;
    expect(assoc.fromLabel).toBe("tickets *");
    expect(assoc.toLabel).toBe("screening 1");
    expect(assoc.dashed).toBe(false);
  });

  it("instance-of arrows are dashed and toggleable", () => {
    expect(buildEdges(fixture(), "main", true)
      .filter((e) => e.kind === "instance-of")).toHaveLength(2);
    expect(buildEdges(fixture(), "main", false)
      .filter((e) => e.kind === "instance-of")).toHaveLength(0);
  });

  it("links render between placed objects", () => {
    const links = buildEdges(fixture(), "main", false)
      .filter((e) => e.kind === "link");
    expect(links).toHaveLength(1);
    expect(links[0].from).toBe("t1");
    expect(links[0].to).toBe("s9");
  });
});

describe("banner", () => {
  it("mirrors the report in order with object names", () => {
    const report: ReportJson = {
      revision: 3,
      entries: [
        { object: "t1", source: { kind: "constraint", constraint: "k1" },
          status: "violated", message: "price must be positive" },
        { object: "s9", source: { kind: "multiplicity", association: "s1",
                                  end: "screening" },
          status: "not-evaluable", message: "pending" },
      ],
    };
    const items = bannerItems(fixture(), report);
    expect(items.map((i) => i.text)).toEqual([
      "ticket1: price must be positive",
      "screening1: pending",
    ]);
    expect(items[0].status).toBe("violated");
    expect(items[1].status).toBe("not-evaluable");
  });

  it("empty report gives an empty ticker", () => {
    expect(bannerItems(fixture(), { revision: 0, entries: [] })).toEqual([]);
  });
});

describe("naming", () => {
  it("suggests the first free lowercased name", () => {
    const doc = fixture();
    expect(suggestObjectName(doc, "Ticket")).toBe("ticket2"); // ticket1 taken
    expect(suggestObjectName(doc, "Movie")).toBe("movie1");
    doc.objects.push({ id: "x", name: "movie1", class: "c1", slots: {},
                       delegates: {} });
    expect(suggestObjectName(doc, "Movie")).toBe("movie2");
  });
});

describe("slot input shaping", () => {
  const doc = fixture();
  it("shapes by declared type", () => {
    expect(shapeSlotInput(doc, { kind: "datatype", name: "Integer" }, "42"))
      .toEqual({ kind: "integer", v: 42 });
    expect(shapeSlotInput(doc, { kind: "datatype", name: "Integer" }, "x"))
      .toBeNull();
    expect(shapeSlotInput(doc, { kind: "datatype", name: "MonetaryValue" },
                          "12.50 EUR"))
      .toEqual({ kind: "monetary", amount: "12.50", currency: "EUR" });
    expect(shapeSlotInput(doc, { kind: "datatype", name: "Date" }, "2026-01-01"))
      .toEqual({ kind: "date", v: "2026-01-01" });
    expect(shapeSlotInput(doc, { kind: "enumeration", enumeration: "e1" },
                          "Genre::Horror"))
      .toEqual({ kind: "enum", enumeration: "e1", literal: "Horror" });
    expect(shapeSlotInput(doc, { kind: "class", class: "c2" }, "screening1"))
      .toEqual({ kind: "ref", object: "s9" });
    expect(shapeSlotInput(doc, { kind: "class", class: "c2" }, "nobody"))
      .toBeNull();
  });

  it("renders values back to text", () => {
    expect(valueText(doc, { kind: "monetary", amount: "0.00", currency: "EUR" }))
      .toBe("0.00 EUR");
    expect(valueText(doc, { kind: "enum", enumeration: "e1", literal: "Comedy" }))
      .toBe("Genre::Comedy");
    expect(valueText(doc, { kind: "ref", object: "s9" })).toBe("screening1");
  });
});
