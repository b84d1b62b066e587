// Page wiring: load the project, then re-render palette, canvas, banner and
// inspector from store state after every server response.

import { Api } from "./api.js";
import { Banner } from "./banner.js";
import { Canvas } from "./canvas.js";
import { dropClass, editSlot, moveNode } from "./controller.js";
import { Inspector } from "./inspector.js";
import { Palette } from "./palette.js";
import { Store } from "./store.js";
import { bannerItems, buildEdges, buildNodeViews } from "./viewmodel.js";

async function boot(): Promise<void> {
  const api = new Api("");
  const store = new Store(api);

  const paletteHost = document.getElementById("palette")!;
  const canvasHost = document.getElementById("canvas")!;
  const bannerHost = document.getElementById("banner")!;
  const inspectorHost = document.getElementById("inspector")!;
  const diagramSelect = document.getElementById("diagram-select") as HTMLSelectElement;
  const instanceOfToggle = document.getElementById("toggle-instanceof") as HTMLInputElement;
  const newClassButton = document.getElementById("new-class") as HTMLButtonElement;

  const palette = new Palette(paletteHost);
  const banner = new Banner(bannerHost);
  const inspector = new Inspector(inspectorHost, api, store);
  const canvas = new Canvas(canvasHost, {
    onSelect: (element) => store.select(element),
    onMove: (element, x, y) => {
      void moveNode(api, store, element, x, y, (m) => palette.showError(m));
    },
    onDropClass: (classId, x, y) => {
      void dropClass(api, store, classId, x, y, (m) => palette.showError(m));
    },
    onEditSlot: (objectId, attr, current) => {
      const text = window.prompt(`value for ${attr}`,
                                 current.replace(/^.*= /, ""));
      if (text !== null) {
        void editSlot(api, store, objectId, attr, text,
                      (m) => palette.showError(m));
      }
    },
  });

  async function refreshPalette(): Promise<void> {
    palette.setEntries(await api.getPalette());
  }

  function renderAll(): void {
    const doc = store.doc;
    if (!doc) {
      return;
    }
    const names = doc.diagrams.map((d) => d.name);
    diagramSelect.replaceChildren();
    for (const name of names.length ? names : ["main"]) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      option.selected = name === store.diagram;
      diagramSelect.appendChild(option);
    }
    canvas.render(
      buildNodeViews(doc, store.monitors, store.diagram),
      buildEdges(doc, store.diagram, store.showInstanceOf),
      store.selected,
    );
    banner.setItems(bannerItems(doc, store.report));
    inspector.render();
    void refreshPalette();
  }

  store.subscribe(renderAll);
  diagramSelect.addEventListener("change", () => store.setDiagram(diagramSelect.value));
  instanceOfToggle.addEventListener("change", () => store.toggleInstanceOf());
  newClassButton.addEventListener("click", async () => {
    const name = window.prompt("class name");
    if (!name) {
      return;
    }
    const { createClass } = await import("./controller.js");
    await createClass(api, store, name, false, (m) => palette.showError(m));
  });
  window.addEventListener("focus", () => {
    void store.refresh();
  });

  await store.refresh();
  if (store.doc && store.doc.diagrams.length > 0) {
    store.setDiagram(store.doc.diagrams[0].name);
  }
}

boot().catch((err) => {
  console.error("failed to start", err);
  const host = document.getElementById("banner");
  if (host) {
    host.textContent = `failed to load project: ${err}`;
  }
});
