// Palette of instantiable classes; entries drag onto the canvas. A small
// strip underneath surfaces rejected requests.

import type { PaletteEntry } from "./types.js";

export class Palette {
  private list: HTMLUListElement;
  private errorStrip: HTMLDivElement;
  private errorTimer: number | undefined;

  constructor(private host: HTMLElement) {
    const heading = document.createElement("h2");
    heading.textContent = "Palette";
    this.list = document.createElement("ul");
    this.list.className = "palette-list";
    this.errorStrip = document.createElement("div");
    this.errorStrip.className = "palette-error";
    host.append(heading, this.list, this.errorStrip);
  }

  setEntries(entries: PaletteEntry[]): void {
    this.list.replaceChildren();
    for (const entry of entries) {
      const item = document.createElement("li");
      item.textContent = entry.name;
      item.className = "palette-entry";
      item.draggable = true;
      item.addEventListener("dragstart", (ev) => {
        ev.dataTransfer?.setData("text/umlpp-class", entry.id);
        ev.dataTransfer!.effectAllowed = "copy";
      });
      this.list.appendChild(item);
    }
  }

  showError(message: string): void {
    this.errorStrip.textContent = message;
    window.clearTimeout(this.errorTimer);
    this.errorTimer = window.setTimeout(() => {
      this.errorStrip.textContent = "";
    }, 6000);
  }
}
