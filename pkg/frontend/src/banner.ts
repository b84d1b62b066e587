// The running ticker at the bottom: every report entry scrolls by as
// "<object>: <message>", violated and not-evaluable styled differently.

import type { BannerItem } from "./viewmodel.js";

export class Banner {
  private track: HTMLDivElement;

  constructor(private host: HTMLElement) {
    this.host.classList.add("banner");
    this.track = document.createElement("div");
    this.track.className = "banner-track";
    this.host.appendChild(this.track);
  }

  setItems(items: BannerItem[]): void {
    this.track.replaceChildren();
    if (items.length === 0) {
      this.host.classList.add("banner-empty");
      this.track.style.animation = "none";
      return;
    }
    this.host.classList.remove("banner-empty");
    // the list is duplicated so the marquee loops seamlessly
    for (const copy of [items, items]) {
      for (const item of copy) {
        const span = document.createElement("span");
        span.className = `banner-item banner-${item.status}`;
        span.textContent = item.text;
        this.track.appendChild(span);
      }
    }
    const seconds = Math.max(8, items.length * 5);
    this.track.style.animation = `banner-scroll ${seconds}s linear infinite`;
  }
}
