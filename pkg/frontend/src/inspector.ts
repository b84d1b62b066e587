// Right-hand panel for the selected element: slot editing, operation
// invocation and delegate binding on objects; feature creation on classes.
// Rejected requests surface inline under the offending row.

import type { Api } from "./api.js";
import type { Store } from "./store.js";
import {
  bindDelegate,
  editSlot,
  invokeOperation,
} from "./controller.js";
import {
  classById,
  effectiveAttributes,
  effectiveDelegations,
  effectiveOperations,
  objectById,
  resultText,
  valueText,
} from "./viewmodel.js";

export class Inspector {
  constructor(
    private host: HTMLElement,
    private api: Api,
    private store: Store,
  ) {}

  render(): void {
    this.host.replaceChildren();
    const doc = this.store.doc;
    const selected = this.store.selected;
    if (!doc || !selected) {
      this.hint("Select a class or object.");
      return;
    }
    const obj = objectById(doc, selected);
    if (obj) {
      this.renderObject(obj.id);
      return;
    }
    const cls = classById(doc, selected);
    if (cls) {
      this.renderClass(cls.id);
      return;
    }
    this.hint("Selection no longer exists.");
  }

  private hint(text: string): void {
    const p = document.createElement("p");
    p.className = "inspector-hint";
    p.textContent = text;
    this.host.appendChild(p);
  }

  private heading(text: string): void {
    const h = document.createElement("h2");
    h.textContent = text;
    this.host.appendChild(h);
  }

  private row(label: string): { row: HTMLDivElement; error: HTMLDivElement } {
    const row = document.createElement("div");
    row.className = "inspector-row";
    const caption = document.createElement("label");
    caption.textContent = label;
    row.appendChild(caption);
    const error = document.createElement("div");
    error.className = "inline-error";
    this.host.append(row, error);
    return { row, error };
  }

  private renderObject(objectId: string): void {
    const doc = this.store.doc!;
    const obj = objectById(doc, objectId)!;
    const cls = classById(doc, obj.class);
    this.heading(`${obj.name}:${cls?.name ?? obj.class}`);

    for (const attr of effectiveAttributes(doc, obj.class)) {
      const slot = obj.slots[attr.name];
      const { row, error } = this.row(`${attr.name}`);
      if (attr.derived) {
        const shown = document.createElement("span");
        shown.className = "computed-value";
        shown.textContent = slot?.value !== undefined
          ? `${valueText(doc, slot.value)} (computed)`
          : "— (computed)";
        row.appendChild(shown);
        continue;
      }
      const input = document.createElement("input");
      input.value = slot && slot.state === "entered" && slot.value !== undefined
        ? valueText(doc, slot.value).replace(/^'|'$/g, "")
        : "";
      input.placeholder = "unset";
      const apply = async () => {
        error.textContent = "";
        await editSlot(this.api, this.store, obj.id, attr.name, input.value,
                       (m) => { error.textContent = m; });
      };
      input.addEventListener("change", apply);
      row.appendChild(input);
    }

    const monitored = effectiveOperations(doc, obj.class);
    if (monitored.length > 0) {
      this.heading("Operations");
    }
    for (const op of monitored) {
      const { row, error } = this.row(`${op.name}()`);
      const chip = document.createElement("span");
      chip.className = "monitor-chip-inline";
      const entry = this.store.monitors.entries.find(
        (m) => m.object === obj.id && m.operation === op.id);
      chip.textContent = entry ? resultText(doc, entry.result) : "";
      const button = document.createElement("button");
      button.textContent = "invoke";
      button.disabled = op.params.length > 0;
      button.addEventListener("click", async () => {
        error.textContent = "";
        const shown = await invokeOperation(
          this.api, this.store, obj.id, op.name,
          (m) => { error.textContent = m; });
        if (shown !== null) {
          chip.textContent = shown;
        }
      });
      row.append(button, chip);
    }

    const delegations = effectiveDelegations(doc, obj.class);
    if (delegations.length > 0) {
      this.heading("Delegates");
    }
    for (const dele of delegations) {
      const { row, error } = this.row(dele.name);
      const select = document.createElement("select");
      const empty = document.createElement("option");
      empty.value = "";
      empty.textContent = "(unbound)";
      select.appendChild(empty);
      for (const candidate of doc.objects) {
        if (candidate.id === obj.id) {
          continue;
        }
        const option = document.createElement("option");
        option.value = candidate.name;
        option.textContent = candidate.name;
        option.selected = obj.delegates[dele.name] === candidate.id;
        select.appendChild(option);
      }
      select.addEventListener("change", async () => {
        error.textContent = "";
        await bindDelegate(this.api, this.store, obj.id, dele.name,
                           select.value || null,
                           (m) => { error.textContent = m; });
      });
      row.appendChild(select);
    }
  }

  private renderClass(classId: string): void {
    const doc = this.store.doc!;
    const cls = classById(doc, classId)!;
    this.heading(cls.name + (cls.abstract ? " (abstract)" : ""));

    const addAttr = this.row("add attribute");
    const nameInput = document.createElement("input");
    nameInput.placeholder = "name";
    const typeInput = document.createElement("input");
    typeInput.placeholder = "type (String, Integer, ...)";
    const button = document.createElement("button");
    button.textContent = "add";
    button.addEventListener("click", async () => {
      addAttr.error.textContent = "";
      try {
        const resp = await this.api.addAttribute(cls.id, {
          name: nameInput.value,
          type: typeInput.value,
        });
        await this.store.applyMutation(resp);
      } catch (err: any) {
        addAttr.error.textContent = `${err.code ?? "error"}: ${err.message}`;
      }
    });
    addAttr.row.append(nameInput, typeInput, button);

    const addCon = this.row("add constraint");
    const conName = document.createElement("input");
    conName.placeholder = "name";
    const conBody = document.createElement("input");
    conBody.placeholder = "body (Boolean)";
    const conMessage = document.createElement("input");
    conMessage.placeholder = "message (String)";
    const conButton = document.createElement("button");
    conButton.textContent = "add";
    conButton.addEventListener("click", async () => {
      addCon.error.textContent = "";
      try {
        const resp = await this.api.addConstraint(cls.id, {
          name: conName.value,
          body: conBody.value,
          message: conMessage.value,
        });
        await this.store.applyMutation(resp);
      } catch (err: any) {
        addCon.error.textContent = `${err.code ?? "error"}: ${err.message}`;
      }
    });
    addCon.row.append(conName, conBody, conMessage, conButton);
  }
}
