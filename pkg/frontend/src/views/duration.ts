// Duration-estimation HIT: one selector row per statement; submit unlocks
// only when every statement has a selection.

import { DurationHit } from "../api.js";

export interface DurationFormHandle {
  element: HTMLElement;
  selections(): Record<string, string>;
  complete(): boolean;
  submit(): boolean;
}

export function renderDurationHit(
  hit: DurationHit,
  onSubmit: (votes: Record<string, string>) => void,
): DurationFormHandle {
  const root = document.createElement("form");
  root.className = "duration-hit";
  root.dataset.hitId = hit.hit_id;

  const heading = document.createElement("h2");
  heading.textContent = hit.third_vote
    ? "Duration estimate (tie-break vote)"
    : "Duration estimates";
  root.appendChild(heading);

  const selects: HTMLSelectElement[] = [];
  for (const statement of hit.statements) {
    const row = document.createElement("div");
    row.className = "statement-row";

    const text = document.createElement("p");
    text.className = "statement-text";
    text.textContent = statement.text;
    row.appendChild(text);

    const select = document.createElement("select");
    select.name = statement.statement_id;
    select.required = true;
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "Choose a duration...";
    select.appendChild(placeholder);
    for (const option of hit.options) {
      const el = document.createElement("option");
      el.value = option.token;
      el.textContent = option.display;
      select.appendChild(el);
    }
    select.addEventListener("change", refresh);
    selects.push(select);
    row.appendChild(select);
    root.appendChild(row);
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Submit votes";
  submit.disabled = true;
  root.appendChild(submit);

  function selections(): Record<string, string> {
    const out: Record<string, string> = {};
    for (const select of selects) {
      if (select.value) {
        out[select.name] = select.value;
      }
    }
    return out;
  }

  function complete(): boolean {
    return selects.every((s) => s.value !== "");
  }

  function refresh(): void {
    submit.disabled = !complete();
  }

  function doSubmit(): boolean {
    if (!complete()) {
      return false;
    }
    onSubmit(selections());
    return true;
  }

  root.addEventListener("submit", (event) => {
    event.preventDefault();
    doSubmit();
  });

  return { element: root, selections, complete, submit: doSubmit };
}
