// Follow-up writing HIT: the target is shown as the "context tweet"; three
// entry forms, one per change class. Duration options inconsistent with an
// entry's class are disabled (visible but unselectable), and the whole form
// re-validates on every input.

import { FollowupHit } from "../api.js";
import {
  CHANGE_LABELS,
  ChangeLabel,
  LABEL_HEADINGS,
  allowedUpdatedTokens,
  durationDisplay,
} from "../schema.js";
import { EntryDraft, validateFollowupEntry, validateSubmission } from "../validation.js";

export interface FollowupFormHandle {
  element: HTMLElement;
  entries(): EntryDraft[];
  problems(): string[];
  setEntry(label: ChangeLabel, text: string, updated: string): void;
  submit(): boolean;
}

export function renderFollowupHit(
  hit: FollowupHit,
  onSubmit: (entries: EntryDraft[]) => void,
): FollowupFormHandle {
  const original = hit.target.duration_token;
  const root = document.createElement("form");
  root.className = "followup-hit";
  root.dataset.hitId = hit.hit_id;

  const context = document.createElement("blockquote");
  context.className = "context-tweet";
  const label = document.createElement("span");
  label.className = "context-label";
  label.textContent = "context tweet";
  const text = document.createElement("p");
  text.textContent = hit.target.text;
  const duration = document.createElement("p");
  duration.className = "context-duration";
  duration.textContent = `Current duration estimate: ${
    hit.target.duration_display ?? durationDisplay(original)
  }`;
  context.append(label, text, duration);
  root.appendChild(context);

  interface EntryWidgets {
    area: HTMLTextAreaElement;
    select: HTMLSelectElement;
    errorBox: HTMLElement;
  }
  const widgets = new Map<ChangeLabel, EntryWidgets>();

  for (const entryLabel of CHANGE_LABELS) {
    const section = document.createElement("fieldset");
    section.className = "entry";
    section.dataset.label = entryLabel;

    const legend = document.createElement("legend");
    legend.textContent = LABEL_HEADINGS[entryLabel];
    section.appendChild(legend);

    const area = document.createElement("textarea");
    area.name = `text-${entryLabel}`;
    area.placeholder = "Write the follow-up statement...";
    section.appendChild(area);

    const select = document.createElement("select");
    select.name = `updated-${entryLabel}`;
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "Updated duration...";
    select.appendChild(placeholder);
    const allowed = new Set(allowedUpdatedTokens(entryLabel, original));
    for (const option of hit.options) {
      const el = document.createElement("option");
      el.value = option.token;
      el.textContent = option.display;
      // inconsistent options stay visible but cannot be chosen
      el.disabled = !allowed.has(option.token);
      select.appendChild(el);
    }
    section.appendChild(select);

    const errorBox = document.createElement("p");
    errorBox.className = "field-errors";
    section.appendChild(errorBox);

    area.addEventListener("input", refresh);
    select.addEventListener("change", refresh);
    widgets.set(entryLabel, { area, select, errorBox });
    root.appendChild(section);
  }

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Submit follow-ups";
  submit.disabled = true;
  root.appendChild(submit);

  function entries(): EntryDraft[] {
    return CHANGE_LABELS.map((entryLabel) => {
      const w = widgets.get(entryLabel)!;
      return { label: entryLabel, text: w.area.value, updated: w.select.value };
    });
  }

  function problems(): string[] {
    return validateSubmission(entries(), original);
  }

  function refresh(): void {
    for (const entryLabel of CHANGE_LABELS) {
      const w = widgets.get(entryLabel)!;
      const errors = validateFollowupEntry(entryLabel, original, w.select.value, w.area.value);
      const messages: string[] = [];
      if (w.area.value && errors.text) {
        messages.push(errors.text);
      }
      if (w.select.value && errors.updated) {
        messages.push(errors.updated);
      }
      w.errorBox.textContent = messages.join(" ");
    }
    submit.disabled = problems().length > 0;
  }

  function setEntry(entryLabel: ChangeLabel, textValue: string, updated: string): void {
    const w = widgets.get(entryLabel)!;
    w.area.value = textValue;
    w.select.value = updated;
    refresh();
  }

  function doSubmit(): boolean {
    if (problems().length > 0) {
      return false;
    }
    onSubmit(entries());
    return true;
  }

  root.addEventListener("submit", (event) => {
    event.preventDefault();
    doSubmit();
  });

  return { element: root, entries, problems, setEntry, submit: doSubmit };
}
