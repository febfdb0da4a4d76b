// Reviewer dashboard: pending submissions with annotator trust context.
// Approve/reject/edit; rejecting requires feedback; editing re-validates
// before save unlocks; a 409 (someone else reviewed first) drops the item
// with a notice.

import { AnnotationApi, ApiError, QueueItem } from "../api.js";
import { CHANGE_LABELS, ChangeLabel, DURATION_CLASSES, durationDisplay } from "../schema.js";
import { EntryDraft, validateSubmission } from "../validation.js";

export interface ReviewerHandle {
  element: HTMLElement;
  refresh(): Promise<void>;
  itemCount(): number;
}

export function renderReviewerDashboard(
  api: AnnotationApi,
  reviewerId: string,
  onNotice: (message: string) => void = () => undefined,
): ReviewerHandle {
  const root = document.createElement("section");
  root.className = "review-queue";

  const heading = document.createElement("h2");
  heading.textContent = "Review queue";
  root.appendChild(heading);

  const list = document.createElement("div");
  list.className = "queue-items";
  root.appendChild(list);

  function trustLine(item: QueueItem): string {
    const a = item.annotator;
    if (a.trusted) {
      return `${a.annotator_id} - trusted (${a.approved} approved, ${a.rejected} rejected)`;
    }
    return (
      `${a.annotator_id} - ${a.approved}/20 approvals toward trust ` +
      `(${a.approvals_to_trust} to go, ${a.rejected} rejected)`
    );
  }

  function renderItem(item: QueueItem): HTMLElement {
    const card = document.createElement("article");
    card.className = "queue-item";
    card.dataset.submissionId = item.submission_id;

    const target = document.createElement("p");
    target.className = "queue-target";
    target.textContent =
      `${item.target.text} [${durationDisplay(item.target.duration_token)}]`;
    card.appendChild(target);

    const annotator = document.createElement("p");
    annotator.className = "queue-annotator";
    annotator.textContent = trustLine(item);
    card.appendChild(annotator);

    const editors = new Map<ChangeLabel, { area: HTMLTextAreaElement; select: HTMLSelectElement }>();
    for (const entry of item.entries) {
      const row = document.createElement("div");
      row.className = "queue-entry";
      const tag = document.createElement("strong");
      tag.textContent = entry.label;
      const area = document.createElement("textarea");
      area.value = entry.text;
      area.disabled = true;
      const select = document.createElement("select");
      for (const token of ["", ...DURATION_CLASSES.map((c) => c.token)]) {
        const option = document.createElement("option");
        option.value = token;
        option.textContent = token ? durationDisplay(token) : "updated duration";
        select.appendChild(option);
      }
      select.value = entry.updated;
      select.disabled = true;
      row.append(tag, area, select);
      editors.set(entry.label as ChangeLabel, { area, select });
      card.appendChild(row);
    }

    const feedback = document.createElement("textarea");
    feedback.className = "feedback";
    feedback.placeholder = "Feedback for the annotator (required to reject)";
    card.appendChild(feedback);

    const errorBox = document.createElement("p");
    errorBox.className = "review-errors";
    card.appendChild(errorBox);

    const actions = document.createElement("div");
    actions.className = "actions";
    const approve = button("Approve", "approve");
    const reject = button("Reject", "reject");
    const edit = button("Edit", "edit");
    const save = button("Save edited", "save");
    save.hidden = true;
    actions.append(approve, reject, edit, save);
    card.appendChild(actions);

    function currentEntries(): EntryDraft[] {
      return CHANGE_LABELS.map((label) => {
        const w = editors.get(label)!;
        return { label, text: w.area.value, updated: w.select.value };
      });
    }

    async function decide(
      decision: "approve" | "reject" | "edit", entries?: EntryDraft[],
    ): Promise<void> {
      try {
        await api.review(item.submission_id, reviewerId, decision, feedback.value, entries);
        card.remove();
        onNotice(`${item.submission_id}: ${decision} recorded`);
      } catch (error) {
        if (error instanceof ApiError && error.status === 409) {
          card.remove();
          onNotice(`${item.submission_id}: already reviewed elsewhere, removed`);
        } else if (error instanceof ApiError) {
          errorBox.textContent = String(error.message);
        } else {
          throw error;
        }
      }
    }

    approve.addEventListener("click", () => void decide("approve"));
    reject.addEventListener("click", () => {
      if (!feedback.value.trim()) {
        errorBox.textContent = "Feedback is required to reject.";
        return;
      }
      void decide("reject");
    });
    edit.addEventListener("click", () => {
      for (const { area, select } of editors.values()) {
        area.disabled = false;
        select.disabled = false;
      }
      save.hidden = false;
      refreshSave();
      for (const { area, select } of editors.values()) {
        area.addEventListener("input", refreshSave);
        select.addEventListener("change", refreshSave);
      }
    });
    function refreshSave(): void {
      const problems = validateSubmission(currentEntries(), item.target.duration_token);
      save.disabled = problems.length > 0;
      errorBox.textContent = problems.join(" ");
    }
    save.addEventListener("click", () => void decide("edit", currentEntries()));

    return card;
  }

  async function refresh(): Promise<void> {
    const queue = await api.reviewQueue();
    list.textContent = "";
    for (const item of queue) {
      list.appendChild(renderItem(item));
    }
  }

  return {
    element: root,
    refresh,
    itemCount: () => list.querySelectorAll(".queue-item").length,
  };
}

function button(label: string, action: string): HTMLButtonElement {
  const el = document.createElement("button");
  el.type = "button";
  el.textContent = label;
  el.dataset.action = action;
  return el;
}
