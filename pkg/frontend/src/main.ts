// Single-page app shell: hash routing between the annotator tasks and the
// reviewer dashboard. All state lives in the service; only the annotator id
// persists locally.

import { AnnotationApi, ApiError, DurationHit, FollowupHit } from "./api.js";
import { currentAnnotator, setAnnotator } from "./session.js";
import { renderDurationHit } from "./views/duration.js";
import { renderFollowupHit } from "./views/followup.js";
import {
  DURATION_GUIDELINES,
  FOLLOWUP_GUIDELINES,
  renderGuidelines,
} from "./views/guidelines.js";
import { renderReviewerDashboard } from "./views/reviewer.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8400";

const api = new AnnotationApi(SERVICE_URL);

function el(tag: string, className: string, text = ""): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text) {
    node.textContent = text;
  }
  return node;
}

function banner(kind: "notice" | "error" | "lockout", message: string): HTMLElement {
  return el("div", `banner banner-${kind}`, message);
}

function idleScreen(task: string): HTMLElement {
  const box = el("div", "idle");
  box.appendChild(el("p", "", `No open ${task} tasks right now.`));
  const retry = document.createElement("button");
  retry.textContent = "Check again";
  retry.addEventListener("click", () => void route());
  box.appendChild(retry);
  return box;
}

function identityForm(container: HTMLElement): void {
  const form = document.createElement("form");
  form.className = "identity";
  const input = document.createElement("input");
  input.placeholder = "Enter your annotator id";
  input.value = currentAnnotator();
  const go = document.createElement("button");
  go.type = "submit";
  go.textContent = "Start";
  form.append(input, go);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    setAnnotator(input.value.trim());
    void route();
  });
  container.appendChild(form);
}

async function annotateView(container: HTMLElement, task: "duration" | "followup"): Promise<void> {
  const annotator = currentAnnotator();
  if (!annotator) {
    identityForm(container);
    return;
  }
  container.appendChild(
    renderGuidelines(task === "duration" ? DURATION_GUIDELINES : FOLLOWUP_GUIDELINES),
  );
  let hit;
  try {
    hit = await api.nextHit(task, annotator);
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      container.appendChild(
        banner("lockout", "Your account cannot take new tasks. Contact the organizers."),
      );
      return;
    }
    container.appendChild(banner("error", "Service unreachable - retrying may help."));
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.addEventListener("click", () => void route());
    container.appendChild(retry);
    return;
  }
  if (hit === null) {
    container.appendChild(idleScreen(task));
    return;
  }

  if (hit.kind === "duration") {
    const form = renderDurationHit(hit as DurationHit, (votes) => {
      void api
        .submitVotes(hit.hit_id, annotator, votes)
        .then(() => route())
        .catch((error) => container.appendChild(banner("error", String(error.message))));
    });
    container.appendChild(form.element);
  } else {
    const form = renderFollowupHit(hit as FollowupHit, (entries) => {
      void api
        .submitFollowups(hit.hit_id, annotator, entries)
        .then(() => route())
        .catch((error) => container.appendChild(banner("error", String(error.message))));
    });
    container.appendChild(form.element);
  }
}

async function reviewView(container: HTMLElement): Promise<void> {
  const reviewer = currentAnnotator();
  if (!reviewer) {
    identityForm(container);
    return;
  }
  const noticeArea = el("div", "notices");
  container.appendChild(noticeArea);
  const dashboard = renderReviewerDashboard(api, reviewer, (message) => {
    noticeArea.appendChild(banner("notice", message));
  });
  container.appendChild(dashboard.element);
  await dashboard.refresh();
}

function nav(): HTMLElement {
  const bar = el("nav", "nav");
  for (const [label, hash] of [
    ["Duration task", "#/annotate/duration"],
    ["Follow-up task", "#/annotate/followup"],
    ["Review", "#/review"],
  ]) {
    const link = document.createElement("a");
    link.href = hash;
    link.textContent = label;
    bar.appendChild(link);
  }
  return bar;
}

export async function route(): Promise<void> {
  const container = document.getElementById("app");
  if (!container) {
    return;
  }
  container.textContent = "";
  container.appendChild(nav());
  const body = el("main", "body");
  container.appendChild(body);
  const hash = window.location.hash || "#/annotate/duration";
  if (hash.startsWith("#/review")) {
    await reviewView(body);
  } else if (hash.startsWith("#/annotate/followup")) {
    await annotateView(body, "followup");
  } else {
    await annotateView(body, "duration");
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
