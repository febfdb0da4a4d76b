// Tabbed guidelines panel: summary / detailed / examples per task.

export interface GuidelineContent {
  summary: string;
  detailed: string;
  examples: string[];
}

export const DURATION_GUIDELINES: GuidelineContent = {
  summary:
    "Estimate how long each statement stays relevant to a reader after it " +
    "was posted. Pick the closest duration range, or mark it as having no " +
    "time-sensitive information.",
  detailed:
    "Read the statement as if it just appeared in your feed. Ask: for how " +
    "long would a reader still act on this information? Ongoing activities " +
    "usually stay relevant until they finish. Statements that are always " +
    "true (or always false), and statements entirely about the past, carry " +
    "no time-sensitive information - use the dedicated option for those. " +
    "When torn between two ranges, pick the one that covers the typical " +
    "case, not the extreme.",
  examples: [
    "\"I am making a sandwich\" - relevant for a few minutes: 5-15 minutes.",
    "\"Driving to the coast for the day\" - relevant for hours: 2-6 hours.",
    "\"Water boils at lower temperatures at altitude\" - always true: no " +
      "time-sensitive information.",
    "\"I went to the bank yesterday\" - entirely in the past: no " +
      "time-sensitive information.",
  ],
};

export const FOLLOWUP_GUIDELINES: GuidelineContent = {
  summary:
    "Write three short follow-up statements for the context tweet: one that " +
    "shortens how long it stays relevant, one that leaves it unchanged, and " +
    "one that extends it. Do not rewrite the context tweet itself.",
  detailed:
    "Each follow-up is a second message from the same author. A decrease " +
    "follow-up makes the information resolve sooner (finished early, called " +
    "off). An increase follow-up delays or prolongs it (postponed, taking " +
    "longer). An unchanged follow-up is ordinary commentary that does not " +
    "touch the timing at all. After writing each follow-up, set the updated " +
    "duration the reader would now expect; the selector only offers values " +
    "consistent with the entry's class. Write natural, self-contained " +
    "sentences - no placeholders, no copies of the context tweet.",
  examples: [
    "Context \"I am waiting for the bus\" + decrease: \"It is pulling up " +
      "right now.\"",
    "Context \"I am waiting for the bus\" + unchanged: \"Lovely sunset " +
      "tonight.\"",
    "Context \"I am waiting for the bus\" + increase: \"The app says it " +
      "broke down two stops away.\"",
  ],
};

export function renderGuidelines(content: GuidelineContent): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "guidelines";

  const tabs = document.createElement("div");
  tabs.className = "tabs";
  const body = document.createElement("div");
  body.className = "tab-body";

  const sections: Record<string, () => void> = {
    Summary: () => {
      body.textContent = content.summary;
    },
    Detailed: () => {
      body.textContent = content.detailed;
    },
    Examples: () => {
      body.textContent = "";
      const list = document.createElement("ul");
      for (const example of content.examples) {
        const item = document.createElement("li");
        item.textContent = example;
        list.appendChild(item);
      }
      body.appendChild(list);
    },
  };

  for (const [name, show] of Object.entries(sections)) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "tab";
    button.dataset.tab = name.toLowerCase();
    button.textContent = name;
    button.addEventListener("click", () => {
      tabs.querySelectorAll(".tab").forEach((t) => t.classList.remove("active"));
      button.classList.add("active");
      show();
    });
    tabs.appendChild(button);
  }

  panel.appendChild(tabs);
  panel.appendChild(body);
  (tabs.firstElementChild as HTMLButtonElement).click();
  return panel;
}
