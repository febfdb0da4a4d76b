// Client-side entry validation, mirrored by the server. The client must be
// no more permissive than the server: anything accepted here is accepted
// there.

import { ChangeLabel, CHANGE_LABELS, deriveChangeLabel, durationIndex } from "./schema.js";

export interface EntryDraft {
  label: ChangeLabel;
  text: string;
  updated: string;
}

export interface FieldErrors {
  text?: string;
  updated?: string;
}

export function validateFollowupEntry(
  label: ChangeLabel,
  originalToken: string,
  updatedToken: string,
  text: string,
): FieldErrors {
  const errors: FieldErrors = {};
  if (!text.trim()) {
    errors.text = "Follow-up text is required.";
  }
  if (durationIndex(updatedToken) < 0) {
    errors.updated = "Pick an updated duration.";
  } else if (deriveChangeLabel(originalToken, updatedToken) !== label) {
    errors.updated = "Updated duration does not match this entry's change class.";
  }
  return errors;
}

export function entryIsValid(errors: FieldErrors): boolean {
  return !errors.text && !errors.updated;
}

// Cross-entry checks for a full three-part submission.
export function validateSubmission(entries: EntryDraft[], originalToken: string): string[] {
  const problems: string[] = [];
  if (entries.length !== 3) {
    problems.push(`Expected 3 entries, got ${entries.length}.`);
  }
  const seen = new Set<string>();
  for (const entry of entries) {
    if (seen.has(entry.label)) {
      problems.push(`Duplicate class ${entry.label}.`);
    }
    seen.add(entry.label);
    const fieldErrors = validateFollowupEntry(
      entry.label, originalToken, entry.updated, entry.text,
    );
    if (fieldErrors.text) {
      problems.push(`${entry.label}: ${fieldErrors.text}`);
    }
    if (fieldErrors.updated) {
      problems.push(`${entry.label}: ${fieldErrors.updated}`);
    }
  }
  for (const label of CHANGE_LABELS) {
    if (!seen.has(label)) {
      problems.push(`Missing an entry for class ${label}.`);
    }
  }
  return problems;
}
