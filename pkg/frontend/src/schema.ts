// Duration scale and change labels, mirrored from the service contract.

export interface DurationOption {
  token: string;
  display: string;
}

// Scale order matters: the array index is the class ordinal.
export const DURATION_CLASSES: DurationOption[] = [
  { token: "lt_1m", display: "less than 1 minute" },
  { token: "1m_5m", display: "1-5 minutes" },
  { token: "5m_15m", display: "5-15 minutes" },
  { token: "15m_45m", display: "15-45 minutes" },
  { token: "45m_2h", display: "45 minutes-2 hours" },
  { token: "2h_6h", display: "2-6 hours" },
  { token: "gt_6h", display: "more than 6 hours" },
  { token: "1d_3d", display: "1-3 days" },
  { token: "3d_7d", display: "3-7 days" },
  { token: "1w_4w", display: "1-4 weeks" },
  { token: "gt_1mo", display: "more than 1 month" },
];

export const STATIONARY_TOKEN = "stationary";
export const STATIONARY_DISPLAY = "no time-sensitive information";

export type ChangeLabel = "DEC" | "UNC" | "INC";

export const CHANGE_LABELS: ChangeLabel[] = ["DEC", "UNC", "INC"];

export const LABEL_HEADINGS: Record<ChangeLabel, string> = {
  DEC: "Decrease",
  UNC: "Unchanged",
  INC: "Increase",
};

export function durationIndex(token: string): number {
  return DURATION_CLASSES.findIndex((c) => c.token === token);
}

export function durationDisplay(token: string): string {
  const found = DURATION_CLASSES.find((c) => c.token === token);
  return found ? found.display : token;
}

// Change label implied by an (original, updated) duration pair.
export function deriveChangeLabel(originalToken: string, updatedToken: string): ChangeLabel | null {
  const original = durationIndex(originalToken);
  const updated = durationIndex(updatedToken);
  if (original < 0 || updated < 0) {
    return null;
  }
  if (updated < original) {
    return "DEC";
  }
  if (updated > original) {
    return "INC";
  }
  return "UNC";
}

// Updated-duration tokens consistent with a claimed label for a given original.
export function allowedUpdatedTokens(label: ChangeLabel, originalToken: string): string[] {
  return DURATION_CLASSES.map((c) => c.token).filter(
    (token) => deriveChangeLabel(originalToken, token) === label,
  );
}
