// Pure validation logic against the duration/label algebra.

import { describe, expect, it } from "vitest";

import {
  CHANGE_LABELS,
  DURATION_CLASSES,
  allowedUpdatedTokens,
  deriveChangeLabel,
  durationIndex,
} from "../src/schema.js";
import {
  entryIsValid,
  validateFollowupEntry,
  validateSubmission,
} from "../src/validation.js";

describe("schema", () => {
  it("lists the 11 duration classes in scale order", () => {
    expect(DURATION_CLASSES).toHaveLength(11);
    expect(DURATION_CLASSES[0].token).toBe("lt_1m");
    expect(DURATION_CLASSES[10].token).toBe("gt_1mo");
    for (const [i, option] of DURATION_CLASSES.entries()) {
      expect(durationIndex(option.token)).toBe(i);
    }
  });

  it("derives the change label from the index difference on all 121 pairs", () => {
    for (const original of DURATION_CLASSES) {
      for (const updated of DURATION_CLASSES) {
        const label = deriveChangeLabel(original.token, updated.token);
        const diff = durationIndex(updated.token) - durationIndex(original.token);
        expect(label).toBe(diff < 0 ? "DEC" : diff > 0 ? "INC" : "UNC");
      }
    }
    expect(deriveChangeLabel("nope", "2h_6h")).toBeNull();
  });

  it("partitions the scale into allowed tokens per class", () => {
    for (const original of DURATION_CLASSES) {
      const union = CHANGE_LABELS.flatMap((label) =>
        allowedUpdatedTokens(label, original.token),
      );
      expect(union.sort()).toEqual(DURATION_CLASSES.map((c) => c.token).sort());
      expect(allowedUpdatedTokens("UNC", original.token)).toEqual([original.token]);
    }
  });
});

describe("validateFollowupEntry", () => {
  it("accepts a consistent increase entry", () => {
    const errors = validateFollowupEntry("INC", "2h_6h", "1d_3d", "flight delayed");
    expect(entryIsValid(errors)).toBe(true);
  });

  it("rejects a duration mismatch", () => {
    const errors = validateFollowupEntry("UNC", "2h_6h", "1d_3d", "nice weather");
    expect(errors.updated).toMatch(/does not match/);
    expect(errors.text).toBeUndefined();
  });

  it("rejects empty text", () => {
    const errors = validateFollowupEntry("DEC", "2h_6h", "15m_45m", "   ");
    expect(errors.text).toMatch(/required/);
    expect(errors.updated).toBeUndefined();
  });

  it("flags a missing duration selection", () => {
    const errors = validateFollowupEntry("DEC", "2h_6h", "", "done early");
    expect(errors.updated).toMatch(/Pick/);
  });

  it("agrees with the derivation on random consistent entries", () => {
    for (const original of DURATION_CLASSES) {
      for (const label of CHANGE_LABELS) {
        for (const updated of allowedUpdatedTokens(label, original.token)) {
          const errors = validateFollowupEntry(label, original.token, updated, "text here");
          expect(entryIsValid(errors)).toBe(true);
        }
      }
    }
  });
});

describe("validateSubmission", () => {
  const good = [
    { label: "DEC" as const, text: "called off", updated: "15m_45m" },
    { label: "UNC" as const, text: "nice day", updated: "2h_6h" },
    { label: "INC" as const, text: "postponed", updated: "1d_3d" },
  ];

  it("accepts one entry per class, all consistent", () => {
    expect(validateSubmission(good, "2h_6h")).toEqual([]);
  });

  it("rejects duplicates, gaps, and inconsistencies", () => {
    const dup = [good[0], { ...good[0] }, good[2]];
    expect(validateSubmission(dup, "2h_6h").join(" ")).toMatch(/Duplicate class DEC/);
    expect(validateSubmission(dup, "2h_6h").join(" ")).toMatch(/Missing an entry for class UNC/);
    expect(validateSubmission(good.slice(0, 2), "2h_6h").join(" ")).toMatch(/Expected 3/);
    const bad = [good[0], { ...good[1], updated: "1w_4w" }, good[2]];
    expect(validateSubmission(bad, "2h_6h").join(" ")).toMatch(/does not match/);
  });
});
