import { describe, expect, it } from "vitest";

import { PERCEPTION_STATEMENTS, QuestionForm, RatingsForm } from "../src/forms.js";
import type { QuestionItemJson } from "../src/protocol.js";

const ITEMS: QuestionItemJson[] = [
  { kind: "rating", prompt: "easy to understand?", scale: 5 },
  { kind: "rating", prompt: "interested in more?", scale: 5 },
  { kind: "choice", prompt: "q3", options: ["a", "b"] },
  { kind: "choice", prompt: "q4", options: ["c", "d"] },
  { kind: "choice", prompt: "q5", options: ["t1", "t2"] },
];

describe("question form", () => {
  it("blocks submission until every item is answered", () => {
    const form = new QuestionForm("msnv-00", ITEMS);
    expect(form.complete).toBe(false);
    expect(() => form.toMessage()).toThrow();
    form.setAnswer(0, 4);
    form.setAnswer(1, 3);
    form.setAnswer(2, 0);
    form.setAnswer(3, 1);
    expect(form.complete).toBe(false);
    form.setAnswer(4, 0);
    expect(form.complete).toBe(true);
  });

  it("submits one ANSWERS message with one choice per item", () => {
    const form = new QuestionForm("msnv-00", ITEMS);
    [4, 3, 0, 1, 0].forEach((v, i) => form.setAnswer(i, v));
    expect(form.toMessage()).toEqual({
      type: "ANSWERS",
      docId: "msnv-00",
      choices: [4, 3, 0, 1, 0],
    });
  });

  it("validates ranges", () => {
    const form = new QuestionForm("msnv-00", ITEMS);
    expect(() => form.setAnswer(0, 6)).toThrow(RangeError);
    expect(() => form.setAnswer(0, 0)).toThrow(RangeError);
    expect(() => form.setAnswer(2, 2)).toThrow(RangeError);
    expect(() => form.setAnswer(9, 1)).toThrow(RangeError);
  });

  it("renders two star rows and three radio groups with a gated submit", () => {
    const form = new QuestionForm("msnv-00", ITEMS);
    const node = form.render(() => undefined);
    const ratings = node.children.filter((c) => c.attrs.class?.includes("rating"));
    const choices = node.children.filter((c) => c.attrs.class?.includes("choice"));
    expect(ratings.length).toBe(2);
    expect(choices.length).toBe(3);
    const submit = node.children.find((c) => c.attrs.class === "submit")!;
    expect(submit.attrs.disabled).toBe("disabled");
  });
});

describe("ratings form", () => {
  it("carries exactly ten 1..7 integers", () => {
    const form = new RatingsForm();
    expect(PERCEPTION_STATEMENTS.length).toBe(10);
    PERCEPTION_STATEMENTS.forEach((_, i) => form.setValue(i, (i % 7) + 1));
    const msg = form.toMessage();
    expect(msg.type).toBe("RATINGS");
    expect(msg.items.length).toBe(10);
    for (const v of msg.items) {
      expect(v).toBeGreaterThanOrEqual(1);
      expect(v).toBeLessThanOrEqual(7);
    }
  });

  it("blocks incomplete submission and rejects out-of-scale values", () => {
    const form = new RatingsForm();
    expect(() => form.toMessage()).toThrow();
    expect(() => form.setValue(0, 8)).toThrow(RangeError);
    expect(() => form.setValue(0, 0)).toThrow(RangeError);
  });
});
