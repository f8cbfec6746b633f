/**
 * Response forms: the per-document question set (two star ratings, three
 * multiple-choice questions) and the end-of-session ten-item questionnaire.
 * Submission is blocked until every item has a value.
 */
import type { AnswersMsg, QuestionItemJson, RatingsMsg } from "./protocol.js";
import { el, VNode } from "./render.js";

export const PERCEPTION_SCALE = 7;

// End-of-session questionnaire (usefulness, ease of use, satisfaction).
export const PERCEPTION_STATEMENTS: string[] = [
  "The highlights helped me work through the document.",
  "The highlights helped me see which bars the text meant.",
  "The highlights helped me focus on the relevant parts of the chart.",
  "The highlights pulled my attention away from reading.",
  "The highlights were hard to make sense of.",
  "The highlights appeared at the right moments.",
  "The highlights were easy to spot when they appeared.",
  "The highlights fit naturally into the page.",
  "Overall I am happy with the highlighting.",
  "I would keep highlighting like this switched on for my own reading.",
];

export class QuestionForm {
  /** answers[i]: rating value (1..scale) or option index; null = unanswered */
  answers: (number | null)[];

  constructor(public docId: string, public items: QuestionItemJson[]) {
    this.answers = items.map(() => null);
  }

  setAnswer(index: number, value: number): void {
    const item = this.items[index];
    if (!item) throw new RangeError(`no item ${index}`);
    if (item.kind === "rating") {
      const scale = item.scale ?? 5;
      if (value < 1 || value > scale) {
        throw new RangeError(`rating ${value} outside 1..${scale}`);
      }
    } else {
      const options = item.options ?? [];
      if (value < 0 || value >= options.length) {
        throw new RangeError(`choice ${value} out of range`);
      }
    }
    this.answers[index] = value;
  }

  get complete(): boolean {
    return this.answers.every((a) => a !== null);
  }

  /** The ANSWERS message; throws unless every item is answered. */
  toMessage(): AnswersMsg {
    if (!this.complete) {
      throw new Error("unanswered items block submission");
    }
    return { type: "ANSWERS", docId: this.docId, choices: this.answers as number[] };
  }

  render(onChange: (index: number, value: number) => void): VNode {
    void onChange; // wired by mount-time event binding in main
    const rows = this.items.map((item, index) => {
      if (item.kind === "rating") {
        const scale = item.scale ?? 5;
        const stars = Array.from({ length: scale }, (_, star) =>
          el("button", {
            class: "star" + ((this.answers[index] ?? 0) > star ? " lit" : ""),
            "data-item": String(index),
            "data-value": String(star + 1),
          }, [], "*"));
        return el("div", { class: "item rating" }, [
          el("p", {}, [], item.prompt),
          el("div", { class: "stars" }, stars),
        ]);
      }
      const options = (item.options ?? []).map((option, oi) =>
        el("label", { class: "option" }, [
          el("input", {
            type: "radio",
            name: `q${index}`,
            "data-item": String(index),
            "data-value": String(oi),
            ...(this.answers[index] === oi ? { checked: "checked" } : {}),
          }),
          el("span", {}, [], option),
        ]));
      return el("div", { class: "item choice" }, [
        el("p", {}, [], item.prompt),
        ...options,
      ]);
    });
    return el("div", { class: "questions" }, [
      ...rows,
      el("button", {
        class: "submit",
        ...(this.complete ? {} : { disabled: "disabled" }),
      }, [], "Submit"),
    ]);
  }
}

export class RatingsForm {
  values: (number | null)[];

  constructor(public statements: string[] = PERCEPTION_STATEMENTS) {
    this.values = statements.map(() => null);
  }

  setValue(index: number, value: number): void {
    if (value < 1 || value > PERCEPTION_SCALE) {
      throw new RangeError(`rating ${value} outside 1..${PERCEPTION_SCALE}`);
    }
    this.values[index] = value;
  }

  get complete(): boolean {
    return this.values.every((v) => v !== null);
  }

  toMessage(): RatingsMsg {
    if (!this.complete) {
      throw new Error("unanswered items block submission");
    }
    return { type: "RATINGS", items: this.values as number[] };
  }

  render(): VNode {
    const rows = this.statements.map((statement, index) =>
      el("div", { class: "item likert" }, [
        el("p", {}, [], statement),
        el("div", { class: "scale" },
          Array.from({ length: PERCEPTION_SCALE }, (_, v) =>
            el("button", {
              class: "notch" + (this.values[index] === v + 1 ? " picked" : ""),
              "data-item": String(index),
              "data-value": String(v + 1),
            }, [], String(v + 1)))),
      ]));
    return el("div", { class: "ratings" }, [
      el("p", { class: "lead" }, [],
        "Rate how strongly you disagree (1) or agree (7) with each statement."),
      ...rows,
      el("button", {
        class: "submit",
        ...(this.complete ? {} : { disabled: "disabled" }),
      }, [], "Finish"),
    ]);
  }
}
