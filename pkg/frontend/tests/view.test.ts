import { beforeEach, describe, expect, it, vi } from "vitest";

import type { SessionState } from "../src/api.js";
import { fmtEpsilon, fmtValue } from "../src/format.js";
import { render, type Handlers, type ViewModel } from "../src/view.js";

const QUESTION_STATE: SessionState = {
  session_id: "s1",
  status: "active",
  interval: [0.001, 0.999],
  tolerance: 0.02,
  history_length: 2,
  question: {
    question_id: "q3",
    option_a: { total: 100, richest_share: 0.99, values: [99, 1] },
    option_b: { total: 61.1517, richest_share: 0.6, values: [36.69102, 24.46068] },
  },
};

function handlers(overrides: Partial<Handlers> = {}): Handlers {
  return {
    onChoose: vi.fn(),
    onRetry: vi.fn(),
    onCopy: vi.fn(),
    ...overrides,
  };
}

function model(overrides: Partial<ViewModel> = {}): ViewModel {
  return { state: QUESTION_STATE, busy: false, error: null, copied: false, ...overrides };
}

describe("question rendering", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='app'></div>";
    root = document.getElementById("app") as HTMLElement;
  });

  it("shows both options as keyboard-focusable buttons", () => {
    render(root, model(), handlers());
    const buttons = root.querySelectorAll<HTMLButtonElement>("button.option");
    expect(buttons).toHaveLength(2);
    expect(buttons[0].dataset.choice).toBe("A");
    expect(buttons[1].dataset.choice).toBe("B");
    buttons.forEach((b) => expect(b.disabled).toBe(false));
  });

  it("labels every bar and total with the formatted server value", () => {
    render(root, model(), handlers());
    const totals = [...root.querySelectorAll(".option-total-value")].map(
      (n) => n.textContent
    );
    expect(totals).toEqual([fmtValue(100), fmtValue(61.1517)]);
    const barLabels = [...root.querySelectorAll(".bar-value")].map((n) => n.textContent);
    expect(barLabels).toEqual([
      fmtValue(99),
      fmtValue(1),
      fmtValue(36.69102),
      fmtValue(24.46068),
    ]);
  });

  it("shows the interval bounds and history count", () => {
    render(root, model(), handlers());
    expect(root.querySelector(".interval-lo")?.textContent).toBe(fmtEpsilon(0.001));
    expect(root.querySelector(".interval-hi")?.textContent).toBe(fmtEpsilon(0.999));
    expect(root.querySelector(".history-count")?.textContent).toBe("2 answered");
  });

  it("dispatches the chosen option", () => {
    const h = handlers();
    render(root, model(), h);
    (root.querySelector("button.option[data-choice='B']") as HTMLButtonElement).click();
    expect(h.onChoose).toHaveBeenCalledWith("B");
  });

  it("disables options while a request is in flight", () => {
    render(root, model({ busy: true }), handlers());
    const buttons = root.querySelectorAll<HTMLButtonElement>("button.option");
    buttons.forEach((b) => expect(b.disabled).toBe(true));
  });

  it("scales bars proportionally to values", () => {
    render(root, model(), handlers());
    const rects = root.querySelectorAll("rect.bar");
    const heights = [...rects].map((r) => Number(r.getAttribute("height")));
    // 99 vs 1 in option A: proportional heights
    expect(heights[0] / heights[1]).toBeCloseTo(99, 0);
  });
});

describe("terminal states", () => {
  let root: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='app'></div>";
    root = document.getElementById("app") as HTMLElement;
  });

  it("renders the converged epsilon with a copy affordance", () => {
    const h = handlers();
    const state: SessionState = {
      ...QUESTION_STATE,
      status: "converged",
      question: undefined,
      interval: [0.5, 0.5156],
      epsilon: 0.5078,
      history_length: 6,
    };
    render(root, model({ state }), h);
    expect(root.querySelector(".eps-value")?.textContent).toBe(fmtEpsilon(0.5078));
    (root.querySelector("button.copy") as HTMLButtonElement).click();
    expect(h.onCopy).toHaveBeenCalledWith(fmtEpsilon(0.5078));
  });

  it("notes a boundary estimate", () => {
    const state: SessionState = {
      ...QUESTION_STATE,
      status: "converged",
      question: undefined,
      epsilon: 0.0088,
      at_boundary: "low",
    };
    render(root, model({ state }), handlers());
    expect(root.querySelector(".boundary-note")?.textContent).toContain("low edge");
  });

  it("shows an error banner with a retry affordance and no crash", () => {
    const h = handlers();
    render(root, model({ state: null, error: "Cannot reach the elicitation service" }), h);
    expect(root.querySelector(".banner-text")?.textContent).toContain(
      "Cannot reach the elicitation service"
    );
    (root.querySelector("button.retry") as HTMLButtonElement).click();
    expect(h.onRetry).toHaveBeenCalled();
  });
});
