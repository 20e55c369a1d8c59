import type { Question, Scenario, SessionState } from "./api.js";
import { fmtEpsilon, fmtValue } from "./format.js";

export type Handlers = {
  onChoose: (choice: "A" | "B") => void;
  onRetry: () => void;
  onCopy: (text: string) => void;
};

export type ViewModel = {
  state: SessionState | null;
  busy: boolean;
  error: string | null;
  copied: boolean;
};

const SVG_NS = "http://www.w3.org/2000/svg";
const BAR_AREA = { width: 160, height: 120, barWidth: 56, gap: 24, labelSpace: 18 };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBars(scenario: Scenario, scaleMax: number): SVGSVGElement {
  const { width, height, barWidth, gap, labelSpace } = BAR_AREA;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "bars");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("role", "img");
  svg.setAttribute(
    "aria-label",
    `two people receiving ${fmtValue(scenario.values[0])} and ${fmtValue(scenario.values[1])}`
  );
  const usable = height - labelSpace - 2;
  scenario.values.forEach((value, i) => {
    const x = gap + i * (barWidth + gap);
    const barHeight = scaleMax > 0 ? Math.max(1, (value / scaleMax) * usable) : 1;
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(x));
    rect.setAttribute("y", String(usable - barHeight + 2));
    rect.setAttribute("width", String(barWidth));
    rect.setAttribute("height", String(barHeight));
    rect.setAttribute("class", i === 0 ? "bar bar-rich" : "bar bar-poor");
    svg.appendChild(rect);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x + barWidth / 2));
    label.setAttribute("y", String(height - 4));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "bar-value");
    label.textContent = fmtValue(value);
    svg.appendChild(label);
  });
  return svg;
}

function renderOption(
  name: "A" | "B",
  scenario: Scenario,
  scaleMax: number,
  busy: boolean,
  onChoose: Handlers["onChoose"]
): HTMLButtonElement {
  const button = el("button", "option");
  button.type = "button";
  button.dataset.choice = name;
  button.disabled = busy;
  button.setAttribute(
    "aria-label",
    `choose option ${name}, total ${fmtValue(scenario.total)}`
  );
  button.appendChild(el("h3", "option-name", `Option ${name}`));
  const total = el("div", "option-total");
  total.appendChild(el("span", "option-total-label", "Total: "));
  total.appendChild(el("strong", "option-total-value", fmtValue(scenario.total)));
  button.appendChild(total);
  button.appendChild(renderBars(scenario, scaleMax));
  button.addEventListener("click", () => onChoose(name));
  return button;
}

function renderQuestion(question: Question, busy: boolean, handlers: Handlers): HTMLElement {
  const section = el("section", "question");
  section.appendChild(
    el("p", "prompt", "Which outcome would you rather ship?")
  );
  const scaleMax = Math.max(...question.option_a.values, ...question.option_b.values);
  const options = el("div", "options");
  options.appendChild(renderOption("A", question.option_a, scaleMax, busy, handlers.onChoose));
  options.appendChild(renderOption("B", question.option_b, scaleMax, busy, handlers.onChoose));
  section.appendChild(options);
  return section;
}

function renderProgress(state: SessionState): HTMLElement {
  const wrap = el("div", "progress");
  const [lo, hi] = state.interval;
  // the fill fraction is a purely visual affordance; the displayed numbers
  // below are the server's interval bounds verbatim
  const span = 0.999 - 0.001;
  const fraction = Math.min(1, Math.max(0, 1 - (hi - lo) / span));
  const track = el("div", "progress-track");
  const fill = el("div", "progress-fill");
  fill.style.width = `${Math.round(fraction * 100)}%`;
  track.appendChild(fill);
  wrap.appendChild(track);

  const caption = el("div", "progress-caption");
  const interval = el("span", "interval");
  interval.appendChild(document.createTextNode("aversion interval ["));
  interval.appendChild(el("span", "interval-lo", fmtEpsilon(lo)));
  interval.appendChild(document.createTextNode(", "));
  interval.appendChild(el("span", "interval-hi", fmtEpsilon(hi)));
  interval.appendChild(document.createTextNode("]"));
  caption.appendChild(interval);
  caption.appendChild(
    el("span", "history-count", `${state.history_length} answered`)
  );
  wrap.appendChild(caption);
  return wrap;
}

function renderResult(state: SessionState, copied: boolean, handlers: Handlers): HTMLElement {
  const section = el("section", "result");
  section.appendChild(el("p", "result-lead", "Your inequality aversion:"));
  const eps = fmtEpsilon(state.epsilon as number);
  section.appendChild(el("div", "eps-value", eps));
  if (state.at_boundary) {
    section.appendChild(
      el(
        "p",
        "boundary-note",
        `Estimate sits at the ${state.at_boundary} edge of the representable range.`
      )
    );
  }
  const copy = el("button", "copy", copied ? "Copied" : "Copy value");
  copy.type = "button";
  copy.addEventListener("click", () => handlers.onCopy(eps));
  section.appendChild(copy);
  return section;
}

export function render(root: HTMLElement, model: ViewModel, handlers: Handlers): void {
  root.textContent = "";
  const app = el("div", "elicitation");
  app.appendChild(el("h1", "title", "Inequality preference elicitation"));

  if (model.error !== null) {
    const banner = el("div", "banner");
    banner.setAttribute("role", "alert");
    banner.appendChild(el("span", "banner-text", model.error));
    const retry = el("button", "retry", "Retry");
    retry.type = "button";
    retry.addEventListener("click", handlers.onRetry);
    banner.appendChild(retry);
    app.appendChild(banner);
  }

  const state = model.state;
  if (state !== null) {
    app.appendChild(renderProgress(state));
    if (state.status === "active" && state.question) {
      app.appendChild(renderQuestion(state.question, model.busy, handlers));
    } else if (state.status === "converged") {
      app.appendChild(renderResult(state, model.copied, handlers));
    } else if (state.status === "exhausted") {
      app.appendChild(
        el("p", "exhausted", "The session ran out of questions before converging.")
      );
    }
  } else if (model.error === null) {
    app.appendChild(el("p", "loading", "Starting session…"));
  }
  root.appendChild(app);
}
