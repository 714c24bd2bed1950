import type {
  CovariateDoc,
  DistributionDoc,
  PredictRecord,
  Scenario,
} from "./types.js";
import type { AppState } from "./state.js";
import { canPin } from "./state.js";

// Every renderer returns an HTML string; the app swaps whole sections in one
// assignment so a half-updated view is never on screen. Nothing in here does
// arithmetic on model outputs beyond positioning marks on a 0-100 axis.

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Numbers are shown with JavaScript's shortest round-trip rendering. */
function num(x: number): string {
  return String(x);
}

const ANNOTATION_LABELS: Record<string, string> = {
  extrapolation: "outside the range of the development data",
  exceeds_dev_n: "effective count above the development sample size",
  boundary: "prediction pinned at a probability boundary; uncertainty undefined",
};

function annotationLabel(tag: string): string {
  return ANNOTATION_LABELS[tag] ?? tag;
}

export function renderBadges(annotations: string[]): string {
  if (annotations.length === 0) return "";
  const badges = annotations
    .map(
      (tag) =>
        `<span class="badge badge-${escapeHtml(tag)}" title="${escapeHtml(
          annotationLabel(tag),
        )}">${escapeHtml(tag.replace(/_/g, " "))}</span>`,
    )
    .join("");
  return `<div class="badges" data-testid="badges">${badges}</div>`;
}

/**
 * 100 person glyphs; the filled count is the server's per_hundred value
 * verbatim (clamped to the drawable 0-100 only so layout cannot break).
 */
export function renderIconArray(perHundred: number): string {
  const filled = Math.max(0, Math.min(100, perHundred));
  let icons = "";
  for (let i = 0; i < 100; i++) {
    icons += `<span class="icon${i < filled ? " filled" : ""}"></span>`;
  }
  return (
    `<div class="icon-array" data-testid="icon-array" role="img" ` +
    `aria-label="${num(perHundred)} in 100">${icons}</div>` +
    `<p class="icon-caption">${num(perHundred)} in 100 patients like this one</p>`
  );
}

export function renderStatement(record: PredictRecord): string {
  const display =
    record.n_eff_display === "inf" ? "∞" : record.n_eff_display;
  let html =
    `<p class="statement" data-testid="statement">This estimate is ` +
    `effectively based on ~<strong>${escapeHtml(display)}</strong> ` +
    `patients like this one</p>`;
  if (record.annotations.length > 0) {
    const notes = record.annotations.map(annotationLabel).join("; ");
    html += `<p class="caveat" data-testid="caveat">Caution: ${escapeHtml(
      notes,
    )}.</p>`;
  }
  return html;
}

/**
 * Development-set distribution as a bar strip, with a marker at the current
 * patient's percentile. Bar heights are scaled to the tallest bin; the
 * marker sits at dev_percentile along the axis.
 */
export function renderStrip(
  dist: DistributionDoc,
  record: PredictRecord,
): string {
  const counts = dist.histogram.counts;
  const peak = Math.max(1, ...counts);
  const bars = counts
    .map((c) => {
      const h = Math.round((c / peak) * 100);
      return `<span class="bar" style="height:${h}%"></span>`;
    })
    .join("");
  let marker = "";
  if (record.dev_percentile !== null) {
    const pct = Math.max(0, Math.min(100, record.dev_percentile));
    marker =
      `<span class="marker" data-testid="marker" ` +
      `data-percentile="${num(record.dev_percentile)}" ` +
      `style="left:${num(pct)}%" title="at the ${num(
        record.dev_percentile,
      )} percentile of the development set"></span>`;
  }
  return (
    `<div class="strip" data-testid="strip">` +
    `<div class="strip-bars">${bars}${marker}</div>` +
    `<p class="strip-caption">where this patient sits among the ` +
    `${num(countTotal(counts))} development patients</p></div>`
  );
}

function countTotal(counts: number[]): number {
  return counts.reduce((a, b) => a + b, 0);
}

function riskLine(family: string, record: PredictRecord): string {
  if (family === "binomial-logit") {
    return renderIconArray(record.per_hundred);
  }
  return (
    `<p class="value-line" data-testid="value-line">predicted value: ` +
    `<strong>${num(record.yhat)}</strong></p>`
  );
}

function scenarioSummary(covariates: Record<string, number>): string {
  return Object.entries(covariates)
    .map(([k, v]) => `${escapeHtml(k)} = ${num(v)}`)
    .join(", ");
}

function pinCard(scenario: Scenario, family: string, label: string): string {
  const risk =
    family === "binomial-logit"
      ? `${num(scenario.record.per_hundred)} in 100`
      : `predicted ${num(scenario.record.yhat)}`;
  return (
    `<div class="pin-card" data-testid="pin-card">` +
    `<h4>${escapeHtml(label)}</h4>` +
    `<p class="pin-inputs">${scenarioSummary(scenario.covariates)}</p>` +
    `<p class="pin-risk">${risk}</p>` +
    `<p class="pin-neff">~${escapeHtml(
      scenario.record.n_eff_display === "inf"
        ? "∞"
        : scenario.record.n_eff_display,
    )} patients</p>` +
    renderBadges(scenario.record.annotations) +
    `</div>`
  );
}

export function renderComparison(state: AppState): string {
  if (state.pins.length === 0 || state.current === null) return "";
  const family = state.model?.family ?? "";
  const cards: string[] = [];
  state.pins.forEach((pin, i) => {
    cards.push(pinCard(pin, family, `pinned ${i + 1}`));
  });
  cards.push(pinCard(state.current, family, "current"));
  return (
    `<div class="comparison" data-testid="comparison">` +
    cards.join(`<span class="compare-line" aria-hidden="true"></span>`) +
    `</div>`
  );
}

export function renderView(state: AppState): string {
  if (state.current === null || state.distribution === null) {
    return `<p class="placeholder">Enter patient details to see the estimate.</p>`;
  }
  const family = state.model?.family ?? "";
  const record = state.current.record;
  const stale = state.stale
    ? `<span class="badge badge-stale" data-testid="stale-badge" ` +
      `title="the last update could not reach the server">showing last ` +
      `result &mdash; connection problem</span>`
    : "";
  const pinControls =
    `<div class="pin-controls">` +
    `<button type="button" data-action="pin"${
      canPin(state) ? "" : " disabled"
    }>Pin for comparison</button>` +
    (state.pins.length > 0
      ? `<button type="button" data-action="reset">Clear pins</button>`
      : "") +
    `</div>`;
  return (
    `<div class="view" data-testid="view">` +
    stale +
    renderBadges(record.annotations) +
    riskLine(family, record) +
    renderStatement(record) +
    renderStrip(state.distribution, record) +
    pinControls +
    renderComparison(state) +
    `</div>`
  );
}

function fieldControl(
  cov: CovariateDoc,
  value: string,
  error: string | undefined,
  disabled: boolean,
): string {
  const name = escapeHtml(cov.name);
  const dis = disabled ? " disabled" : "";
  let control: string;
  if (cov.kind === "binary") {
    const checked = value === "1" ? " checked" : "";
    control =
      `<label class="toggle"><input type="checkbox" data-field="${name}"` +
      `${checked}${dis}><span>${name}</span></label>`;
  } else {
    control =
      `<label>${name}` +
      `<input type="text" inputmode="decimal" data-field="${name}" ` +
      `value="${escapeHtml(value)}"${dis}>` +
      `<span class="hint">development range ${num(cov.dev_min)} to ${num(
        cov.dev_max,
      )}</span></label>`;
  }
  const err = error
    ? `<span class="field-error" data-error-for="${name}">${escapeHtml(
        error,
      )}</span>`
    : "";
  return `<div class="field${error ? " invalid" : ""}">${control}${err}</div>`;
}

export function renderForm(state: AppState): string {
  if (state.model === null) return "";
  const disabled = state.phase === "down";
  const fields = state.model.covariates
    .map((cov) => {
      const error =
        state.fieldErrors[cov.name] ??
        (state.serverError?.field === cov.name
          ? state.serverError.message
          : undefined);
      return fieldControl(cov, state.inputs[cov.name] ?? "", error, disabled);
    })
    .join("");
  return `<form data-testid="patient-form" autocomplete="off">${fields}</form>`;
}

export function renderBanner(state: AppState): string {
  if (state.phase !== "down") return "";
  return (
    `<div class="banner" data-testid="banner" role="alert">` +
    `Cannot reach the model server. ` +
    `<button type="button" data-action="retry">Retry</button></div>`
  );
}

function renderHeader(state: AppState): string {
  if (state.model === null) {
    return `<header><h1>What-if explorer</h1></header>`;
  }
  const m = state.model;
  return (
    `<header><h1>What-if explorer</h1>` +
    `<p class="model-line">model <strong>${escapeHtml(
      m.model_name,
    )}</strong> &middot; ${escapeHtml(m.family)} &middot; fitted to ` +
    `${num(m.n_dev)} patients</p></header>`
  );
}

export function renderApp(state: AppState): string {
  if (state.phase === "loading") {
    return `<p class="placeholder">Loading model&hellip;</p>`;
  }
  return (
    renderHeader(state) +
    renderBanner(state) +
    `<main><section class="panel">${renderForm(state)}</section>` +
    `<section class="panel">${renderView(state)}</section></main>`
  );
}
