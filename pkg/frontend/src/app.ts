import { ApiClient, ApiFailure } from "./client.js";
import { debounce, type Debounced } from "./debounce.js";
import { renderApp } from "./render.js";
import {
  clearPins,
  initialState,
  pinCurrent,
  type AppState,
} from "./state.js";

export const DEBOUNCE_MS = 150;

export class ExplorerApp {
  readonly state: AppState;
  private seq = 0;
  private applied = 0;
  private readonly debouncers = new Map<
    string,
    Debounced<[Record<string, number>]>
  >();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ApiClient,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {
    this.state = initialState();
    this.bindEvents();
  }

  async start(): Promise<void> {
    this.state.phase = "loading";
    this.render();
    try {
      const [model, distribution] = await Promise.all([
        this.client.model(),
        this.client.distribution(),
      ]);
      this.state.model = model;
      this.state.distribution = distribution;
      this.state.phase = "ready";
      for (const cov of model.covariates) {
        if (!(cov.name in this.state.inputs)) {
          this.state.inputs[cov.name] =
            cov.kind === "binary" ? "0" : String(cov.dev_mean);
        }
      }
      this.render();
      const covariates = this.readForm();
      if (covariates !== null) {
        await this.requestPredict(covariates);
      }
    } catch {
      this.state.phase = "down";
      this.render();
    }
  }

  /** Parse the form; on bad text, record inline errors and return null. */
  private readForm(): Record<string, number> | null {
    const model = this.state.model;
    if (model === null) return null;
    const covariates: Record<string, number> = {};
    let ok = true;
    for (const cov of model.covariates) {
      const raw = (this.state.inputs[cov.name] ?? "").trim();
      if (cov.kind === "binary") {
        covariates[cov.name] = raw === "1" ? 1 : 0;
        continue;
      }
      if (raw === "") {
        this.state.fieldErrors[cov.name] = "enter a value";
        ok = false;
        continue;
      }
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        this.state.fieldErrors[cov.name] = "not a number";
        ok = false;
        continue;
      }
      covariates[cov.name] = value;
    }
    return ok ? covariates : null;
  }

  private handleInput(field: string, raw: string): void {
    this.state.inputs[field] = raw;
    delete this.state.fieldErrors[field];
    if (this.state.serverError?.field === field) {
      this.state.serverError = null;
    }
    const covariates = this.readForm();
    if (covariates === null) {
      // Bad text stays on the page; no request goes out for it.
      this.debouncers.get(field)?.cancel();
      this.render();
      return;
    }
    this.debouncerFor(field)(covariates);
    this.render();
  }

  private debouncerFor(
    field: string,
  ): Debounced<[Record<string, number>]> {
    let d = this.debouncers.get(field);
    if (d === undefined) {
      d = debounce(
        (covariates: Record<string, number>) =>
          void this.requestPredict(covariates),
        this.debounceMs,
      );
      this.debouncers.set(field, d);
    }
    return d;
  }

  /**
   * One round trip to /predict. Responses land in request order: anything
   * older than the last applied response is dropped, and the view keeps its
   * previous contents until a newer response replaces them whole.
   */
  async requestPredict(covariates: Record<string, number>): Promise<void> {
    const seq = ++this.seq;
    try {
      const record = await this.client.predict(covariates);
      if (seq <= this.applied) return;
      this.applied = seq;
      this.state.current = { covariates, record };
      this.state.stale = false;
      this.state.serverError = null;
    } catch (err) {
      if (seq <= this.applied) return;
      this.applied = seq;
      if (err instanceof ApiFailure && err.error.field !== null) {
        this.state.serverError = {
          field: err.error.field,
          message: err.error.message,
        };
        this.state.stale = false;
      } else if (this.state.current === null) {
        // Nothing on screen to keep; treat it as the server being gone.
        this.state.phase = "down";
      } else {
        this.state.stale = true;
      }
    }
    this.render();
  }

  pin(): void {
    pinCurrent(this.state);
    this.render();
  }

  resetPins(): void {
    clearPins(this.state);
    this.render();
  }

  private bindEvents(): void {
    this.root.addEventListener("input", (ev) => {
      const target = ev.target as HTMLInputElement | null;
      const field = target?.getAttribute("data-field");
      if (!target || !field) return;
      const raw =
        target.type === "checkbox" ? (target.checked ? "1" : "0") : target.value;
      this.handleInput(field, raw);
    });
    this.root.addEventListener("click", (ev) => {
      const button = (ev.target as HTMLElement | null)?.closest(
        "[data-action]",
      );
      if (!button || button.hasAttribute("disabled")) return;
      const action = button.getAttribute("data-action");
      if (action === "pin") this.pin();
      else if (action === "reset") this.resetPins();
      else if (action === "retry") void this.start();
    });
  }

  private render(): void {
    // Full-section innerHTML swap keeps updates atomic; put the caret back
    // where it was so re-renders don't interrupt typing.
    const active = document.activeElement;
    const activeField =
      active instanceof HTMLInputElement
        ? active.getAttribute("data-field")
        : null;
    const selection =
      active instanceof HTMLInputElement && active.type !== "checkbox"
        ? { start: active.selectionStart, end: active.selectionEnd }
        : null;
    this.root.innerHTML = renderApp(this.state);
    if (activeField !== null) {
      const input = this.root.querySelector<HTMLInputElement>(
        `[data-field="${activeField}"]`,
      );
      if (input !== null) {
        input.focus();
        if (selection !== null && selection.start !== null) {
          input.setSelectionRange(selection.start, selection.end ?? selection.start);
        }
      }
    }
  }
}
