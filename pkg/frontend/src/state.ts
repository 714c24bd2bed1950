import type { DistributionDoc, ModelDoc, Scenario } from "./types.js";

export const PIN_LIMIT = 2;

export type Phase = "loading" | "down" | "ready";

export interface AppState {
  phase: Phase;
  model: ModelDoc | null;
  distribution: DistributionDoc | null;
  /** Raw text per form field, exactly as typed. */
  inputs: Record<string, string>;
  /** Local validation message per field (bad text never leaves the page). */
  fieldErrors: Record<string, string>;
  /** A 422 from the server, pointed at the covariate it named. */
  serverError: { field: string; message: string } | null;
  /** Last prediction applied to the view; kept until a newer one lands. */
  current: Scenario | null;
  /** Pinned scenarios for side-by-side comparison, oldest first. */
  pins: Scenario[];
  /** True when the last request failed in transit: the view shows old data. */
  stale: boolean;
}

export function initialState(): AppState {
  return {
    phase: "loading",
    model: null,
    distribution: null,
    inputs: {},
    fieldErrors: {},
    serverError: null,
    current: null,
    pins: [],
    stale: false,
  };
}

export function canPin(state: AppState): boolean {
  return state.current !== null && state.pins.length < PIN_LIMIT;
}

export function pinCurrent(state: AppState): void {
  if (!canPin(state) || state.current === null) return;
  // Snapshot, so later edits to the live scenario don't reach the pin.
  state.pins.push({
    covariates: { ...state.current.covariates },
    record: state.current.record,
  });
}

export function clearPins(state: AppState): void {
  state.pins = [];
}
