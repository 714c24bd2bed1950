// Loads the golden API byte captures shared with the server test suite, so
// the explorer is exercised against exactly what the live API would send.
import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";

import type { FixtureSet } from "../src/transport.js";

const here = dirname(fileURLToPath(import.meta.url));
const goldenDir = resolve(here, "..", "..", "tests", "golden", "api");

export function golden(name: string): string {
  return readFileSync(resolve(goldenDir, `${name}.json`), "utf8");
}

/** Two-group logistic model: binary covariate x, n_eff = 10 in both arms. */
export function gFixtures(): FixtureSet {
  return {
    model: golden("g_model_doc"),
    distribution: golden("g_distribution"),
    predicts: [
      { covariates: { x: 0 }, status: 200, body: golden("g_predict_x0") },
      { covariates: { x: 1 }, status: 200, body: golden("g_predict_x1") },
      { covariates: { x: 2 }, status: 422, body: golden("g_predict_x2_error") },
    ],
  };
}

/** Three-point gaussian model: continuous x, extrapolation beyond x = 2. */
export function d1Fixtures(): FixtureSet {
  return {
    model: golden("d1_model_doc"),
    distribution: golden("d1_distribution"),
    predicts: [
      { covariates: { x: 1 }, status: 200, body: golden("d1_predict_x1") },
      { covariates: { x: 4 }, status: 200, body: golden("d1_predict_x4") },
    ],
  };
}
