// The app talks to the server through this narrow seam so tests (and the
// fixture demo) can swap in canned responses without a network stack.

export interface TransportResponse {
  status: number;
  body: string;
}

export interface Transport {
  get(path: string): Promise<TransportResponse>;
  post(path: string, body: string): Promise<TransportResponse>;
}

export class HttpTransport implements Transport {
  constructor(private readonly base: string = "") {}

  async get(path: string): Promise<TransportResponse> {
    const resp = await fetch(this.base + path, { method: "GET" });
    return { status: resp.status, body: await resp.text() };
  }

  async post(path: string, body: string): Promise<TransportResponse> {
    const resp = await fetch(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body,
    });
    return { status: resp.status, body: await resp.text() };
  }
}

/** One canned POST /predict exchange, matched on the covariate values sent. */
export interface PredictExchange {
  covariates: Record<string, number>;
  status: number;
  body: string;
}

export interface FixtureSet {
  model: string;
  distribution: string;
  predicts: PredictExchange[];
}

function sameCovariates(
  a: Record<string, number>,
  b: Record<string, number>,
): boolean {
  const ka = Object.keys(a).sort();
  const kb = Object.keys(b).sort();
  if (ka.length !== kb.length) return false;
  return ka.every((k, i) => k === kb[i] && Object.is(a[k], b[k]));
}

/**
 * Serves responses from a fixture set. GETs are matched on path; POSTs to
 * the predict endpoint are matched on the covariates in the request body.
 * Set `offline` to make every call reject, as a dead server would.
 */
export class MockTransport implements Transport {
  offline = false;
  calls: Array<{ method: string; path: string; body?: string }> = [];

  constructor(private readonly fixtures: FixtureSet) {}

  async get(path: string): Promise<TransportResponse> {
    this.calls.push({ method: "GET", path });
    if (this.offline) throw new TypeError("fetch failed");
    if (path === "/api/v1/model") {
      return { status: 200, body: this.fixtures.model };
    }
    if (path === "/api/v1/neff-distribution") {
      return { status: 200, body: this.fixtures.distribution };
    }
    return { status: 404, body: notFound(path) };
  }

  async post(path: string, body: string): Promise<TransportResponse> {
    this.calls.push({ method: "POST", path, body });
    if (this.offline) throw new TypeError("fetch failed");
    if (path !== "/api/v1/predict") {
      return { status: 404, body: notFound(path) };
    }
    // Enforce the same request envelope as the live server, so a client
    // that sends the wrong shape fails here too.
    const sent = JSON.parse(body) as { covariates?: unknown };
    if (typeof sent.covariates !== "object" || sent.covariates === null) {
      return {
        status: 400,
        body: JSON.stringify({
          status: 400,
          code: "MalformedBody",
          message: "body must be an object with a 'covariates' object",
          field: null,
        }),
      };
    }
    const covariates = sent.covariates as Record<string, number>;
    for (const exchange of this.fixtures.predicts) {
      if (sameCovariates(exchange.covariates, covariates)) {
        return { status: exchange.status, body: exchange.body };
      }
    }
    throw new Error(`no fixture for POST ${path} ${body}`);
  }
}

function notFound(path: string): string {
  return JSON.stringify({
    status: 404,
    code: "NotFound",
    message: `no route for ${path}`,
    field: null,
  });
}
