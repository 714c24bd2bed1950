import type {
  ApiError,
  DistributionDoc,
  ModelDoc,
  PredictRecord,
} from "./types.js";
import type { Transport } from "./transport.js";

/** The server answered with an error envelope (422 bad input, 404, ...). */
export class ApiFailure extends Error {
  constructor(readonly error: ApiError) {
    super(`${error.code}: ${error.message}`);
    this.name = "ApiFailure";
  }
}

function parseError(status: number, body: string): ApiError {
  try {
    const doc = JSON.parse(body) as Partial<ApiError>;
    if (typeof doc.code === "string" && typeof doc.message === "string") {
      return {
        status,
        code: doc.code,
        message: doc.message,
        field: typeof doc.field === "string" ? doc.field : null,
      };
    }
  } catch {
    // fall through to the generic envelope
  }
  return { status, code: "UnexpectedResponse", message: body, field: null };
}

export class ApiClient {
  constructor(private readonly transport: Transport) {}

  async model(): Promise<ModelDoc> {
    return this.getJson<ModelDoc>("/api/v1/model");
  }

  async distribution(): Promise<DistributionDoc> {
    return this.getJson<DistributionDoc>("/api/v1/neff-distribution");
  }

  async predict(covariates: Record<string, number>): Promise<PredictRecord> {
    const resp = await this.transport.post(
      "/api/v1/predict",
      JSON.stringify({ covariates }),
    );
    if (resp.status !== 200) {
      throw new ApiFailure(parseError(resp.status, resp.body));
    }
    return JSON.parse(resp.body) as PredictRecord;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.transport.get(path);
    if (resp.status !== 200) {
      throw new ApiFailure(parseError(resp.status, resp.body));
    }
    return JSON.parse(resp.body) as T;
  }
}
