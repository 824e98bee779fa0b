// Typed client for the comixify REST API. All server interaction goes
// through this module so the rest of the app never touches fetch directly.

export interface ServiceOptions {
  frames_mode: string[];
  aesthetic: string[];
  style: string[];
  defaults: { frames_mode: string; aesthetic: string; style: string; k: number };
  constraints: { k_min: number; k_divides_n: boolean };
}

export interface SampleInfo {
  name: string;
  duration_s: number;
  fps: number;
  width: number;
  height: number;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobError {
  stage: string;
  message: string;
  status?: number;
}

export interface JobRecord {
  job_id: string;
  state: JobState;
  pages: string[];
  error: JobError | null;
  request: Record<string, unknown>;
  timings: Record<string, number>;
}

export interface RunOptions {
  frames_mode: string;
  aesthetic: string;
  style: string;
  k: number;
  n: number | null;
}

export type SubmitInput =
  | { kind: "file"; file: File }
  | { kind: "url"; url: string }
  | { kind: "sample"; sample: string };

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (typeof body.detail === "string") return body.detail;
    if (body.error && typeof body.error.message === "string") {
      return `stage ${body.error.stage}: ${body.error.message}`;
    }
    return JSON.stringify(body);
  } catch {
    return resp.statusText;
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async checked(resp: Response): Promise<any> {
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return resp.json();
  }

  async getOptions(): Promise<ServiceOptions> {
    return this.checked(await this.fetchFn(`${this.baseUrl}/api/options`));
  }

  async getSamples(): Promise<SampleInfo[]> {
    return this.checked(await this.fetchFn(`${this.baseUrl}/api/samples`));
  }

  async getJob(jobId: string): Promise<JobRecord> {
    return this.checked(await this.fetchFn(`${this.baseUrl}/api/jobs/${jobId}`));
  }

  async submit(input: SubmitInput, options: RunOptions): Promise<JobRecord> {
    const url = `${this.baseUrl}/api/comixify`;
    let resp: Response;
    if (input.kind === "file") {
      const form = new FormData();
      form.append("video", input.file);
      form.append("frames_mode", options.frames_mode);
      form.append("aesthetic", options.aesthetic);
      form.append("style", options.style);
      form.append("k", String(options.k));
      if (options.n !== null) form.append("n", String(options.n));
      resp = await this.fetchFn(url, { method: "POST", body: form });
    } else {
      const body: Record<string, unknown> = {
        frames_mode: options.frames_mode,
        aesthetic: options.aesthetic,
        style: options.style,
        k: options.k,
      };
      if (options.n !== null) body.n = options.n;
      if (input.kind === "url") body.url = input.url;
      else body.sample = input.sample;
      resp = await this.fetchFn(url, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
    }
    return this.checked(resp);
  }

  pageUrl(path: string): string {
    return `${this.baseUrl}${path}`;
  }
}
