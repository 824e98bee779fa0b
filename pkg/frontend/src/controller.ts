// UI state machine, free of DOM concerns so the whole flow is testable.
// The view layer renders whatever viewModel() returns and forwards events.

import {
  ApiClient,
  ApiError,
  JobRecord,
  RunOptions,
  ServiceOptions,
  SampleInfo,
  SubmitInput,
} from "./api.js";
import { RunGallery, RunView } from "./gallery.js";
import { JobPoller } from "./poller.js";
import { FormState, validateForm } from "./validation.js";

export interface UiJobView {
  jobId: string;
  state: string;
  stageLabel: string;
  pageUrls: string[]; // only populated once state === "done"
  options: RunOptions;
}

export interface Banner {
  kind: "error" | "info";
  text: string;
}

export interface ViewModel {
  ready: boolean;
  busy: boolean;
  canSubmit: boolean;
  validationErrors: string[];
  banner: Banner | null;
  current: UiJobView | null;
  previous: UiJobView | null;
  gallery: RunView[];
  options: ServiceOptions | null;
  samples: SampleInfo[];
}

function stageLabel(record: JobRecord): string {
  if (record.state === "done") return "done";
  if (record.state === "failed") {
    return record.error ? `failed at ${record.error.stage}` : "failed";
  }
  const stages = Object.keys(record.timings ?? {});
  if (record.state === "running") {
    return stages.length > 0 ? `running: ${stages[stages.length - 1]}` : "running";
  }
  return record.state;
}

export class UiController {
  form: FormState = { file: null, url: "", sample: "", k: 8, n: null };
  runOptions: RunOptions = {
    frames_mode: "basic",
    aesthetic: "nima",
    style: "comixgan",
    k: 8,
    n: null,
  };

  private options: ServiceOptions | null = null;
  private samples: SampleInfo[] = [];
  private banner: Banner | null = null;
  private current: UiJobView | null = null;
  private previous: UiJobView | null = null;
  private gallery = new RunGallery();
  private busy = false;
  private lastInput: SubmitInput | null = null;
  private lastOptions: RunOptions | null = null;
  private poller: JobPoller | null = null;
  private listeners: Array<() => void> = [];

  constructor(
    private api: ApiClient,
    private pollIntervalMs = 1000,
    private confirmFn: (question: string) => boolean = () => true,
  ) {}

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** Load option enums and samples from the service (single source of truth). */
  async init(): Promise<void> {
    this.options = await this.api.getOptions();
    this.samples = await this.api.getSamples();
    this.runOptions = {
      frames_mode: this.options.defaults.frames_mode,
      aesthetic: this.options.defaults.aesthetic,
      style: this.options.defaults.style,
      k: this.options.defaults.k,
      n: null,
    };
    this.form.k = this.options.defaults.k;
    this.notify();
  }

  viewModel(): ViewModel {
    const validation = validateForm(this.form);
    return {
      ready: this.options !== null,
      busy: this.busy,
      canSubmit: validation.ok && !this.busy && this.options !== null,
      validationErrors: validation.errors,
      banner: this.banner,
      current: this.current,
      previous: this.previous,
      gallery: this.gallery.list(),
      options: this.options,
      samples: this.samples,
    };
  }

  setInput(input: Partial<FormState>): void {
    Object.assign(this.form, input);
    this.notify();
  }

  setRunOption<K extends keyof RunOptions>(key: K, value: RunOptions[K]): void {
    this.runOptions[key] = value;
    if (key === "k") this.form.k = value as number;
    if (key === "n") this.form.n = value as number | null;
    this.notify();
  }

  private currentInput(): SubmitInput | null {
    if (this.form.file !== null) return { kind: "file", file: this.form.file };
    if (this.form.url.trim() !== "") return { kind: "url", url: this.form.url.trim() };
    if (this.form.sample !== "") return { kind: "sample", sample: this.form.sample };
    return null;
  }

  /** Validate, POST, then poll to completion. Resolves with the view. */
  async submitForm(): Promise<UiJobView> {
    const validation = validateForm(this.form);
    if (!validation.ok) {
      this.banner = { kind: "error", text: validation.errors.join("; ") };
      this.notify();
      throw new Error(validation.errors.join("; "));
    }
    const input = this.currentInput()!;
    const options = { ...this.runOptions, k: this.form.k, n: this.form.n };
    return this.launch(input, options, false);
  }

  /** Re-run the retained input with (possibly) changed options. */
  async rerunWith(changes: Partial<RunOptions>): Promise<UiJobView> {
    if (this.lastInput === null || this.lastOptions === null) {
      throw new Error("nothing to re-run yet");
    }
    const options = { ...this.lastOptions, ...changes };
    const unchanged = JSON.stringify(options) === JSON.stringify(this.lastOptions);
    if (unchanged && !this.confirmFn("options unchanged - run again anyway?")) {
      throw new Error("re-run cancelled");
    }
    return this.launch(this.lastInput, options, true);
  }

  private async launch(
    input: SubmitInput,
    options: RunOptions,
    isRerun: boolean,
  ): Promise<UiJobView> {
    this.poller?.cancel();
    this.busy = true;
    this.banner = null;
    if (isRerun && this.current?.state === "done") {
      this.previous = this.current;
    } else if (!isRerun) {
      this.previous = null;
    }
    this.notify();

    let record: JobRecord;
    try {
      record = await this.api.submit(input, options);
    } catch (err) {
      this.busy = false;
      const text = err instanceof ApiError ? err.detail : String(err);
      this.banner = { kind: "error", text };
      this.notify();
      throw err;
    }

    this.lastInput = input;
    this.lastOptions = options;
    this.current = this.toView(record, options);
    this.notify();

    this.poller = new JobPoller(this.api, this.pollIntervalMs);
    try {
      record = await this.poller.waitForCompletion(record.job_id, (update) => {
        this.current = this.toView(update, options);
        this.notify();
      });
    } finally {
      this.busy = false;
    }

    this.current = this.toView(record, options);
    if (record.state === "failed") {
      const stage = record.error?.stage ?? "unknown";
      const message = record.error?.message ?? "pipeline failure";
      this.banner = { kind: "error", text: `failed at stage ${stage}: ${message}` };
    } else {
      this.gallery.add({
        jobId: record.job_id,
        label: `${options.style} / ${options.aesthetic} / k=${options.k}`,
        pageUrls: this.current.pageUrls,
        options: { ...options },
        finishedAt: Date.now(),
      });
    }
    this.notify();
    return this.current;
  }

  private toView(record: JobRecord, options: RunOptions): UiJobView {
    return {
      jobId: record.job_id,
      state: record.state,
      stageLabel: stageLabel(record),
      // results are only ever exposed for finished jobs
      pageUrls:
        record.state === "done"
          ? (record.pages ?? []).map((p) => this.api.pageUrl(p))
          : [],
      options,
    };
  }
}
