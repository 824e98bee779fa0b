// Polls one job until it reaches a terminal state. One poller per
// submission; cancel() stops the loop and settles the pending promise
// (used when a new run supersedes an old one or the view goes away).

import { ApiClient, JobRecord } from "./api.js";

export const DEFAULT_POLL_INTERVAL_MS = 1000;

export class JobPoller {
  private cancelled = false;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private rejectPending: ((err: Error) => void) | null = null;

  constructor(
    private api: ApiClient,
    private intervalMs: number = DEFAULT_POLL_INTERVAL_MS,
  ) {}

  cancel(): void {
    this.cancelled = true;
    if (this.timer !== null) clearTimeout(this.timer);
    if (this.rejectPending !== null) {
      const reject = this.rejectPending;
      this.rejectPending = null;
      reject(new Error("polling cancelled"));
    }
  }

  /** Resolves with the terminal record; onUpdate fires on every poll. */
  waitForCompletion(
    jobId: string,
    onUpdate?: (record: JobRecord) => void,
  ): Promise<JobRecord> {
    return new Promise((resolve, reject) => {
      this.rejectPending = reject;
      const settle = <T>(fn: (value: T) => void, value: T) => {
        this.rejectPending = null;
        fn(value);
      };
      const tick = async () => {
        if (this.cancelled) return; // cancel() already rejected
        let record: JobRecord;
        try {
          record = await this.api.getJob(jobId);
        } catch (err) {
          if (!this.cancelled) settle(reject, err as Error);
          return;
        }
        if (this.cancelled) return;
        if (onUpdate) onUpdate(record);
        if (record.state === "done" || record.state === "failed") {
          settle(resolve, record);
          return;
        }
        this.timer = setTimeout(tick, this.intervalMs);
      };
      void tick();
    });
  }
}
