// Client-side memory of recent completed runs for what-if comparison.

export interface RunView {
  jobId: string;
  label: string;
  pageUrls: string[];
  options: Record<string, unknown>;
  finishedAt: number;
}

export const GALLERY_LIMIT = 5;

export class RunGallery {
  private runs: RunView[] = [];

  add(run: RunView): void {
    this.runs.unshift(run);
    if (this.runs.length > GALLERY_LIMIT) {
      this.runs.length = GALLERY_LIMIT;
    }
  }

  list(): RunView[] {
    return [...this.runs];
  }

  get size(): number {
    return this.runs.length;
  }
}
