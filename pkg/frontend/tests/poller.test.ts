import assert from "node:assert/strict";
import { test } from "node:test";

import { ApiClient } from "../src/api.js";
import { JobPoller } from "../src/poller.js";
import { FakeService, baseRecord } from "./fakes.js";

test("polls until the job is done", async () => {
  const service = new FakeService({
    pollStates: [
      { state: "queued" },
      { state: "running" },
      { state: "done", pages: ["/results/job-1/page_001.png"] },
    ],
  });
  const api = new ApiClient("http://fake", service.fetch);
  const poller = new JobPoller(api, 1);
  const seen: string[] = [];
  const record = await poller.waitForCompletion("job-1", (r) => seen.push(r.state));
  assert.equal(record.state, "done");
  assert.deepEqual(seen, ["queued", "running", "done"]);
  assert.equal(service.polls, 3);
});

test("resolves on failed jobs too", async () => {
  const service = new FakeService({
    pollStates: [{ state: "failed", error: { stage: "acquire", message: "boom" } }],
  });
  const api = new ApiClient("http://fake", service.fetch);
  const record = await new JobPoller(api, 1).waitForCompletion("job-1");
  assert.equal(record.state, "failed");
  assert.equal(record.error?.stage, "acquire");
});

test("cancel stops the loop", async () => {
  const service = new FakeService({ pollStates: [{ state: "running" }] });
  const api = new ApiClient("http://fake", service.fetch);
  const poller = new JobPoller(api, 5);
  const pending = poller.waitForCompletion("job-1");
  setTimeout(() => poller.cancel(), 12);
  await assert.rejects(pending, /cancelled/);
  const pollsAtCancel = service.polls;
  await new Promise((r) => setTimeout(r, 30));
  assert.equal(service.polls, pollsAtCancel);
});

test("never reports pages before done", async () => {
  const service = new FakeService({
    pollStates: [
      // a buggy server might leak pages early; the view layer must not show
      // them, but the raw record passes through untouched here
      { state: "running", pages: [] },
      { state: "done", pages: ["/results/job-1/page_001.png"] },
    ],
  });
  const api = new ApiClient("http://fake", service.fetch);
  const states: Array<[string, number]> = [];
  const record = await new JobPoller(api, 1).waitForCompletion("job-1", (r) =>
    states.push([r.state, r.pages.length]),
  );
  assert.deepEqual(states[0], ["running", 0]);
  assert.equal(record.pages.length, 1);
});

test(
  "default interval is one second",
  async () => {
    const { DEFAULT_POLL_INTERVAL_MS } = await import("../src/poller.js");
    assert.equal(DEFAULT_POLL_INTERVAL_MS, 1000);
  },
);
