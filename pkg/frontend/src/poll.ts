/** Poll a detection job until it leaves the queued/running states. */

import type { ServiceClient } from "./api";
import type { JobView } from "./types";

export async function pollJob(
  client: ServiceClient,
  jobId: string,
  opts: { intervalMs?: number; timeoutMs?: number; onUpdate?: (job: JobView) => void } = {},
): Promise<JobView> {
  const intervalMs = opts.intervalMs ?? 500;
  const timeoutMs = opts.timeoutMs ?? 120_000;
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const job = await client.getJob(jobId);
    opts.onUpdate?.(job);
    if (job.state === "done" || job.state === "failed") {
      return job;
    }
    if (Date.now() >= deadline) {
      throw new Error(`job ${jobId} still ${job.state} after ${timeoutMs}ms`);
    }
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
}
