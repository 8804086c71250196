/**
 * Run console model: polls the run document and the notification feed on one
 * interval and exposes a render-ready view. All numbers shown come straight
 * from API responses.
 */

import type { ApiClient } from './api.js';
import { controlsFor, type PhaseControls } from './state.js';
import type { NotificationDoc, RunDoc, VariantDoc } from './types.js';

export interface VariantRow {
  rank: number | null;
  genome: string[];
  assignment: Record<string, string>;
  fitness: number;
  performance: (number | null)[] | null;
  stale: boolean;
  socialBreakdown: Record<string, number>;
}

export interface ConsoleView {
  runId: string;
  state: string;
  specVersion: number;
  diagnostic: string | null;
  inceptedId: string | null;
  controls: PhaseControls;
  variants: VariantRow[];
  hasStaleVariants: boolean;
  alarms: NotificationDoc[];
}

function toRow(v: VariantDoc): VariantRow {
  return {
    rank: v.rank,
    genome: v.genome,
    assignment: v.assignment,
    fitness: v.fitness,
    performance: v.performance,
    stale: v.stale,
    socialBreakdown: v.social_breakdown,
  };
}

export function buildView(run: RunDoc, alarms: NotificationDoc[]): ConsoleView {
  const variants = run.variants.map(toRow);
  return {
    runId: run.run_id,
    state: run.state,
    specVersion: run.spec_version,
    diagnostic: run.diagnostic,
    inceptedId: run.incepted_id,
    controls: controlsFor(run.state),
    variants,
    hasStaleVariants: variants.some((v) => v.stale),
    alarms,
  };
}

export class RunConsole {
  private timer: ReturnType<typeof setInterval> | null = null;
  private cursor = 0;
  private alarms: NotificationDoc[] = [];
  private lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly runId: string,
    private readonly onRender: (view: ConsoleView) => void,
    private readonly pollIntervalMs = 1000,
  ) {}

  get error(): string | null {
    return this.lastError;
  }

  start(): void {
    if (this.timer !== null) {
      return;
    }
    this.timer = setInterval(() => {
      void this.refresh();
    }, this.pollIntervalMs);
    void this.refresh();
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** One polling tick: re-read the run and drain the notification feed. */
  async refresh(): Promise<void> {
    try {
      const run = await this.api.getRun(this.runId);
      const feed = await this.api.notifications(this.cursor);
      this.cursor = feed.cursor;
      this.alarms = [...this.alarms, ...feed.notifications];
      this.lastError = null;
      this.onRender(buildView(run, this.alarms));
    } catch (err) {
      // stale-state rejections and transient failures: keep polling, the
      // next tick refreshes the authoritative state
      this.lastError = err instanceof Error ? err.message : String(err);
    }
  }

  async advance(): Promise<void> {
    await this.api.advanceRun(this.runId);
    await this.refresh();
  }

  async loopBack(target: string): Promise<void> {
    await this.api.loopBack(this.runId, target);
    await this.refresh();
  }

  async incept(genome?: string[], overrideStale = false): Promise<string> {
    const result = await this.api.incept(this.runId, genome, overrideStale);
    await this.refresh();
    return result.vo_id;
  }
}
