/**
 * Thin typed client for the /v1 API. The fetch implementation is injectable
 * so tests can script server behaviour without a network.
 */

import type {
  NotificationDoc,
  RunDoc,
  SpecDoc,
  VariantDoc,
  Violation,
} from './types.js';

export type FetchLike = (
  input: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface ApiError {
  code: string;
  message: string;
  detail: unknown;
}

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiError,
  ) {
    super(body.message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1${path}`, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, payload as ApiError);
    }
    return payload as T;
  }

  getSpec(specId: string): Promise<SpecDoc> {
    return this.request('GET', `/specs/${encodeURIComponent(specId)}`);
  }

  putSpec(doc: SpecDoc): Promise<{ id: string }> {
    return this.request('POST', '/specs', doc);
  }

  validateSpec(doc: SpecDoc): Promise<{ ok: boolean; violations: Violation[] }> {
    return this.request('POST', '/specs/validate', doc);
  }

  startRun(specId: string, gaConfig?: Record<string, unknown>, oracle = false) {
    return this.request<RunDoc>('POST', '/runs', {
      spec_id: specId,
      ga_config: gaConfig ?? {},
      oracle,
    });
  }

  getRun(runId: string): Promise<RunDoc> {
    return this.request('GET', `/runs/${encodeURIComponent(runId)}`);
  }

  advanceRun(runId: string): Promise<RunDoc> {
    return this.request('POST', `/runs/${encodeURIComponent(runId)}/advance`);
  }

  loopBack(runId: string, targetState: string, amendment?: SpecDoc) {
    return this.request<RunDoc>(
      'POST',
      `/runs/${encodeURIComponent(runId)}/loopback`,
      { target_state: targetState, amendment: amendment ?? null },
    );
  }

  incept(runId: string, genome?: string[], overrideStale = false) {
    return this.request<{ vo_id: string; run: RunDoc }>(
      'POST',
      `/runs/${encodeURIComponent(runId)}/incept`,
      { genome: genome ?? null, override_stale: overrideStale },
    );
  }

  variants(runId: string): Promise<{ variants: VariantDoc[] }> {
    return this.request('GET', `/runs/${encodeURIComponent(runId)}/variants`);
  }

  notifications(cursor: number) {
    return this.request<{ notifications: NotificationDoc[]; cursor: number }>(
      'GET',
      `/notifications?cursor=${cursor}`,
    );
  }
}
