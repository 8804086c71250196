/**
 * Spec editor model: loads a server spec into an editable draft, runs the
 * client-side prechecks, asks the server for authoritative validation, and
 * submits. Drafts survive network failures locally.
 */

import { ApiRequestError, type ApiClient } from './api.js';
import { precheckSpec } from './state.js';
import type { SpecDoc, Violation } from './types.js';

export interface EditorStatus {
  draft: SpecDoc | null;
  violations: Violation[];
  submitted: boolean;
  retryable: boolean;
}

/** Deep-copy a spec so edits never alias the loaded document. */
export function cloneSpec(doc: SpecDoc): SpecDoc {
  return JSON.parse(JSON.stringify(doc)) as SpecDoc;
}

export class SpecEditor {
  private draft: SpecDoc | null = null;

  constructor(private readonly api: ApiClient) {}

  get current(): SpecDoc | null {
    return this.draft;
  }

  async load(specId: string): Promise<SpecDoc> {
    const doc = await this.api.getSpec(specId);
    this.draft = cloneSpec(doc);
    return doc;
  }

  edit(mutate: (draft: SpecDoc) => void): Violation[] {
    if (this.draft === null) {
      throw new Error('no draft loaded');
    }
    mutate(this.draft);
    return precheckSpec(this.draft).map((message) => ({
      category: 'precheck',
      message,
    }));
  }

  async submit(): Promise<EditorStatus> {
    if (this.draft === null) {
      throw new Error('no draft loaded');
    }
    const inline = precheckSpec(this.draft);
    if (inline.length > 0) {
      return {
        draft: this.draft,
        violations: inline.map((message) => ({ category: 'precheck', message })),
        submitted: false,
        retryable: false,
      };
    }
    try {
      const verdict = await this.api.validateSpec(this.draft);
      if (!verdict.ok) {
        return {
          draft: this.draft,
          violations: verdict.violations,
          submitted: false,
          retryable: false,
        };
      }
      await this.api.putSpec(this.draft);
      return { draft: this.draft, violations: [], submitted: true, retryable: false };
    } catch (err) {
      if (err instanceof ApiRequestError) {
        const detail = Array.isArray(err.body.detail)
          ? (err.body.detail as Violation[])
          : [{ category: err.body.code, message: err.body.message }];
        return { draft: this.draft, violations: detail, submitted: false, retryable: false };
      }
      // network failure: draft preserved, offer a retry
      return { draft: this.draft, violations: [], submitted: false, retryable: true };
    }
  }
}
