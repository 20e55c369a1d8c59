import {
  ApiError,
  createSession,
  getSession,
  submitAnswer,
  type CreateParams,
  type SessionState,
} from "./api.js";
import { copyToClipboard } from "./clipboard.js";
import { render, type Handlers, type ViewModel } from "./view.js";

export type AppOptions = {
  baseUrl?: string;
  params?: CreateParams;
};

export class ElicitationApp {
  readonly root: HTMLElement;
  private readonly baseUrl: string;
  private readonly params: CreateParams;
  private state: SessionState | null = null;
  private busy = false;
  private error: string | null = null;
  private copied = false;
  private readonly handlers: Handlers;

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.root = root;
    this.baseUrl = options.baseUrl ?? "";
    this.params = options.params ?? {};
    this.handlers = {
      onChoose: (choice) => void this.choose(choice),
      onRetry: () => void this.retry(),
      onCopy: (text) => void this.copy(text),
    };
  }

  get sessionState(): SessionState | null {
    return this.state;
  }

  async start(): Promise<void> {
    this.render();
    try {
      this.state = await createSession(this.params, this.baseUrl);
      this.error = null;
    } catch (err) {
      this.error = describe(err);
    }
    this.render();
  }

  private async choose(choice: "A" | "B"): Promise<void> {
    const state = this.state;
    if (this.busy || !state || state.status !== "active" || !state.question) {
      return;
    }
    this.busy = true;
    this.render();
    try {
      this.state = await submitAnswer(
        state.session_id,
        state.question.question_id,
        choice,
        this.baseUrl
      );
      this.error = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // stale question: someone answered elsewhere; resync to the
        // server's view instead of surfacing an error
        try {
          this.state = await getSession(state.session_id, this.baseUrl);
          this.error = null;
        } catch (refetchErr) {
          this.error = describe(refetchErr);
        }
      } else {
        this.error = describe(err);
      }
    } finally {
      this.busy = false;
    }
    this.render();
  }

  private async retry(): Promise<void> {
    if (this.state === null) {
      await this.start();
      return;
    }
    try {
      this.state = await getSession(this.state.session_id, this.baseUrl);
      this.error = null;
    } catch (err) {
      this.error = describe(err);
    }
    this.render();
  }

  private async copy(text: string): Promise<void> {
    try {
      await copyToClipboard(text);
      this.copied = true;
    } catch {
      this.copied = false;
    }
    this.render();
  }

  private render(): void {
    const model: ViewModel = {
      state: this.state,
      busy: this.busy,
      error: this.error,
      copied: this.copied,
    };
    render(this.root, model, this.handlers);
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `Request failed (${err.status}): ${err.message}`;
  }
  if (err instanceof Error) {
    return `Cannot reach the elicitation service: ${err.message}`;
  }
  return "Cannot reach the elicitation service.";
}
