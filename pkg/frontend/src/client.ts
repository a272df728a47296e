// Service client: subscribes to the /events stream, resyncs from /state,
// and sends commands. Network primitives are injectable for tests.

import {
  BoardModel,
  StateRecord,
  applyEvent,
  applySnapshot,
  initialModel,
  setConnection,
} from "./model.js";

export interface EventSourceLike {
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onerror: (() => void) | null;
  close(): void;
}

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<ResponseLike>;

export interface BoardClientOptions {
  apiBase: string;
  onChange?: (model: BoardModel) => void;
  onError?: (message: string) => void;
  fetchFn?: FetchLike;
  eventSourceFactory?: (url: string) => EventSourceLike;
  baseDelayMs?: number;
  maxDelayMs?: number;
}

const DEFAULT_BASE_DELAY_MS = 500;
const DEFAULT_MAX_DELAY_MS = 15000;

export class BoardClient {
  model: BoardModel = initialModel();

  private readonly apiBase: string;
  private readonly onChange: (model: BoardModel) => void;
  private readonly onError: (message: string) => void;
  private readonly fetchFn: FetchLike;
  private readonly makeEventSource: (url: string) => EventSourceLike;
  private readonly baseDelayMs: number;
  private readonly maxDelayMs: number;

  private es: EventSourceLike | null = null;
  private attempt = 0;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;

  constructor(options: BoardClientOptions) {
    this.apiBase = options.apiBase.replace(/\/$/, "");
    this.onChange = options.onChange ?? (() => {});
    this.onError = options.onError ?? (() => {});
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
    this.makeEventSource =
      options.eventSourceFactory ?? ((url) => new EventSource(url) as unknown as EventSourceLike);
    this.baseDelayMs = options.baseDelayMs ?? DEFAULT_BASE_DELAY_MS;
    this.maxDelayMs = options.maxDelayMs ?? DEFAULT_MAX_DELAY_MS;
  }

  connect(): void {
    this.stopped = false;
    this.openStream();
  }

  close(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    this.es?.close();
    this.es = null;
    this.update(setConnection(this.model, "disconnected"));
  }

  /** Pull /state and adopt it; used on every (re)connect. */
  async resync(): Promise<void> {
    try {
      const resp = await this.fetchFn(`${this.apiBase}/state`);
      if (!resp.ok) {
        throw new Error(`GET /state returned ${resp.status}`);
      }
      const record = (await resp.json()) as StateRecord;
      this.update(applySnapshot(this.model, record));
    } catch (err) {
      this.onError(`resync failed: ${String(err)}`);
    }
  }

  async toggleLed(n: number): Promise<void> {
    await this.ledAction(n, "toggle");
  }

  async setLed(n: number, on: boolean): Promise<void> {
    await this.ledAction(n, on ? "on" : "off");
  }

  async ledAction(n: number, action: "on" | "off" | "toggle"): Promise<void> {
    await this.post(`/led/${n}`, { action });
  }

  async sendByte(value: number): Promise<void> {
    await this.post("/byte", { value });
  }

  private async post(path: string, payload: unknown): Promise<void> {
    if (this.model.connection !== "connected") {
      return; // never emit commands while disconnected
    }
    try {
      const resp = await this.fetchFn(`${this.apiBase}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      });
      if (!resp.ok) {
        const detail = await resp
          .json()
          .then((body) => (body as { error?: string }).error ?? "")
          .catch(() => "");
        throw new Error(`${resp.status} ${detail}`.trim());
      }
      // The model updates from the matching /events record, not from here.
    } catch (err) {
      this.onError(`command failed: ${String(err)}`);
    }
  }

  private openStream(): void {
    this.es?.close();
    const es = this.makeEventSource(`${this.apiBase}/events`);
    this.es = es;
    es.onopen = () => {
      this.attempt = 0;
      this.update(setConnection(this.model, "connected"));
      void this.resync();
    };
    es.onmessage = (ev) => {
      let record: StateRecord;
      try {
        record = JSON.parse(ev.data) as StateRecord;
      } catch {
        return;
      }
      this.update(applyEvent(this.model, record));
    };
    es.onerror = () => {
      es.close();
      if (this.es === es) {
        this.es = null;
      }
      this.update(setConnection(this.model, "disconnected"));
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.stopped || this.reconnectTimer !== null) {
      return;
    }
    const delay = Math.min(this.baseDelayMs * 2 ** this.attempt, this.maxDelayMs);
    this.attempt += 1;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      if (!this.stopped) {
        this.openStream();
      }
    }, delay);
  }

  private update(next: BoardModel): void {
    if (next !== this.model) {
      this.model = next;
      this.onChange(next);
    }
  }
}
