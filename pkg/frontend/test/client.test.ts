import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { BoardClient, EventSourceLike, FetchLike, ResponseLike } from "../src/client.js";
import { byteToLeds, StateRecord } from "../src/model.js";

class FakeEventSource implements EventSourceLike {
  static instances: FakeEventSource[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  constructor(public url: string) {
    FakeEventSource.instances.push(this);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  emit(record: StateRecord): void {
    this.onmessage?.({ data: JSON.stringify(record) });
  }

  fail(): void {
    this.onerror?.();
  }
}

interface SentRequest {
  url: string;
  method: string;
  body: unknown;
}

function jsonResponse(payload: unknown, status = 200): ResponseLike {
  return {
    ok: status < 400,
    status,
    json: () => Promise.resolve(payload),
  };
}

function record(seq: number, byte: number): StateRecord {
  return { seq, byte, leds: byteToLeds(byte) };
}

let sent: SentRequest[];
let stateResponse: StateRecord;
let failPosts: boolean;

const fakeFetch: FetchLike = (url, init) => {
  const method = init?.method ?? "GET";
  sent.push({ url, method, body: init?.body ? JSON.parse(init.body) : undefined });
  if (method === "GET") {
    return Promise.resolve(jsonResponse(stateResponse));
  }
  if (failPosts) {
    return Promise.resolve(jsonResponse({ error: "board unplugged" }, 503));
  }
  return Promise.resolve(jsonResponse(record(99, 0)));
};

function newClient(extra: Partial<ConstructorParameters<typeof BoardClient>[0]> = {}) {
  return new BoardClient({
    apiBase: "http://api.test",
    fetchFn: fakeFetch,
    eventSourceFactory: (url) => new FakeEventSource(url),
    baseDelayMs: 100,
    ...extra,
  });
}

function lastStream(): FakeEventSource {
  const es = FakeEventSource.instances.at(-1);
  if (!es) throw new Error("no event source opened");
  return es;
}

async function settle(): Promise<void> {
  await Promise.resolve();
  await Promise.resolve();
}

beforeEach(() => {
  FakeEventSource.instances = [];
  sent = [];
  stateResponse = record(0, 0);
  failPosts = false;
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("connect", () => {
  it("subscribes to /events and resyncs from /state on open", async () => {
    const client = newClient();
    client.connect();
    expect(lastStream().url).toBe("http://api.test/events");

    stateResponse = record(3, 20);
    lastStream().open();
    await settle();

    expect(client.model.connection).toBe("connected");
    expect(client.model.byteValue).toBe(20);
    expect(sent).toEqual([{ url: "http://api.test/state", method: "GET", body: undefined }]);
  });

  it("applies stream events in order", async () => {
    const client = newClient();
    client.connect();
    lastStream().open();
    await settle();

    [20, 0, 255].forEach((byte, i) => lastStream().emit(record(i + 1, byte)));
    expect(client.model.byteValue).toBe(255);
    expect(client.model.leds).toEqual(new Array(8).fill(true));
  });

  it("notifies onChange for every model change", async () => {
    const seen: number[] = [];
    const client = newClient({ onChange: (m) => seen.push(m.byteValue) });
    client.connect();
    lastStream().open();
    await settle();
    lastStream().emit(record(1, 18));
    lastStream().emit(record(2, 82));
    expect(seen.at(-1)).toBe(82);
    expect(client.model.byteValue).toBe(82);
  });
});

describe("commands", () => {
  it("toggle posts to /led/{n} and leaves the model to the event stream", async () => {
    const client = newClient();
    client.connect();
    lastStream().open();
    await settle();
    lastStream().emit(record(1, 18));

    await client.toggleLed(7);
    expect(sent.at(-1)).toEqual({
      url: "http://api.test/led/7",
      method: "POST",
      body: { action: "toggle" },
    });
    expect(client.model.byteValue).toBe(18); // unchanged until the event lands
    lastStream().emit(record(2, 82));
    expect(client.model.byteValue).toBe(82);
  });

  it("emits nothing while disconnected", async () => {
    const client = newClient();
    await client.toggleLed(7);
    await client.sendByte(255);
    expect(sent).toEqual([]);
  });

  it("surfaces command failures and keeps the model unchanged", async () => {
    const errors: string[] = [];
    const client = newClient({ onError: (m) => errors.push(m) });
    client.connect();
    lastStream().open();
    await settle();
    lastStream().emit(record(1, 20));

    failPosts = true;
    await client.sendByte(255);
    expect(errors.length).toBe(1);
    expect(errors[0]).toContain("board unplugged");
    expect(client.model.byteValue).toBe(20);
  });

  it("sends raw bytes via /byte", async () => {
    const client = newClient();
    client.connect();
    lastStream().open();
    await settle();
    await client.sendByte(255);
    expect(sent.at(-1)).toEqual({
      url: "http://api.test/byte",
      method: "POST",
      body: { value: 255 },
    });
  });
});

describe("reconnect", () => {
  it("marks the model disconnected when the stream drops", async () => {
    const client = newClient();
    client.connect();
    lastStream().open();
    await settle();
    lastStream().fail();
    expect(client.model.connection).toBe("disconnected");
  });

  it("resyncs to GET /state after the stream is re-established", async () => {
    const client = newClient();
    client.connect();
    lastStream().open();
    await settle();
    lastStream().emit(record(1, 18));

    lastStream().fail(); // dropped stream
    // board changed while we were away
    stateResponse = record(7, 82);
    await vi.advanceTimersByTimeAsync(100);

    expect(FakeEventSource.instances.length).toBe(2);
    lastStream().open();
    await settle();

    expect(client.model.connection).toBe("connected");
    expect(client.model.byteValue).toBe(82);
    expect(client.model.lastEventSeq).toBe(7);
  });

  it("backs off exponentially between attempts", async () => {
    const client = newClient();
    client.connect();
    lastStream().open();
    await settle();

    lastStream().fail();
    await vi.advanceTimersByTimeAsync(100); // attempt 1 after base delay
    expect(FakeEventSource.instances.length).toBe(2);

    lastStream().fail();
    await vi.advanceTimersByTimeAsync(100); // too early for attempt 2
    expect(FakeEventSource.instances.length).toBe(2);
    await vi.advanceTimersByTimeAsync(100); // 200 ms total
    expect(FakeEventSource.instances.length).toBe(3);
  });

  it("stops reconnecting after close()", async () => {
    const client = newClient();
    client.connect();
    lastStream().open();
    await settle();
    lastStream().fail();
    client.close();
    await vi.advanceTimersByTimeAsync(60_000);
    expect(FakeEventSource.instances.length).toBe(1);
    expect(client.model.connection).toBe("disconnected");
  });
});
