// Pure board model. The server is the source of truth: the model only
// changes when a state record arrives (event stream or /state resync).
// LED #1 is the least-significant bit of the byte value.

export const LED_COUNT = 8;

export interface StateRecord {
  seq: number;
  byte: number;
  leds: boolean[];
  frames_received?: number;
  framing_errors?: number;
}

export type Connection = "connected" | "disconnected";

export interface BoardModel {
  leds: boolean[]; // index 0 holds LED #1
  byteValue: number;
  connection: Connection;
  lastEventSeq: number;
  framesReceived?: number;
  framingErrors?: number;
}

export function initialModel(): BoardModel {
  return {
    leds: new Array(LED_COUNT).fill(false),
    byteValue: 0,
    connection: "disconnected",
    lastEventSeq: -1,
  };
}

export function byteToLeds(byte: number): boolean[] {
  checkByte(byte);
  return Array.from({ length: LED_COUNT }, (_, i) => ((byte >> i) & 1) === 1);
}

export function ledsToByte(leds: boolean[]): number {
  return leds.reduce((acc, on, i) => (on ? acc | (1 << i) : acc), 0);
}

/** MSB-first bit expansion, e.g. 20 -> "00010100". */
export function binaryString(byte: number): string {
  checkByte(byte);
  return byte.toString(2).padStart(LED_COUNT, "0");
}

function checkByte(byte: number): void {
  if (!Number.isInteger(byte) || byte < 0 || byte > 255) {
    throw new RangeError(`byte value must be an integer in 0..255, got ${byte}`);
  }
}

function adopt(model: BoardModel, record: StateRecord): BoardModel {
  return {
    ...model,
    byteValue: record.byte,
    leds: byteToLeds(record.byte), // byte is canonical; keeps leds/byte consistent
    lastEventSeq: record.seq,
    framesReceived: record.frames_received,
    framingErrors: record.framing_errors,
  };
}

/** Apply a live event; duplicates and stale sequence numbers are ignored. */
export function applyEvent(model: BoardModel, record: StateRecord): BoardModel {
  if (record.seq <= model.lastEventSeq) {
    return model;
  }
  return adopt(model, record);
}

/** Adopt a /state snapshot unconditionally (reconnect resync; the server
 * may have restarted with a reset sequence). */
export function applySnapshot(model: BoardModel, record: StateRecord): BoardModel {
  return adopt(model, record);
}

export function setConnection(model: BoardModel, connection: Connection): BoardModel {
  return model.connection === connection ? model : { ...model, connection };
}
