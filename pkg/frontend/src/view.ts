// DOM rendering for the control console: 8 labeled LED toggles, the
// byte value in decimal and binary, a raw-byte form, connection badge.

import { BoardModel, LED_COUNT, binaryString } from "./model.js";

export interface ViewCallbacks {
  onToggle(n: number): void;
  onSendByte(value: number): void;
}

interface LedCell {
  indicator: HTMLSpanElement;
  button: HTMLButtonElement;
}

export class ConsoleView {
  private readonly badge: HTMLSpanElement;
  private readonly byteText: HTMLSpanElement;
  private readonly counters: HTMLSpanElement;
  private readonly banner: HTMLDivElement;
  private readonly cells: LedCell[] = [];
  private readonly rawInput: HTMLInputElement;
  private readonly rawButton: HTMLButtonElement;
  private bannerTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(root: HTMLElement, callbacks: ViewCallbacks) {
    root.innerHTML = "";

    const header = el("div", "header");
    header.append(el("h1", "", "LED Board Control Console"));
    this.badge = el("span", "badge");
    header.append(this.badge);
    root.append(header);

    this.banner = el("div", "banner");
    this.banner.hidden = true;
    root.append(this.banner);

    const board = el("div", "board");
    for (let n = 1; n <= LED_COUNT; n++) {
      const cell = el("div", "cell");
      const indicator = el("span", "led");
      const label = el("span", "label", `#${n}`);
      const button = document.createElement("button");
      button.textContent = "toggle";
      button.addEventListener("click", () => callbacks.onToggle(n));
      cell.append(indicator, label, button);
      board.append(cell);
      this.cells.push({ indicator, button });
    }
    root.append(board);

    const readout = el("div", "readout");
    this.byteText = el("span", "byte");
    this.counters = el("span", "counters");
    readout.append(this.byteText, this.counters);
    root.append(readout);

    const rawForm = el("div", "raw");
    this.rawInput = document.createElement("input");
    this.rawInput.type = "number";
    this.rawInput.min = "0";
    this.rawInput.max = "255";
    this.rawInput.placeholder = "0-255";
    this.rawButton = document.createElement("button");
    this.rawButton.textContent = "send byte";
    this.rawButton.addEventListener("click", () => {
      const value = Number(this.rawInput.value);
      if (Number.isInteger(value) && value >= 0 && value <= 255) {
        callbacks.onSendByte(value);
      } else {
        this.showError(`byte value must be 0..255, got ${this.rawInput.value || "nothing"}`);
      }
    });
    rawForm.append(this.rawInput, this.rawButton);
    root.append(rawForm);
  }

  render(model: BoardModel): void {
    const connected = model.connection === "connected";
    this.badge.textContent = model.connection;
    this.badge.className = `badge ${model.connection}`;

    model.leds.forEach((on, i) => {
      const cell = this.cells[i];
      if (!cell) return;
      cell.indicator.className = on ? "led on" : "led";
      cell.button.disabled = !connected;
    });
    this.rawButton.disabled = !connected;

    this.byteText.textContent = `byte ${model.byteValue} (${binaryString(model.byteValue)})`;
    this.counters.textContent =
      model.framesReceived === undefined
        ? ""
        : `frames ${model.framesReceived} / errors ${model.framingErrors ?? 0}`;
  }

  showError(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
    if (this.bannerTimer !== null) {
      clearTimeout(this.bannerTimer);
    }
    this.bannerTimer = setTimeout(() => {
      this.banner.hidden = true;
    }, 4000);
  }
}

function el<K extends "div" | "span" | "h1">(
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}
