import { BoardClient } from "./client.js";
import { ConsoleView } from "./view.js";

// API base: ?api=http://host:port wins; same origin when served by the
// host service; the default serve address when opened from a file.
function apiBase(): string {
  const override = new URLSearchParams(window.location.search).get("api");
  if (override) return override;
  if (window.location.protocol.startsWith("http")) return "";
  return "http://127.0.0.1:8777";
}

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app root element");
}

const client = new BoardClient({
  apiBase: apiBase(),
  onChange: (model) => view.render(model),
  onError: (message) => view.showError(message),
});

const view = new ConsoleView(root, {
  onToggle: (n) => void client.toggleLed(n),
  onSendByte: (value) => void client.sendByte(value),
});

view.render(client.model);
client.connect();
