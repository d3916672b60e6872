// Page bootstrap: pick a model from the service, open a session on it.
// The service base URL comes from the ?api= query parameter, defaulting to
// port 8000 on the page's host.

import { createClient } from "./api.js";
import { createSessionPanel } from "./app.js";

const apiBase = (): string => {
  const params = new URLSearchParams(window.location.search);
  const fromQuery = params.get("api");
  if (fromQuery) return fromQuery;
  const host = window.location.hostname || "localhost";
  return `${window.location.protocol === "https:" ? "https:" : "http:"}//${host}:8000`;
};

const boot = async (): Promise<void> => {
  const mount = document.getElementById("app");
  if (!mount) return;
  const client = createClient(apiBase());

  const picker = document.createElement("div");
  picker.className = "model-picker";
  const select = document.createElement("select");
  const openBtn = document.createElement("button");
  openBtn.type = "button";
  openBtn.textContent = "Open session";
  const status = document.createElement("span");
  status.className = "picker-status";
  picker.append(select, openBtn, status);
  mount.appendChild(picker);

  try {
    const models = await client.listModels();
    if (models.length === 0) {
      status.textContent = `no models on ${client.baseUrl}; upload one first`;
      openBtn.disabled = true;
    }
    for (const id of models) {
      const opt = document.createElement("option");
      opt.value = id;
      opt.textContent = id;
      select.appendChild(opt);
    }
  } catch (err) {
    status.textContent = `cannot reach ${client.baseUrl}: ${err instanceof Error ? err.message : err}`;
    openBtn.disabled = true;
  }

  let panel: HTMLElement | null = null;
  openBtn.addEventListener("click", async () => {
    if (!select.value) return;
    if (panel) panel.remove();
    const session = createSessionPanel({ client, model: select.value });
    panel = session.element;
    mount.appendChild(session.element);
    await session.open();
  });
};

void boot();
