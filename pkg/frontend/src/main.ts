/** DOM wiring for the workbench: clip intake, generation panels, comparison
 * view, favorites. All data flows through the HTTP API; a hard refresh
 * rebuilds everything from the GET endpoints. */

import { ApiClient, ApiError, ClipRecord } from "./api";
import { recordClip } from "./recorder";
import {
  WorkbenchState,
  addClips,
  addFavorite,
  canCompare,
  compareLines,
  failGeneration,
  finishGeneration,
  hydrate,
  initialState,
  seedForRequest,
  selectCompare,
  setPanelControls,
  startGeneration,
  swapCompare,
} from "./state";
import { decodeWavPcm16, encodeWavPcm16 } from "./wav";
import { drawWaveform } from "./waveform";

const api = new ApiClient();
let state: WorkbenchState = initialState();
let clipLength = 10;

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

function setStatus(message: string, isError = false): void {
  const el = $("status");
  el.textContent = message;
  el.className = isError ? "status error" : "status";
}

function update(next: WorkbenchState): void {
  state = next;
  render();
}

// ---------------------------------------------------------------------------
// intake

async function uploadBlob(blob: Blob, filename: string): Promise<void> {
  setStatus(`uploading ${filename}...`);
  try {
    const infos = await api.uploadClip(blob, filename);
    const records: ClipRecord[] = infos.map((info) => ({
      ...info,
      filename,
      created_at: new Date().toISOString(),
    }));
    update(addClips(state, records));
    setStatus(`added ${infos.length} clip${infos.length === 1 ? "" : "s"}`);
  } catch (err) {
    setStatus(err instanceof ApiError ? `upload failed: ${err.message}` : String(err), true);
  }
}

function wireIntake(): void {
  const input = $("file-input") as HTMLInputElement;
  input.addEventListener("change", async () => {
    const file = input.files?.[0];
    if (!file) return;
    if (!file.name.toLowerCase().endsWith(".wav") && !file.type.startsWith("audio/")) {
      setStatus("only WAV audio files are accepted", true);
      input.value = "";
      return;
    }
    await uploadBlob(file, file.name);
    input.value = "";
  });

  const recordBtn = $("record-btn") as HTMLButtonElement;
  recordBtn.addEventListener("click", async () => {
    recordBtn.disabled = true;
    try {
      setStatus(`recording ${clipLength}s...`);
      const rec = await recordClip(clipLength, (t) =>
        setStatus(`recording ${t.toFixed(1)} / ${clipLength}s`),
      );
      const wav = encodeWavPcm16(rec.samples, rec.sampleRate);
      await uploadBlob(new Blob([wav], { type: "audio/wav" }), "recording.wav");
    } catch (err) {
      setStatus(`recording failed: ${err}`, true);
    } finally {
      recordBtn.disabled = false;
    }
  });
}

// ---------------------------------------------------------------------------
// clip cards

function clipCard(clip: ClipRecord): HTMLElement {
  const panel = state.panels[clip.clip_id];
  const card = document.createElement("section");
  card.className = "clip-card";
  card.innerHTML = `
    <header>
      <strong>${clip.filename}</strong>
      <span class="meta">${clip.duration.toFixed(1)}s · peak ${clip.peak_db.toFixed(1)} dB</span>
    </header>
    <canvas width="360" height="64" class="waveform"></canvas>
    <audio controls preload="none" src="${api.clipAudioUrl(clip.clip_id)}"></audio>
    <div class="controls">
      <label>lines <input type="number" class="n-lines" min="1" max="500" value="${panel.nLines}"></label>
      <label>temp <input type="number" class="temperature" min="0" step="0.1" value="${panel.temperature}"></label>
      <label><input type="checkbox" class="seed-lock" ${panel.seedLock ? "checked" : ""}> lock seed</label>
      <span class="seed">${panel.lastSeed !== undefined ? `seed ${panel.lastSeed}` : ""}</span>
      <button class="generate" ${panel.inFlight ? "disabled" : ""}>
        ${panel.inFlight ? "generating..." : "generate"}
      </button>
      <button class="pick-left">A</button>
      <button class="pick-right">B</button>
    </div>
    <ol class="lines"></ol>
  `;

  const canvas = card.querySelector<HTMLCanvasElement>(".waveform")!;
  void renderClipWaveform(clip.clip_id, canvas);

  const linesEl = card.querySelector<HTMLOListElement>(".lines")!;
  for (const line of panel.lines) {
    const li = document.createElement("li");
    const text = document.createElement("span");
    text.textContent = line;
    const copy = document.createElement("button");
    copy.textContent = "copy";
    copy.addEventListener("click", () => navigator.clipboard?.writeText(line));
    const fav = document.createElement("button");
    fav.textContent = "☆";
    fav.addEventListener("click", async () => {
      try {
        const id = await api.addFavorite(clip.clip_id, line);
        update(
          addFavorite(state, {
            favorite_id: id,
            clip_id: clip.clip_id,
            line,
            created_at: new Date().toISOString(),
          }),
        );
      } catch (err) {
        setStatus(`favorite failed: ${err}`, true);
      }
    });
    li.append(text, copy, fav);
    linesEl.appendChild(li);
  }

  card.querySelector<HTMLInputElement>(".n-lines")!.addEventListener("change", (e) => {
    const value = Number((e.target as HTMLInputElement).value);
    update(setPanelControls(state, clip.clip_id, { nLines: value }));
  });
  card.querySelector<HTMLInputElement>(".temperature")!.addEventListener("change", (e) => {
    const value = Number((e.target as HTMLInputElement).value);
    update(setPanelControls(state, clip.clip_id, { temperature: value }));
  });
  card.querySelector<HTMLInputElement>(".seed-lock")!.addEventListener("change", (e) => {
    update(setPanelControls(state, clip.clip_id, { seedLock: (e.target as HTMLInputElement).checked }));
  });
  card.querySelector<HTMLButtonElement>(".generate")!.addEventListener("click", () =>
    runGeneration(clip.clip_id),
  );
  card.querySelector<HTMLButtonElement>(".pick-left")!.addEventListener("click", () =>
    update(selectCompare(state, "left", clip.clip_id)),
  );
  card.querySelector<HTMLButtonElement>(".pick-right")!.addEventListener("click", () =>
    update(selectCompare(state, "right", clip.clip_id)),
  );
  return card;
}

const waveformCache = new Map<string, Float32Array>();

async function renderClipWaveform(clipId: string, canvas: HTMLCanvasElement): Promise<void> {
  try {
    let samples = waveformCache.get(clipId);
    if (!samples) {
      const res = await fetch(api.clipAudioUrl(clipId));
      if (!res.ok) return;
      samples = decodeWavPcm16(await res.arrayBuffer()).samples;
      waveformCache.set(clipId, samples);
    }
    drawWaveform(canvas, samples);
  } catch {
    /* preview is best-effort */
  }
}

async function runGeneration(clipId: string): Promise<void> {
  const panel = state.panels[clipId];
  if (!panel || panel.inFlight) return;
  update(startGeneration(state, clipId));
  try {
    const result = await api.generate(
      clipId,
      panel.nLines,
      panel.temperature,
      seedForRequest(panel),
    );
    update(finishGeneration(state, clipId, result));
  } catch (err) {
    update(failGeneration(state, clipId));
    setStatus(err instanceof ApiError ? `generate failed: ${err.message}` : String(err), true);
  }
}

// ---------------------------------------------------------------------------
// comparison and favorites

function renderCompare(): void {
  const container = $("compare-panes");
  container.innerHTML = "";
  ($("compare-swap") as HTMLButtonElement).disabled = !canCompare(state);
  if (!canCompare(state)) {
    container.textContent = "Pick clips A and B to compare their generated lines.";
    return;
  }
  const { left, right } = compareLines(state);
  for (const [label, id, lines] of [
    ["A", state.compare.left, left],
    ["B", state.compare.right, right],
  ] as const) {
    const pane = document.createElement("div");
    pane.className = "compare-pane";
    const clip = state.clips.find((c) => c.clip_id === id);
    pane.innerHTML = `<h3>${label}: ${clip?.filename ?? id}</h3>`;
    const ol = document.createElement("ol");
    for (const line of lines) {
      const li = document.createElement("li");
      li.textContent = line;
      ol.appendChild(li);
    }
    pane.appendChild(ol);
    container.appendChild(pane);
  }
}

function renderFavorites(): void {
  const list = $("favorites-list");
  list.innerHTML = "";
  for (const fav of state.favorites) {
    const li = document.createElement("li");
    li.textContent = fav.line;
    list.appendChild(li);
  }
}

function render(): void {
  const cards = $("clip-cards");
  cards.innerHTML = "";
  for (const clip of state.clips) cards.appendChild(clipCard(clip));
  renderCompare();
  renderFavorites();
}

// ---------------------------------------------------------------------------

async function boot(): Promise<void> {
  wireIntake();
  $("compare-swap").addEventListener("click", () => update(swapCompare(state)));
  try {
    const health = await api.health();
    clipLength = health.clip_length;
    $("health").textContent =
      health.status === "ok" ? `models ready (${Object.keys(health.models).length})` : "degraded: models not loaded";
    const [clips, favorites] = await Promise.all([api.listClips(), api.listFavorites()]);
    update(hydrate(state, clips, favorites));
  } catch (err) {
    setStatus(`cannot reach service: ${err}`, true);
  }
}

void boot();
