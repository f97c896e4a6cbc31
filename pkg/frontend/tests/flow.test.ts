/** Workbench acceptance: upload -> generate(100) -> exactly 100 lines held
 * for rendering; seed-locked regeneration identical; favorites persist
 * across a simulated hard reload (state rebuilt from GET endpoints only). */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import {
  WorkbenchState,
  addClips,
  canCompare,
  compareLines,
  finishGeneration,
  hydrate,
  initialState,
  seedForRequest,
  selectCompare,
  setPanelControls,
  startGeneration,
} from "../src/state";
import { encodeWavPcm16 } from "../src/wav";
import { FakeServer } from "./fake-server";

function wavBlob(seconds: number, rate = 8000, amp = 0.4): Blob {
  const samples = new Float32Array(Math.round(seconds * rate));
  for (let i = 0; i < samples.length; i++) {
    samples[i] = amp * Math.sin((2 * Math.PI * 220 * i) / rate);
  }
  return new Blob([encodeWavPcm16(samples, rate)], { type: "audio/wav" });
}

async function uploadAndTrack(
  client: ApiClient,
  state: WorkbenchState,
  blob: Blob,
  name: string,
): Promise<WorkbenchState> {
  const infos = await client.uploadClip(blob, name);
  return addClips(
    state,
    infos.map((i) => ({ ...i, filename: name, created_at: "now" })),
  );
}

async function generateFor(
  client: ApiClient,
  state: WorkbenchState,
  clipId: string,
): Promise<WorkbenchState> {
  const panel = state.panels[clipId];
  state = startGeneration(state, clipId);
  const result = await client.generate(
    clipId,
    panel.nLines,
    panel.temperature,
    seedForRequest(panel),
  );
  return finishGeneration(state, clipId, result);
}

describe("workbench flow", () => {
  it("upload then generate yields exactly 100 rendered lines", async () => {
    const server = new FakeServer();
    const client = new ApiClient(server.fetch);
    let state = await uploadAndTrack(client, initialState(), wavBlob(10), "take.wav");
    expect(state.clips).toHaveLength(1);

    const clipId = state.clips[0].clip_id;
    expect(state.panels[clipId].nLines).toBe(100);
    state = await generateFor(client, state, clipId);
    expect(state.panels[clipId].lines).toHaveLength(100);
    expect(new Set(state.panels[clipId].lines).size).toBeGreaterThan(1);
  });

  it("long uploads yield one card per full clip", async () => {
    const server = new FakeServer();
    const client = new ApiClient(server.fetch);
    const state = await uploadAndTrack(client, initialState(), wavBlob(25), "long.wav");
    expect(state.clips).toHaveLength(2); // trailing 5s dropped
  });

  it("seed-locked regeneration is identical; unlocking changes the batch", async () => {
    const server = new FakeServer();
    const client = new ApiClient(server.fetch);
    let state = await uploadAndTrack(client, initialState(), wavBlob(10), "take.wav");
    const clipId = state.clips[0].clip_id;

    state = await generateFor(client, state, clipId);
    const first = state.panels[clipId].lines;
    const firstSeed = state.panels[clipId].lastSeed;

    state = setPanelControls(state, clipId, { seedLock: true });
    state = await generateFor(client, state, clipId);
    expect(state.panels[clipId].lastSeed).toBe(firstSeed);
    expect(state.panels[clipId].lines).toEqual(first);

    state = setPanelControls(state, clipId, { seedLock: false });
    state = await generateFor(client, state, clipId);
    expect(state.panels[clipId].lastSeed).not.toBe(firstSeed);
    expect(state.panels[clipId].lines).not.toEqual(first);
  });

  it("favorites persist across a hard reload", async () => {
    const server = new FakeServer();
    const client = new ApiClient(server.fetch);
    let state = await uploadAndTrack(client, initialState(), wavBlob(10), "take.wav");
    const clipId = state.clips[0].clip_id;
    state = await generateFor(client, state, clipId);
    const line = state.panels[clipId].lines[0];
    await client.addFavorite(clipId, line);

    // hard refresh: fresh state rebuilt from GET endpoints alone
    const [clips, favorites] = await Promise.all([client.listClips(), client.listFavorites()]);
    const reloaded = hydrate(initialState(), clips, favorites);
    expect(reloaded.clips.map((c) => c.clip_id)).toContain(clipId);
    expect(reloaded.favorites.map((f) => f.line)).toContain(line);
  });

  it("comparison view renders both selected clips' lists", async () => {
    const server = new FakeServer();
    const client = new ApiClient(server.fetch);
    let state = await uploadAndTrack(client, initialState(), wavBlob(10), "calm.wav");
    state = await uploadAndTrack(client, state, wavBlob(10, 8000, 0.9), "intense.wav");
    const [a, b] = state.clips.map((c) => c.clip_id);
    state = await generateFor(client, state, a);
    state = await generateFor(client, state, b);

    expect(canCompare(state)).toBe(false);
    state = selectCompare(selectCompare(state, "left", a), "right", b);
    expect(canCompare(state)).toBe(true);
    const panes = compareLines(state);
    expect(panes.left).toHaveLength(100);
    expect(panes.right).toHaveLength(100);
    expect(panes.left).not.toEqual(panes.right);
  });

  it("server rejects bad uploads with a 400 detail", async () => {
    const server = new FakeServer();
    const client = new ApiClient(server.fetch);
    const junk = new Blob([new Uint8Array(64)], { type: "text/plain" });
    await expect(client.uploadClip(junk, "junk.txt")).rejects.toMatchObject({ status: 400 });
  });
});
