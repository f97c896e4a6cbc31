/** Workbench state and its pure update functions.
 *
 * The store is plain data rebuilt from the service's GET endpoints on load;
 * the UI layer renders it and calls the API, never mutating model state.
 */

import type { ClipRecord, FavoriteRecord, GenerateResult } from "./api";

export type GenerationPanel = {
  nLines: number;
  temperature: number;
  seedLock: boolean;
  /** Seed echoed by the last generation; reused while the lock is on. */
  lastSeed?: number;
  lines: string[];
  inFlight: boolean;
};

export type CompareSelection = {
  left?: string;
  right?: string;
};

export type WorkbenchState = {
  clips: ClipRecord[];
  panels: Record<string, GenerationPanel>;
  favorites: FavoriteRecord[];
  compare: CompareSelection;
};

export const DEFAULT_N_LINES = 100;
export const DEFAULT_TEMPERATURE = 0.8;

export function initialState(): WorkbenchState {
  return { clips: [], panels: {}, favorites: [], compare: {} };
}

export function defaultPanel(): GenerationPanel {
  return {
    nLines: DEFAULT_N_LINES,
    temperature: DEFAULT_TEMPERATURE,
    seedLock: false,
    lines: [],
    inFlight: false,
  };
}

/** Rebuild from the GET endpoints after a hard refresh. */
export function hydrate(
  state: WorkbenchState,
  clips: ClipRecord[],
  favorites: FavoriteRecord[],
): WorkbenchState {
  const panels: Record<string, GenerationPanel> = {};
  for (const clip of clips) {
    panels[clip.clip_id] = state.panels[clip.clip_id] ?? defaultPanel();
  }
  return { ...state, clips, favorites, panels };
}

export function addClips(state: WorkbenchState, clips: ClipRecord[]): WorkbenchState {
  const panels = { ...state.panels };
  for (const clip of clips) panels[clip.clip_id] = panels[clip.clip_id] ?? defaultPanel();
  return { ...state, clips: [...state.clips, ...clips], panels };
}

function withPanel(
  state: WorkbenchState,
  clipId: string,
  update: (panel: GenerationPanel) => GenerationPanel,
): WorkbenchState {
  const panel = state.panels[clipId];
  if (!panel) throw new Error(`unknown clip ${clipId}`);
  return { ...state, panels: { ...state.panels, [clipId]: update(panel) } };
}

export function setPanelControls(
  state: WorkbenchState,
  clipId: string,
  controls: Partial<Pick<GenerationPanel, "nLines" | "temperature" | "seedLock">>,
): WorkbenchState {
  return withPanel(state, clipId, (p) => ({ ...p, ...controls }));
}

/** Seed to send: the locked seed when the panel has one, otherwise none
 * (the server draws one and echoes it back). */
export function seedForRequest(panel: GenerationPanel): number | undefined {
  return panel.seedLock ? panel.lastSeed : undefined;
}

export function startGeneration(state: WorkbenchState, clipId: string): WorkbenchState {
  return withPanel(state, clipId, (p) => {
    if (p.inFlight) throw new Error(`generation already in flight for ${clipId}`);
    return { ...p, inFlight: true };
  });
}

export function finishGeneration(
  state: WorkbenchState,
  clipId: string,
  result: GenerateResult,
): WorkbenchState {
  return withPanel(state, clipId, (p) => ({
    ...p,
    inFlight: false,
    lines: result.lines,
    lastSeed: result.seed,
  }));
}

export function failGeneration(state: WorkbenchState, clipId: string): WorkbenchState {
  return withPanel(state, clipId, (p) => ({ ...p, inFlight: false }));
}

export function addFavorite(state: WorkbenchState, favorite: FavoriteRecord): WorkbenchState {
  return { ...state, favorites: [...state.favorites, favorite] };
}

export function selectCompare(
  state: WorkbenchState,
  side: "left" | "right",
  clipId: string | undefined,
): WorkbenchState {
  return { ...state, compare: { ...state.compare, [side]: clipId } };
}

export function swapCompare(state: WorkbenchState): WorkbenchState {
  return { ...state, compare: { left: state.compare.right, right: state.compare.left } };
}

export function canCompare(state: WorkbenchState): boolean {
  return Boolean(state.compare.left && state.compare.right);
}

export function compareLines(state: WorkbenchState): { left: string[]; right: string[] } {
  const pick = (id?: string) => (id && state.panels[id] ? state.panels[id].lines : []);
  return { left: pick(state.compare.left), right: pick(state.compare.right) };
}
