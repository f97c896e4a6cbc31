/** Typed client for the workbench HTTP API. All persistence lives server-side. */

export type ClipInfo = {
  clip_id: string;
  duration: number;
  peak_db: number;
};

export type ClipRecord = ClipInfo & {
  filename: string;
  created_at: string;
};

export type GenerateResult = {
  lines: string[];
  seed: number;
  clip_id: string;
  temperature: number;
};

export type FavoriteRecord = {
  favorite_id: string;
  clip_id: string;
  line: string;
  created_at: string;
};

export type Health = {
  status: "ok" | "degraded";
  models: Record<string, string>;
  clip_length: number;
};

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** fetch-compatible function; injectable for tests. */
export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(res.status, detail);
  }
  return res.json() as Promise<T>;
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
    private base = "",
  ) {}

  async uploadClip(wavBlob: Blob, filename: string): Promise<ClipInfo[]> {
    const form = new FormData();
    form.append("file", wavBlob, filename);
    const res = await this.fetchFn(`${this.base}/api/clips`, { method: "POST", body: form });
    const body = await asJson<{ clips: ClipInfo[] }>(res);
    return body.clips;
  }

  async generate(
    clipId: string,
    nLines: number,
    temperature: number,
    seed?: number,
  ): Promise<GenerateResult> {
    const payload: Record<string, unknown> = {
      clip_id: clipId,
      n_lines: nLines,
      temperature,
    };
    if (seed !== undefined) payload.seed = seed;
    const res = await this.fetchFn(`${this.base}/api/generate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    return asJson<GenerateResult>(res);
  }

  async addFavorite(clipId: string, line: string): Promise<string> {
    const res = await this.fetchFn(`${this.base}/api/favorites`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ clip_id: clipId, line }),
    });
    const body = await asJson<{ favorite_id: string }>(res);
    return body.favorite_id;
  }

  async listFavorites(): Promise<FavoriteRecord[]> {
    const res = await this.fetchFn(`${this.base}/api/favorites`);
    return (await asJson<{ favorites: FavoriteRecord[] }>(res)).favorites;
  }

  async listClips(): Promise<ClipRecord[]> {
    const res = await this.fetchFn(`${this.base}/api/clips`);
    return (await asJson<{ clips: ClipRecord[] }>(res)).clips;
  }

  async health(): Promise<Health> {
    const res = await this.fetchFn(`${this.base}/api/health`);
    return asJson<Health>(res);
  }

  clipAudioUrl(clipId: string): string {
    return `${this.base}/api/clips/${clipId}/audio`;
  }
}
