/** Typed client for the deformation service HTTP API. */

export interface SessionInfo {
  session_id: string;
  n_vertices: number;
  n_triangles: number;
  bbox: { min: number[]; max: number[] };
}

export interface HandleSpec {
  name: string;
  vertices: number[];
}

export interface TransformSpec {
  rotation?: [number, number, number, number]; // w, x, y, z
  translation?: [number, number, number];
  scale?: number;
  pivot?: [number, number, number];
}

export interface DeformRequest {
  transforms: Record<string, TransformSpec>;
  beta: number;
  operator: "flat" | "curved";
}

export interface DeformResponse {
  positions_b64: string;
  colors_b64: string;
  energy: number[];
  p95: number;
  max_iso: number;
  max_conf: number;
  factorize_ms: number;
  solve_ms: number;
  cache_hit: boolean;
  factorizations: number;
}

export class ServiceError extends Error {
  constructor(message: string, public status: number) {
    super(message);
  }
}

async function raise(resp: Response): Promise<never> {
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") detail = body.error;
  } catch {
    // non-JSON error body, keep the status text
  }
  throw new ServiceError(detail, resp.status);
}

/** Decode a base64 string of little-endian float32 triples. */
export function decodePositions(b64: string): Float32Array {
  const raw = atob(b64);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) bytes[i] = raw.charCodeAt(i);
  return new Float32Array(bytes.buffer);
}

/** Decode a base64 string of per-triangle RGB bytes. */
export function decodeColors(b64: string): Uint8Array {
  const raw = atob(b64);
  const bytes = new Uint8Array(raw.length);
  for (let i = 0; i < raw.length; i++) bytes[i] = raw.charCodeAt(i);
  return bytes;
}

export class ServiceClient {
  constructor(private baseUrl = "", private fetchFn: typeof fetch = fetch) {}

  async createSession(objText: string): Promise<SessionInfo> {
    const resp = await this.fetchFn(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "text/plain" },
      body: objText,
    });
    if (resp.status !== 201) await raise(resp);
    return resp.json();
  }

  async setHandles(sessionId: string, handles: HandleSpec[]): Promise<void> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/sessions/${sessionId}/handles`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ handles }),
      },
    );
    if (!resp.ok) await raise(resp);
  }

  async deform(
    sessionId: string,
    req: DeformRequest,
    signal?: AbortSignal,
  ): Promise<DeformResponse> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/sessions/${sessionId}/deform`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(req),
        signal,
      },
    );
    if (!resp.ok) await raise(resp);
    return resp.json();
  }

  async weights(sessionId: string): Promise<number[][]> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/sessions/${sessionId}/weights`,
    );
    if (!resp.ok) await raise(resp);
    const body = await resp.json();
    return body.weights;
  }
}
