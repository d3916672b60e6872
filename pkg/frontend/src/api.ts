// Typed client for the session service. Every shape here mirrors the
// service's JSON exactly; the client never reinterprets or caches views.

export type TestRef = {
  key: string;
  value: string;
  label?: string;
};

export type ContentNode = {
  kind: "content";
  ref: string;
  payload: string;
};

export type SeqNode = {
  kind: "seq";
  children: ProgramNode[];
};

export type ChainArm = {
  test: TestRef;
  body: ProgramNode;
};

export type ChainNode = {
  kind: "chain";
  arms: ChainArm[];
};

export type ProgramNode = ContentNode | SeqNode | ChainNode;

export type MutexGroupJson = {
  name: string;
  members: TestRef[];
};

export type ProgramJson = {
  mutex: MutexGroupJson[];
  root: ProgramNode | null;
  meta?: Record<string, string>;
};

export type BreadcrumbStep = {
  action: string;
  // key -> chosen value, "!value", or a list mixing both
  set: Record<string, string | string[]>;
};

export type View = {
  session: string;
  model: string;
  residual: ProgramJson;
  available: TestRef[];
  complete: boolean;
  breadcrumb: BreadcrumbStep[];
};

export type ModelInfo = {
  id: string;
  program: ProgramJson;
  source: string | null;
};

// One user input: a (key, value) pair. Duplicate keys are legal in a draft;
// the server is the one that decides whether they conflict.
export type InputPair = [string, string];

export class ApiError extends Error {
  readonly status: number;
  readonly error: string;
  readonly detail: string;

  constructor(status: number, error: string, detail: string) {
    super(`${error}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.error = error;
    this.detail = detail;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export type Client = {
  readonly baseUrl: string;
  listModels(): Promise<string[]>;
  getModel(id: string): Promise<ModelInfo>;
  uploadModel(source: string, id?: string): Promise<string>;
  openSession(model: string): Promise<View>;
  view(token: string): Promise<View>;
  browse(token: string, key: string, value?: string): Promise<View>;
  input(token: string, pairs: InputPair[]): Promise<View>;
  undo(token: string): Promise<View>;
  reset(token: string): Promise<View>;
};

export const createClient = (baseUrl: string, fetchImpl?: FetchLike): Client => {
  const base = baseUrl.replace(/\/+$/, "");
  const doFetch: FetchLike = fetchImpl ?? ((url, init) => fetch(url, init));

  const call = async <T>(method: string, path: string, body?: unknown): Promise<T> => {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await doFetch(base + path, init);
    if (!res.ok) {
      let error = "HttpError";
      let detail = res.statusText || String(res.status);
      try {
        const data = await res.json();
        if (data && typeof data.error === "string") error = data.error;
        if (data && typeof data.detail === "string") detail = data.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, error, detail);
    }
    return (await res.json()) as T;
  };

  return {
    baseUrl: base,
    listModels: async () => (await call<{ models: string[] }>("GET", "/models")).models,
    getModel: (id) => call<ModelInfo>("GET", `/models/${encodeURIComponent(id)}`),
    uploadModel: async (source, id) =>
      (await call<{ id: string }>("POST", "/models", id === undefined ? { source } : { source, id })).id,
    openSession: (model) => call<View>("POST", "/sessions", { model }),
    view: (token) => call<View>("GET", `/sessions/${encodeURIComponent(token)}/view`),
    browse: (token, key, value = "true") =>
      call<View>("POST", `/sessions/${encodeURIComponent(token)}/browse`, { key, value }),
    input: (token, pairs) =>
      call<View>("POST", `/sessions/${encodeURIComponent(token)}/input`, { set: pairs }),
    undo: (token) => call<View>("POST", `/sessions/${encodeURIComponent(token)}/undo`),
    reset: (token) => call<View>("POST", `/sessions/${encodeURIComponent(token)}/reset`),
  };
};
