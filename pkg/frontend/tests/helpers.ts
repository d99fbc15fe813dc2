import type { FetchLike } from "../src/api.js";

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/** A scripted fetch: each call pops the next handler; extra calls fail. */
export function scriptedFetch(
  handlers: ((call: RecordedCall) => Response)[],
): { fetch: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const queue = [...handlers];
  const fetchImpl: FetchLike = async (url, init) => {
    const call: RecordedCall = {
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    };
    calls.push(call);
    const handler = queue.shift();
    if (!handler) throw new Error(`unexpected request: ${call.method} ${url}`);
    return handler(call);
  };
  return { fetch: fetchImpl, calls };
}
