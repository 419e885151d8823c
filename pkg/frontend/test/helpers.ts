// Fetch interception: every network call the console makes is recorded,
// and responses come from fixtures recorded against the real service.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const fixtureDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export interface Fixture {
  status: number;
  body: unknown;
}

export function fixture(name: string): Fixture {
  return JSON.parse(readFileSync(join(fixtureDir, name), "utf-8")) as Fixture;
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export type Route = (url: string, init?: RequestInit) => Fixture | undefined;

export class FetchStub {
  readonly calls: RecordedCall[] = [];
  private routes: Route[] = [];

  route(fn: Route): void {
    this.routes.push(fn);
  }

  /** Serve one fixture for every URL matching the substring. */
  on(substring: string, fx: Fixture): void {
    this.route((url) => (url.includes(substring) ? fx : undefined));
  }

  /** Serve fixtures for a substring in call order, then keep the last. */
  sequence(substring: string, fixtures: Fixture[]): void {
    let i = 0;
    this.route((url) => {
      if (!url.includes(substring)) return undefined;
      const fx = fixtures[Math.min(i, fixtures.length - 1)];
      i += 1;
      return fx;
    });
  }

  install(): void {
    globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      this.calls.push({
        url,
        method: init?.method ?? "GET",
        body: init?.body ? JSON.parse(String(init.body)) : null,
      });
      for (const route of this.routes) {
        const fx = route(url, init);
        if (fx) {
          return new Response(JSON.stringify(fx.body), {
            status: fx.status,
            headers: { "content-type": "application/json" },
          });
        }
      }
      throw new Error(`unrouted fetch: ${url}`);
    }) as typeof fetch;
  }
}

export function installUnreachable(calls: RecordedCall[] = []): RecordedCall[] {
  globalThis.fetch = (async (input: RequestInfo | URL) => {
    calls.push({ url: String(input), method: "GET", body: null });
    throw new TypeError("fetch failed: connection refused");
  }) as typeof fetch;
  return calls;
}

/** Every string value reachable inside a JSON payload. */
export function stringsIn(value: unknown, out = new Set<string>()): Set<string> {
  if (typeof value === "string") out.add(value);
  else if (Array.isArray(value)) value.forEach((v) => stringsIn(v, out));
  else if (value && typeof value === "object") {
    Object.values(value as Record<string, unknown>).forEach((v) =>
      stringsIn(v, out),
    );
  }
  return out;
}
