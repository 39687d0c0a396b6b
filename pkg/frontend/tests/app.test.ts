import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { renderApp } from "../src/main.js";
import { jsonResponse, sqliReport } from "./fixtures.js";

afterEach(() => {
  vi.unstubAllGlobals();
  window.location.hash = "";
});

describe("ApiClient", () => {
  it("raises ApiError with the server's detail message", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => jsonResponse({ detail: "unknown alert nope" }, 404)),
    );
    const api = new ApiClient("");
    await expect(api.getReport("nope")).rejects.toMatchObject({
      status: 404,
      detail: "unknown alert nope",
    });
    expect(new ApiError(502, "x")).toBeInstanceOf(Error);
  });

  it("posts messages to the session endpoint", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ answer: "hi" }));
    vi.stubGlobal("fetch", fetchMock);
    await new ApiClient("").sendMessage("s1", "hello");
    expect(fetchMock).toHaveBeenCalledWith(
      "/api/v1/sessions/s1/messages",
      expect.objectContaining({ method: "POST", body: '{"message":"hello"}' }),
    );
  });
});

describe("renderApp", () => {
  it("renders the alert queue at the root route", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        jsonResponse({
          alerts: [
            { alert_id: "a1", final_class: "sqli", confidence: 0.99, created_at: "t" },
            { alert_id: "a2", final_class: "none", confidence: 0, created_at: "t" },
          ],
        }),
      ),
    );
    const root = document.createElement("div");
    await renderApp(root, new ApiClient(""));
    expect(root.querySelectorAll(".alert-row")).toHaveLength(2);
    expect(root.querySelector("a")!.getAttribute("href")).toBe("#/alerts/a1");
  });

  it("renders the report view and chat panel for a selected alert", async () => {
    window.location.hash = "#/alerts/alert-1";
    vi.stubGlobal(
      "fetch",
      vi.fn(async (url: string) => {
        expect(url).toBe("/api/v1/reports/alert-1");
        return jsonResponse(sqliReport());
      }),
    );
    const root = document.createElement("div");
    await renderApp(root, new ApiClient(""));
    expect(root.querySelector(".report-view")).not.toBeNull();
    expect(root.querySelector(".chat-panel")).not.toBeNull();
  });

  it("shows a retry banner instead of a blank page on fetch failure", async () => {
    let failures = 0;
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        failures += 1;
        if (failures === 1) return jsonResponse({ detail: "boom" }, 500);
        return jsonResponse({ alerts: [] });
      }),
    );
    const root = document.createElement("div");
    await renderApp(root, new ApiClient(""));
    const banner = root.querySelector(".retry-banner");
    expect(banner).not.toBeNull();
    banner!.querySelector("button")!.click();
    await vi.waitFor(() => {
      expect(root.querySelector(".alert-queue")).not.toBeNull();
    });
  });
});
