/** Thin typed client over the triage service HTTP API. */

import type { AlertSummary, Expertise, StoredReport } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  listAlerts(): Promise<{ alerts: AlertSummary[] }> {
    return request(`${this.baseUrl}/api/v1/alerts`);
  }

  getReport(alertId: string): Promise<StoredReport> {
    return request(`${this.baseUrl}/api/v1/reports/${encodeURIComponent(alertId)}`);
  }

  submitAlert(payload: string, source?: string): Promise<{ alert_id: string }> {
    return request(`${this.baseUrl}/api/v1/alerts`, {
      method: "POST",
      body: JSON.stringify({ payload, source }),
    });
  }

  openSession(alertId: string, expertise: Expertise): Promise<{ session_id: string }> {
    return request(`${this.baseUrl}/api/v1/sessions`, {
      method: "POST",
      body: JSON.stringify({ alert_id: alertId, expertise }),
    });
  }

  sendMessage(sessionId: string, message: string): Promise<{ answer: string }> {
    return request(
      `${this.baseUrl}/api/v1/sessions/${encodeURIComponent(sessionId)}/messages`,
      { method: "POST", body: JSON.stringify({ message }) },
    );
  }

  health(): Promise<{ llm: string; embed: string; kb: Record<string, number> }> {
    return request(`${this.baseUrl}/api/v1/health`);
  }
}
