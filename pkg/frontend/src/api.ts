/**
 * Typed client for the triage HTTP API (/api/v1).
 *
 * Every state-changing interaction in the UI maps to exactly one call here.
 * WFN attributes travel as a flat object of the 11 attribute names, with
 * "*" for ANY and "-" for NA.
 */

export const WFN_ATTRIBUTES = [
  'part',
  'vendor',
  'product',
  'version',
  'update',
  'edition',
  'language',
  'sw_edition',
  'target_sw',
  'target_hw',
  'other',
] as const;

export type WfnAttribute = (typeof WFN_ATTRIBUTES)[number];
export type WfnAttributes = Record<WfnAttribute, string>;

export interface CandidateView {
  rank: number;
  uri: string;
  formatted: string | null;
  title: string;
  vendor_distance: number;
  product_distance: number;
  version: string;
  exact_version: boolean;
}

export interface AlertView {
  id: number;
  product_id: number;
  cve_id: string;
  origin: 'CPE_LIST' | 'SUMMARY';
  matched_cpes: string[];
  exact_version: boolean;
  state: 'PENDING' | 'CONFIRMED' | 'DISCARDED';
  created_at: string;
  decided_by: string | null;
  decided_at: string | null;
}

export interface AlertGroupView {
  group_id: string;
  cpes: string[];
  alerts: AlertView[];
}

export interface ProductView {
  id: number;
  external_id: string;
  vendor: string;
  product: string;
  version: string;
  assigned: boolean;
  assignment: string | null;
  alerts: { pending: number; confirmed: number; discarded: number };
}

export type AssignmentSource = 'CANDIDATE_SELECTED' | 'USER_EDITED';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { 'Content-Type': 'application/json' },
    ...init,
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = body.detail ?? body.error ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly base = '') {}

  listProducts(status?: string): Promise<{ products: ProductView[] }> {
    const query = status ? `?status=${encodeURIComponent(status)}` : '';
    return request(`${this.base}/api/v1/products${query}`);
  }

  candidates(productId: number, limit = 10): Promise<{ candidates: CandidateView[] }> {
    return request(`${this.base}/api/v1/products/${productId}/candidates?limit=${limit}`);
  }

  assign(
    productId: number,
    wfn: WfnAttributes,
    source: AssignmentSource,
    user = '',
    derivedFrom: string | null = null,
  ): Promise<unknown> {
    return request(`${this.base}/api/v1/products/${productId}/assignment`, {
      method: 'PUT',
      body: JSON.stringify({ wfn, source, user, derived_from: derivedFrom }),
    });
  }

  scan(productId: number): Promise<{ new_alerts: AlertView[] }> {
    return request(`${this.base}/api/v1/products/${productId}/scan`, { method: 'POST' });
  }

  alertGroups(productId: number, state?: string): Promise<{ groups: AlertGroupView[] }> {
    const query = state ? `&state=${encodeURIComponent(state)}` : '';
    return request(`${this.base}/api/v1/products/${productId}/alerts?grouped=true${query}`);
  }

  decideGroup(
    productId: number,
    groupId: string,
    decision: 'CONFIRMED' | 'DISCARDED',
    user = '',
  ): Promise<{ alerts: AlertView[] }> {
    return request(`${this.base}/api/v1/alerts/decide`, {
      method: 'POST',
      body: JSON.stringify({ group_id: groupId, product_id: productId, decision, user }),
    });
  }

  decideAlerts(
    alertIds: number[],
    decision: 'CONFIRMED' | 'DISCARDED',
    user = '',
  ): Promise<{ alerts: AlertView[] }> {
    return request(`${this.base}/api/v1/alerts/decide`, {
      method: 'POST',
      body: JSON.stringify({ alert_ids: alertIds, decision, user }),
    });
  }

  summary(): Promise<unknown> {
    return request(`${this.base}/api/v1/reports/summary`);
  }
}
