/**
 * Triage board: grouped CVE matches with bulk confirm/discard.
 *
 * Alerts sharing a matched-CPE set collapse into one card; the server's
 * group order is rendered unchanged. Bulk controls are enabled only while
 * every member is pending. Decisions are never applied optimistically: the
 * board re-renders from the server's response, and a decide conflict
 * triggers a refetch of server state.
 */

import { ApiClient, ApiError, type AlertGroupView } from './api.js';

export interface TriageBoardOptions {
  user?: string;
}

export class TriageBoard {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly productId: number,
    private readonly options: TriageBoardOptions = {},
  ) {}

  async load(): Promise<void> {
    try {
      const { groups } = await this.api.alertGroups(this.productId);
      this.render(groups);
    } catch (error) {
      this.root.textContent = `failed to load alerts: ${(error as Error).message}`;
    }
  }

  render(groups: AlertGroupView[]): void {
    this.root.innerHTML = '';
    if (groups.length === 0) {
      const empty = document.createElement('p');
      empty.className = 'no-alerts';
      empty.textContent = 'No known vulnerabilities for this product.';
      this.root.appendChild(empty);
      return;
    }
    for (const group of groups) {
      this.root.appendChild(this.card(group));
    }
  }

  private card(group: AlertGroupView): HTMLElement {
    const card = document.createElement('section');
    card.className = 'alert-group';
    card.dataset.groupId = group.group_id;

    const heading = document.createElement('header');
    const cpes = group.cpes.length > 0 ? group.cpes.join(', ') : 'matched via summary text';
    heading.textContent = `${group.alerts.length} CVE(s) — ${cpes}`;
    if (group.alerts.some((alert) => alert.exact_version)) {
      const badge = document.createElement('span');
      badge.className = 'badge-exact-version';
      badge.textContent = 'exact version';
      heading.appendChild(badge);
    }
    card.appendChild(heading);

    const list = document.createElement('ul');
    for (const alert of group.alerts) {
      const item = document.createElement('li');
      item.className = 'alert-row';
      item.dataset.alertId = String(alert.id);
      item.dataset.state = alert.state;
      item.textContent = `${alert.cve_id} [${alert.state}]`;
      list.appendChild(item);
    }
    card.appendChild(list);

    const allPending = group.alerts.every((alert) => alert.state === 'PENDING');
    const controls = document.createElement('div');
    controls.className = 'bulk-controls';
    for (const decision of ['CONFIRMED', 'DISCARDED'] as const) {
      const button = document.createElement('button');
      button.className = decision === 'CONFIRMED' ? 'bulk-confirm' : 'bulk-discard';
      button.textContent = decision === 'CONFIRMED' ? 'Confirm all' : 'Discard all';
      button.disabled = !allPending;
      button.addEventListener('click', () => void this.decide(group, decision));
      controls.appendChild(button);
    }
    card.appendChild(controls);
    return card;
  }

  private async decide(group: AlertGroupView, decision: 'CONFIRMED' | 'DISCARDED'): Promise<void> {
    try {
      await this.api.decideGroup(this.productId, group.group_id, decision, this.options.user ?? '');
    } catch (error) {
      if (!(error instanceof ApiError) || error.status !== 409) {
        this.root.prepend(this.errorBanner(`decision failed: ${(error as Error).message}`));
        return;
      }
      // decided elsewhere; fall through to refresh to the server's state
    }
    await this.load();
  }

  private errorBanner(message: string): HTMLElement {
    const banner = document.createElement('div');
    banner.className = 'error-banner';
    banner.textContent = message;
    return banner;
  }
}
