/**
 * Candidate picker: the ranked CPE list for one product.
 *
 * Rows render in exactly the API's order, at most the requested limit.
 * Selecting a row issues the assignment request and then triggers a scan;
 * an empty candidate list shows the manual-entry path into the WFN editor.
 */

import { ApiClient, type CandidateView } from './api.js';
import { uriToAttributes } from './wfn.js';
import { WfnEditor } from './wfnEditor.js';

export interface CandidatePickerOptions {
  limit?: number;
  user?: string;
  onAssigned?: () => void;
}

export class CandidatePicker {
  private readonly limit: number;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly productId: number,
    private readonly options: CandidatePickerOptions = {},
  ) {
    this.limit = options.limit ?? 10;
  }

  async load(): Promise<void> {
    try {
      const { candidates } = await this.api.candidates(this.productId, this.limit);
      this.render(candidates);
    } catch (error) {
      this.showError(`failed to load candidates: ${(error as Error).message}`);
    }
  }

  render(candidates: CandidateView[]): void {
    this.root.innerHTML = '';
    this.root.appendChild(this.banner());

    if (candidates.length === 0) {
      const empty = document.createElement('p');
      empty.className = 'no-candidates';
      empty.textContent = 'No candidates found in the dictionary for this product.';
      this.root.appendChild(empty);
      const manual = document.createElement('button');
      manual.className = 'manual-entry';
      manual.textContent = 'Enter a name manually';
      manual.addEventListener('click', () => this.openEditor(null));
      this.root.appendChild(manual);
      return;
    }

    const table = document.createElement('table');
    table.className = 'candidates';
    const head = table.createTHead().insertRow();
    for (const label of ['#', 'CPE', 'Title', 'Version', 'Distances', '']) {
      const cell = document.createElement('th');
      cell.textContent = label;
      head.appendChild(cell);
    }
    const body = table.createTBody();
    for (const candidate of candidates.slice(0, this.limit)) {
      const row = body.insertRow();
      row.className = 'candidate-row';
      row.dataset.uri = candidate.uri;
      row.insertCell().textContent = String(candidate.rank);
      row.insertCell().textContent = candidate.uri;
      row.insertCell().textContent = candidate.title;
      const version = row.insertCell();
      version.textContent = candidate.version;
      if (candidate.exact_version) {
        version.className = 'version-exact';
      }
      row.insertCell().textContent =
        `vendor ${candidate.vendor_distance} / product ${candidate.product_distance}`;
      const actions = row.insertCell();
      const select = document.createElement('button');
      select.className = 'select-candidate';
      select.textContent = 'Assign';
      select.addEventListener('click', () => void this.select(candidate));
      actions.appendChild(select);
      const edit = document.createElement('button');
      edit.className = 'edit-candidate';
      edit.textContent = 'Edit first';
      edit.addEventListener('click', () => this.openEditor(candidate));
      actions.appendChild(edit);
    }
    this.root.appendChild(table);
  }

  private async select(candidate: CandidateView): Promise<void> {
    try {
      await this.api.assign(
        this.productId,
        uriToAttributes(candidate.uri),
        'CANDIDATE_SELECTED',
        this.options.user ?? '',
        candidate.uri,
      );
      await this.api.scan(this.productId);
      this.options.onAssigned?.();
    } catch (error) {
      this.showError(`assignment failed: ${(error as Error).message}`);
    }
  }

  private openEditor(candidate: CandidateView | null): void {
    const host = document.createElement('div');
    this.root.appendChild(host);
    const editor = new WfnEditor(host, this.api, this.productId, {
      prefill: candidate ? uriToAttributes(candidate.uri) : undefined,
      derivedFrom: candidate?.uri ?? null,
      user: this.options.user,
      onSaved: this.options.onAssigned,
    });
    editor.render();
  }

  private banner(): HTMLElement {
    const banner = document.createElement('div');
    banner.className = 'error-banner';
    banner.hidden = true;
    return banner;
  }

  private showError(message: string): void {
    const banner = this.root.querySelector<HTMLElement>('.error-banner');
    if (banner) {
      banner.hidden = false;
      banner.textContent = message;
    }
  }
}
