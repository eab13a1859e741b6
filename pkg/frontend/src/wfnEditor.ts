/**
 * WFN editor: all 11 attributes editable, each with ANY/NA toggles.
 *
 * Validation mirrors the server's name invariants and disables save while
 * any field is invalid. A live preview shows the URI the edited name binds
 * to. Saving submits the assignment with source USER_EDITED.
 */

import { ApiClient, WFN_ATTRIBUTES, type WfnAttribute, type WfnAttributes } from './api.js';
import { ANY, NA, bindToUri, emptyWfn, validateAttribute } from './wfn.js';

export interface WfnEditorOptions {
  prefill?: WfnAttributes;
  derivedFrom?: string | null;
  user?: string;
  onSaved?: () => void;
}

export class WfnEditor {
  private values: WfnAttributes;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly productId: number,
    private readonly options: WfnEditorOptions = {},
  ) {
    this.values = { ...(options.prefill ?? emptyWfn()) };
  }

  render(): void {
    this.root.innerHTML = '';
    const form = document.createElement('form');
    form.className = 'wfn-editor';

    for (const name of WFN_ATTRIBUTES) {
      form.appendChild(this.fieldRow(name));
    }

    const preview = document.createElement('output');
    preview.className = 'uri-preview';
    form.appendChild(preview);

    const error = document.createElement('div');
    error.className = 'error-banner';
    error.hidden = true;
    form.appendChild(error);

    const save = document.createElement('button');
    save.type = 'submit';
    save.className = 'save-wfn';
    save.textContent = 'Assign edited name';
    form.appendChild(save);

    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.save();
    });

    this.root.appendChild(form);
    this.refresh();
  }

  setValue(name: WfnAttribute, value: string): void {
    this.values[name] = value;
    const input = this.root.querySelector<HTMLInputElement>(`input[name="${name}"]`);
    const toggle = this.root.querySelector<HTMLSelectElement>(`select[name="${name}-kind"]`);
    if (input && toggle) {
      if (value === ANY || value === NA) {
        toggle.value = value === ANY ? 'ANY' : 'NA';
        input.value = '';
        input.disabled = true;
      } else {
        toggle.value = 'value';
        input.value = value;
        input.disabled = false;
      }
    }
    this.refresh();
  }

  private fieldRow(name: WfnAttribute): HTMLElement {
    const row = document.createElement('label');
    row.className = 'wfn-field';
    row.dataset.attribute = name;

    const caption = document.createElement('span');
    caption.textContent = name;
    row.appendChild(caption);

    const toggle = document.createElement('select');
    toggle.name = `${name}-kind`;
    for (const kind of ['value', 'ANY', 'NA']) {
      const option = document.createElement('option');
      option.value = kind;
      option.textContent = kind;
      toggle.appendChild(option);
    }
    row.appendChild(toggle);

    const input = document.createElement('input');
    input.name = name;
    input.type = 'text';
    row.appendChild(input);

    const message = document.createElement('small');
    message.className = 'field-error';
    row.appendChild(message);

    const current = this.values[name];
    if (current === ANY || current === NA) {
      toggle.value = current === ANY ? 'ANY' : 'NA';
      input.disabled = true;
    } else {
      toggle.value = 'value';
      input.value = current;
    }

    toggle.addEventListener('change', () => {
      if (toggle.value === 'ANY') {
        this.values[name] = ANY;
        input.value = '';
        input.disabled = true;
      } else if (toggle.value === 'NA') {
        this.values[name] = NA;
        input.value = '';
        input.disabled = true;
      } else {
        input.disabled = false;
        this.values[name] = input.value;
      }
      this.refresh();
    });
    input.addEventListener('input', () => {
      this.values[name] = input.value;
      this.refresh();
    });

    return row;
  }

  private refresh(): void {
    let allValid = true;
    for (const name of WFN_ATTRIBUTES) {
      const check = validateAttribute(name, this.values[name]);
      const row = this.root.querySelector<HTMLElement>(`[data-attribute="${name}"]`);
      const message = row?.querySelector<HTMLElement>('.field-error');
      if (message) {
        message.textContent = check.valid ? '' : (check.error ?? 'invalid');
      }
      allValid &&= check.valid;
    }
    const save = this.root.querySelector<HTMLButtonElement>('.save-wfn');
    if (save) {
      save.disabled = !allValid;
    }
    const preview = this.root.querySelector<HTMLOutputElement>('.uri-preview');
    if (preview) {
      preview.value = allValid ? bindToUri(this.values) : '';
    }
  }

  private async save(): Promise<void> {
    try {
      await this.api.assign(
        this.productId,
        this.values,
        'USER_EDITED',
        this.options.user ?? '',
        this.options.derivedFrom ?? null,
      );
      await this.api.scan(this.productId);
      this.options.onSaved?.();
    } catch (error) {
      const banner = this.root.querySelector<HTMLElement>('.error-banner');
      if (banner) {
        banner.hidden = false;
        banner.textContent = `assignment failed: ${(error as Error).message}`;
      }
    }
  }
}
