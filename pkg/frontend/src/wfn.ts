/**
 * Client-side WFN helpers: field validation mirroring the server's
 * invariants, and a URI preview binder so edits show their bound form
 * before saving. The server remains authoritative; this only guards the
 * editor's save button and renders previews.
 */

import { WFN_ATTRIBUTES, type WfnAttribute, type WfnAttributes } from './api.js';

export const ANY = '*';
export const NA = '-';

const URI_SAFE = /^[a-z0-9._*?-]$/;

export interface FieldValidation {
  valid: boolean;
  error?: string;
}

export function validateAttribute(name: WfnAttribute, value: string): FieldValidation {
  if (value === ANY || value === NA) {
    return { valid: true };
  }
  if (value.length === 0) {
    return { valid: false, error: 'empty value; use ANY or NA instead' };
  }
  if (value !== value.toLowerCase()) {
    return { valid: false, error: 'must be lowercase' };
  }
  if (/\s/.test(value)) {
    return { valid: false, error: 'no whitespace; use underscores' };
  }
  if (name === 'part' && !['a', 'o', 'h'].includes(value)) {
    return { valid: false, error: 'part must be a, o, or h' };
  }
  return { valid: true };
}

export function validateWfn(wfn: WfnAttributes): Map<WfnAttribute, string> {
  const errors = new Map<WfnAttribute, string>();
  for (const name of WFN_ATTRIBUTES) {
    const check = validateAttribute(name, wfn[name]);
    if (!check.valid && check.error) {
      errors.set(name, check.error);
    }
  }
  return errors;
}

function encodeComponent(value: string): string {
  if (value === ANY) return '';
  if (value === NA) return '-';
  let out = '';
  for (const ch of value) {
    if (URI_SAFE.test(ch)) {
      out += ch;
    } else {
      const bytes = new TextEncoder().encode(ch);
      for (const byte of bytes) {
        out += '%' + byte.toString(16).padStart(2, '0');
      }
    }
  }
  return out;
}

/** Bind attribute values to their CPE URI form, eliding trailing ANYs. */
export function bindToUri(wfn: WfnAttributes): string {
  const packNeeded = (['sw_edition', 'target_sw', 'target_hw', 'other'] as const).some(
    (name) => wfn[name] !== ANY,
  );
  const components = [
    encodeComponent(wfn.part),
    encodeComponent(wfn.vendor),
    encodeComponent(wfn.product),
    encodeComponent(wfn.version),
    encodeComponent(wfn.update),
  ];
  if (packNeeded) {
    components.push(
      [
        encodeComponent(wfn.language),
        encodeComponent(wfn.edition),
        encodeComponent(wfn.sw_edition),
        encodeComponent(wfn.target_sw),
        encodeComponent(wfn.target_hw),
        encodeComponent(wfn.other),
      ].join('~'),
    );
  } else {
    components.push(encodeComponent(wfn.edition));
    components.push(encodeComponent(wfn.language));
  }
  while (components.length > 0 && components[components.length - 1] === '') {
    components.pop();
  }
  return 'cpe:/' + components.join(':');
}

export function emptyWfn(): WfnAttributes {
  const wfn = {} as WfnAttributes;
  for (const name of WFN_ATTRIBUTES) {
    wfn[name] = ANY;
  }
  wfn.part = 'a';
  return wfn;
}

/** Parse a candidate's URI into editor prefill values (best effort). */
export function uriToAttributes(uri: string): WfnAttributes {
  const wfn = emptyWfn();
  if (!uri.toLowerCase().startsWith('cpe:/')) {
    return wfn;
  }
  const components = uri.slice('cpe:/'.length).split(':');
  const plain: WfnAttribute[] = ['part', 'vendor', 'product', 'version', 'update'];
  plain.forEach((name, i) => {
    wfn[name] = decodeComponent(components[i] ?? '');
  });
  const edition = components[5] ?? '';
  if (edition.includes('~')) {
    const slots = edition.split('~');
    if (slots[0]) wfn.language = decodeComponent(slots[0]);
    wfn.edition = decodeComponent(slots[1] ?? '');
    wfn.sw_edition = decodeComponent(slots[2] ?? '');
    wfn.target_sw = decodeComponent(slots[3] ?? '');
    wfn.target_hw = decodeComponent(slots[4] ?? '');
    wfn.other = decodeComponent(slots[5] ?? '');
  } else {
    wfn.edition = decodeComponent(edition);
    if (components[6]) wfn.language = decodeComponent(components[6]);
  }
  return wfn;
}

function decodeComponent(raw: string): string {
  if (raw === '') return ANY;
  if (raw === '-') return NA;
  return raw.replace(/%([0-9a-f]{2})/g, (_, hex: string) => {
    const code = parseInt(hex, 16);
    if (code === 1) return '?';
    if (code === 2) return '*';
    return String.fromCharCode(code);
  });
}
