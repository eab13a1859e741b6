/**
 * Page wiring: inventory listing on the left, the selected product's
 * candidate picker and triage board on the right.
 */

import { ApiClient, type ProductView } from './api.js';
import { CandidatePicker } from './candidatePicker.js';
import { TriageBoard } from './triageBoard.js';

export class App {
  private readonly api = new ApiClient();
  private selected: number | null = null;

  constructor(private readonly root: HTMLElement) {}

  async start(): Promise<void> {
    this.root.innerHTML = `
      <header><h1>Inventory vulnerability triage</h1></header>
      <main>
        <nav id="product-list"></nav>
        <section id="detail">
          <div id="candidates"></div>
          <div id="alerts"></div>
        </section>
      </main>`;
    await this.refreshProducts();
  }

  private async refreshProducts(): Promise<void> {
    const list = this.root.querySelector<HTMLElement>('#product-list');
    if (!list) return;
    const { products } = await this.api.listProducts();
    list.innerHTML = '';
    for (const product of products) {
      list.appendChild(this.productRow(product));
    }
    if (this.selected !== null) {
      await this.showProduct(this.selected);
    }
  }

  private productRow(product: ProductView): HTMLElement {
    const row = document.createElement('button');
    row.className = 'product-row';
    row.dataset.productId = String(product.id);
    const status = product.assigned
      ? `${product.alerts.pending} pending`
      : 'unassigned';
    row.textContent = `${product.vendor} ${product.product} ${product.version} (${status})`;
    row.addEventListener('click', () => void this.showProduct(product.id));
    return row;
  }

  private async showProduct(productId: number): Promise<void> {
    this.selected = productId;
    const candidateHost = this.root.querySelector<HTMLElement>('#candidates');
    const alertHost = this.root.querySelector<HTMLElement>('#alerts');
    if (!candidateHost || !alertHost) return;

    const board = new TriageBoard(alertHost, this.api, productId);
    const picker = new CandidatePicker(candidateHost, this.api, productId, {
      onAssigned: () => void board.load(),
    });
    await Promise.all([picker.load(), board.load()]);
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  void new App(document.getElementById('app')!).start();
}
