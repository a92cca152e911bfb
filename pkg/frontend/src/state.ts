/** Run card store. The server owns all simulation state; this only mirrors
 * what it reported, so a reload loses nothing. */

import type { RunCard, RunInfo, SystemConfig } from "./types.js";

export class RunStore {
  private cards: RunCard[] = [];
  private listeners: Array<() => void> = [];

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  all(): RunCard[] {
    return [...this.cards];
  }

  add(id: string, label: string, config: SystemConfig): RunCard {
    const card: RunCard = {
      id,
      label,
      status: "queued",
      config,
      report: null,
      error: null,
      baseline: this.cards.length === 0,
    };
    this.cards.unshift(card);
    this.emit();
    return card;
  }

  update(id: string, info: RunInfo): void {
    const card = this.cards.find((c) => c.id === id);
    if (!card) return;
    card.status = info.status;
    card.report = info.report;
    card.error = info.error;
    this.emit();
  }

  markRetryable(id: string, message: string): void {
    const card = this.cards.find((c) => c.id === id);
    if (!card) return;
    card.status = "retryable";
    card.error = message;
    this.emit();
  }

  setBaseline(id: string): void {
    for (const card of this.cards) card.baseline = card.id === id;
    this.emit();
  }

  baseline(): RunCard | undefined {
    return this.cards.find((c) => c.baseline && c.report);
  }

  completed(): RunCard[] {
    return this.cards.filter((c) => c.report !== null);
  }
}
