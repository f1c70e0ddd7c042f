import type { Decision, Problem, StatsResponse, TaskView } from './types.js'
import { ReviewApi } from './api.js'
import { EditBuffer } from './editor.js'
import { Outbox } from './outbox.js'

export type DecideResult =
  | { ok: true; delivery: 'delivered' | 'buffered' }
  | { ok: false; problems: Problem[] }

/**
 * The review loop: one task on screen at a time, keyboard decisions, queue
 * advances on each decision. All writes go through the outbox so a network
 * drop buffers the decision instead of losing it.
 */
export class ReviewQueue {
  reviewer = ''
  private current_: EditBuffer | null = null
  private stats_: StatsResponse | null = null
  private outbox: Outbox
  private listeners: (() => void)[] = []

  constructor(private api: ReviewApi, outbox?: Outbox) {
    this.outbox =
      outbox ??
      new Outbox((req) => this.api.review(req.taskId, req.decision, req.revision, req.reviewer).then(() => undefined))
  }

  get current(): EditBuffer | null {
    return this.current_
  }

  get stats(): StatsResponse | null {
    return this.stats_
  }

  get buffered(): number {
    return this.outbox.size
  }

  onChange(fn: () => void): void {
    this.listeners.push(fn)
  }

  private notify(): void {
    for (const fn of this.listeners) fn()
  }

  /** Fetch the next pending task (any kind) and the latest stats. */
  async advance(): Promise<TaskView | null> {
    const [list, stats] = await Promise.all([
      this.api.listTasks({ status: 'pending', limit: 1 }),
      this.api.stats(),
    ])
    this.stats_ = stats
    const task = list.tasks[0] ?? null
    this.current_ = task ? new EditBuffer(task) : null
    this.notify()
    return task
  }

  async refreshStats(): Promise<void> {
    this.stats_ = await this.api.stats()
    this.notify()
  }

  /**
   * Submit a decision for the task on screen. A revise is validated first
   * and refused locally while the edit buffer violates an invariant; the
   * service never sees those.
   */
  async decide(decision: Decision): Promise<DecideResult> {
    const buf = this.current_
    if (!buf) return { ok: false, problems: [{ field: 'queue', message: 'no task under review' }] }

    let revision: ReturnType<EditBuffer['submitPayload']>
    if (decision === 'revise') {
      revision = buf.submitPayload()
      if (revision === null) return { ok: false, problems: buf.problems() }
    } else {
      revision = null
    }

    const delivery = await this.outbox.submit({
      taskId: buf.task.task_id,
      decision,
      revision: revision ?? undefined,
      reviewer: this.reviewer || undefined,
    })
    try {
      await this.advance()
    } catch {
      // offline: the decision is safe in the outbox, but there is no next
      // task to show until the connection returns
      this.current_ = null
      this.notify()
    }
    return { ok: true, delivery }
  }

  /** Keyboard map: a approve, r revise, x reject. Other keys are ignored. */
  async handleKey(key: string): Promise<DecideResult | null> {
    switch (key) {
      case 'a':
        return this.decide('approve')
      case 'r':
        return this.decide('revise')
      case 'x':
        return this.decide('reject')
      default:
        return null
    }
  }

  /** Replay buffered decisions (call on 'online' or a manual retry). */
  async reconnect(): Promise<number> {
    const delivered = await this.outbox.flush()
    if (delivered > 0) {
      if (this.current_ === null) {
        await this.advance() // resume the loop that the offline spell paused
      } else {
        await this.refreshStats()
      }
    }
    return delivered
  }
}
