import type { Decision, TaskPayload } from './types.js'
import { ApiError } from './api.js'

export interface DecisionRequest {
  taskId: string
  decision: Decision
  revision?: TaskPayload
  reviewer?: string
}

interface BufferedDecision extends DecisionRequest {
  entryId: string
  attempts: number
}

/** Persistence hook so the buffer survives a page reload. */
export interface OutboxStore {
  load(): string | null
  save(value: string): void
}

export class MemoryStore implements OutboxStore {
  private value: string | null = null
  load(): string | null {
    return this.value
  }
  save(value: string): void {
    this.value = value
  }
}

export class LocalStorageStore implements OutboxStore {
  constructor(private key: string = 'review-ui.outbox') {}
  load(): string | null {
    return window.localStorage.getItem(this.key)
  }
  save(value: string): void {
    window.localStorage.setItem(this.key, value)
  }
}

export type SendFn = (req: DecisionRequest) => Promise<void>

let entryCounter = 0
function nextEntryId(): string {
  entryCounter += 1
  return `${Date.now().toString(36)}-${entryCounter}`
}

/**
 * Offline decision buffer. A decision that cannot reach the service is kept
 * here (and persisted) instead of being dropped, then replayed in order on
 * the next flush. Each buffered entry is handed to the sender at most once
 * per flush and removed only after a confirmed success, so a reconnect
 * replays it exactly once.
 */
export class Outbox {
  private queue: BufferedDecision[] = []
  private draining = false

  constructor(
    private send: SendFn,
    private store: OutboxStore = new MemoryStore(),
  ) {
    const raw = this.store.load()
    if (raw) {
      try {
        this.queue = JSON.parse(raw) as BufferedDecision[]
      } catch {
        this.queue = [] // corrupt persistence is not worth crashing over
      }
    }
  }

  get size(): number {
    return this.queue.length
  }

  pending(): readonly DecisionRequest[] {
    return this.queue
  }

  private persist(): void {
    this.store.save(JSON.stringify(this.queue))
  }

  /**
   * Deliver now if possible. Retryable failures (no response, 5xx) buffer the
   * decision; anything else propagates to the caller since a retry could
   * never succeed.
   */
  async submit(req: DecisionRequest): Promise<'delivered' | 'buffered'> {
    // Decisions are ordered: while older ones wait, queue behind them.
    if (this.queue.length > 0) {
      this.buffer(req)
      return 'buffered'
    }
    try {
      await this.send(req)
      return 'delivered'
    } catch (err) {
      if (err instanceof ApiError && !err.retryable) throw err
      this.buffer(req)
      return 'buffered'
    }
  }

  private buffer(req: DecisionRequest): void {
    this.queue.push({ ...req, entryId: nextEntryId(), attempts: 0 })
    this.persist()
  }

  /**
   * Replay buffered decisions in order. Stops at the first failure, leaving
   * the failed entry and everything behind it intact for the next attempt.
   * Returns how many were delivered.
   */
  async flush(): Promise<number> {
    if (this.draining) return 0 // a concurrent flush would double-send
    this.draining = true
    let delivered = 0
    try {
      while (this.queue.length > 0) {
        const head = this.queue[0]!
        head.attempts += 1
        try {
          await this.send(head)
        } catch (err) {
          if (err instanceof ApiError && !err.retryable) {
            // The server has rejected it outright; keeping it would wedge the
            // queue forever. Drop it loudly rather than silently.
            this.queue.shift()
            this.persist()
            throw err
          }
          this.persist() // keep the bumped attempt count
          return delivered
        }
        this.queue.shift()
        this.persist()
        delivered += 1
      }
      return delivered
    } finally {
      this.draining = false
    }
  }
}
