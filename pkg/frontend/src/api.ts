import type {
  Decision,
  EnqueueResponse,
  Kind,
  StatsResponse,
  TaskListResponse,
  TaskPayload,
  TaskView,
} from './types.js'

/** HTTP error from the service; status 0 means the request never got a response. */
export class ApiError extends Error {
  status: number
  constructor(status: number, message: string) {
    super(message)
    this.status = status
  }

  /** Worth retrying later: the server never saw it, or failed transiently. */
  get retryable(): boolean {
    return this.status === 0 || this.status >= 500
  }
}

export type FetchLike = typeof fetch

export class ReviewApi {
  private base: string
  private fetchFn: FetchLike

  constructor(baseUrl: string, fetchFn: FetchLike = fetch) {
    this.base = baseUrl.replace(/\/$/, '')
    this.fetchFn = fetchFn
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let res: Response
    try {
      res = await this.fetchFn(this.base + path, init)
    } catch {
      throw new ApiError(0, `network failure: ${path}`)
    }
    if (!res.ok) {
      let detail = res.statusText
      try {
        const body = (await res.json()) as { detail?: unknown }
        if (body.detail !== undefined) detail = JSON.stringify(body.detail)
      } catch {
        // non-JSON error body, keep statusText
      }
      throw new ApiError(res.status, detail)
    }
    return res
  }

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.request(path, init)
    return (await res.json()) as T
  }

  listTasks(opts: { kind?: Kind; status?: string; limit?: number } = {}): Promise<TaskListResponse> {
    const params = new URLSearchParams()
    if (opts.kind) params.set('kind', opts.kind)
    if (opts.status) params.set('status', opts.status)
    if (opts.limit !== undefined) params.set('limit', String(opts.limit))
    const qs = params.toString()
    return this.requestJson<TaskListResponse>('/tasks' + (qs ? `?${qs}` : ''))
  }

  getTask(taskId: string): Promise<TaskView> {
    return this.requestJson<TaskView>(`/tasks/${taskId}`)
  }

  review(
    taskId: string,
    decision: Decision,
    revision?: TaskPayload,
    reviewer?: string,
  ): Promise<TaskView> {
    const body: Record<string, unknown> = { decision }
    if (revision !== undefined) body.revision = revision
    if (reviewer) body.reviewer = reviewer
    return this.requestJson<TaskView>(`/tasks/${taskId}/review`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    })
  }

  enqueue(kind: Kind, samples: TaskPayload[]): Promise<EnqueueResponse> {
    return this.requestJson<EnqueueResponse>('/enqueue', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ kind, samples }),
    })
  }

  async exportCorpus(kind?: Kind): Promise<string> {
    const res = await this.request('/export' + (kind ? `?kind=${kind}` : ''))
    return res.text()
  }

  stats(): Promise<StatsResponse> {
    return this.requestJson<StatsResponse>('/stats')
  }
}
