import { describe, expect, it } from 'vitest'
import { ReviewApi, type FetchLike } from '../src/api.js'
import { ReviewQueue } from '../src/queue.js'
import type { AffordanceRecord, TaskStatus, TaskView } from '../src/types.js'

// Miniature in-memory stand-in for the review service, faithful to the
// endpoints the queue uses: GET /tasks, POST /tasks/{id}/review, GET /stats.
function miniService(taskCount: number) {
  const tasks = new Map<string, TaskView>()
  for (let i = 0; i < taskCount; i++) {
    const id = `task-${String(i).padStart(2, '0')}`
    tasks.set(id, {
      task_id: id,
      kind: 'affordance',
      status: 'pending',
      payload: {
        image_ref: `img-${i}`,
        object: 'mug',
        prompt: 'lift',
        box: { lx: 10 * (i + 1), ly: 5, rx: 10 * (i + 1) + 40, ry: 60 },
      },
      revision: null,
      reviewer: null,
      reviewed_at: null,
    })
  }

  let offline = false
  const reviewLog: { taskId: string; decision: string }[] = []

  const json = (status: number, body: unknown) =>
    new Response(JSON.stringify(body), { status, headers: { 'content-type': 'application/json' } })

  const fetchFn: FetchLike = async (input, init) => {
    if (offline) throw new TypeError('fetch failed')
    const url = new URL(String(input))
    const sorted = [...tasks.values()].sort((a, b) => (a.task_id < b.task_id ? -1 : 1))

    if (url.pathname === '/tasks' && (!init || !init.method || init.method === 'GET')) {
      const status = url.searchParams.get('status')
      const limit = Number(url.searchParams.get('limit') ?? '50')
      const matching = sorted.filter((t) => !status || t.status === status)
      return json(200, { tasks: matching.slice(0, limit), total: matching.length })
    }

    const reviewMatch = url.pathname.match(/^\/tasks\/([^/]+)\/review$/)
    if (reviewMatch && init?.method === 'POST') {
      const task = tasks.get(reviewMatch[1]!)
      if (!task) return json(404, { detail: 'unknown task' })
      const body = JSON.parse(String(init.body)) as {
        decision: 'approve' | 'revise' | 'reject'
        revision?: AffordanceRecord
        reviewer?: string
      }
      if (body.decision === 'revise' && !body.revision) {
        return json(422, { detail: 'revise decisions require a revision payload' })
      }
      // the server would re-validate the revision; the client promises never
      // to send an invalid one, so reaching here with one is a test failure
      if (body.revision && !(body.revision.box.lx < body.revision.box.rx)) {
        return json(422, { detail: 'lx < rx violated' })
      }
      task.status = ({ approve: 'approved', revise: 'revised', reject: 'rejected' } as const)[body.decision]
      task.revision = body.revision ?? null
      task.reviewer = body.reviewer ?? 'anonymous'
      reviewLog.push({ taskId: task.task_id, decision: body.decision })
      return json(200, task)
    }

    if (url.pathname === '/stats') {
      const counts: Record<TaskStatus, number> = { pending: 0, approved: 0, revised: 0, rejected: 0 }
      for (const t of tasks.values()) counts[t.status] += 1
      return json(200, {
        kinds: { planning: {}, affordance: counts, trajectory: {} },
        total: tasks.size,
        pending: counts.pending,
      })
    }

    return json(404, { detail: `unhandled ${url.pathname}` })
  }

  return {
    fetchFn,
    reviewLog,
    setOffline(v: boolean) {
      offline = v
    },
    task(id: string) {
      return tasks.get(id)!
    },
  }
}

function makeQueue(taskCount: number) {
  const service = miniService(taskCount)
  const api = new ReviewApi('http://service.test', service.fetchFn)
  return { service, queue: new ReviewQueue(api) }
}

describe('ReviewQueue flow', () => {
  it('advance surfaces the first pending task and stats', async () => {
    const { queue } = makeQueue(3)
    const task = await queue.advance()
    expect(task?.task_id).toBe('task-00')
    expect(queue.stats?.pending).toBe(3)
  })

  it('an approve sends no revision body and advances the queue', async () => {
    const { service, queue } = makeQueue(2)
    await queue.advance()
    const result = await queue.decide('approve')
    expect(result).toEqual({ ok: true, delivery: 'delivered' })
    expect(service.task('task-00').status).toBe('approved')
    expect(service.task('task-00').revision).toBeNull()
    expect(queue.current?.task.task_id).toBe('task-01')
  })

  it('three decisions drop the pending count by three', async () => {
    const { queue } = makeQueue(5)
    await queue.advance()
    expect(queue.stats?.pending).toBe(5)
    await queue.decide('approve')
    await queue.decide('reject')
    const buf = queue.current!
    buf.moveCorner('br', { x: 700, y: 700 })
    await queue.decide('revise')
    expect(queue.stats?.pending).toBe(2)
  })

  it('a revise carries the edited geometry to the server', async () => {
    const { service, queue } = makeQueue(1)
    await queue.advance()
    queue.reviewer = 'vera'
    queue.current!.moveCorner('tl', { x: 3, y: 4 })
    const result = await queue.decide('revise')
    expect(result.ok).toBe(true)
    const stored = service.task('task-00')
    expect(stored.status).toBe('revised')
    expect((stored.revision as AffordanceRecord).box).toEqual({ lx: 3, ly: 4, rx: 50, ry: 60 })
    expect(stored.reviewer).toBe('vera')
  })

  it('an invalid edit buffer never reaches the service', async () => {
    const { service, queue } = makeQueue(1)
    await queue.advance()
    queue.current!.moveCorner('br', { x: 5, y: 60 }) // rx left of lx=10
    const result = await queue.decide('revise')
    expect(result.ok).toBe(false)
    if (!result.ok) {
      expect(result.problems.some((p) => p.message.includes('lx < rx'))).toBe(true)
    }
    expect(service.reviewLog).toEqual([]) // nothing was POSTed
    expect(service.task('task-00').status).toBe('pending')
    expect(queue.current?.task.task_id).toBe('task-00') // still on screen
  })

  it('keyboard keys map to decisions, others are ignored', async () => {
    const { service, queue } = makeQueue(3)
    await queue.advance()
    await queue.handleKey('a')
    await queue.handleKey('x')
    expect(await queue.handleKey('q')).toBeNull()
    expect(service.task('task-00').status).toBe('approved')
    expect(service.task('task-01').status).toBe('rejected')
    expect(service.task('task-02').status).toBe('pending')
  })

  it('offline decisions buffer, then replay exactly once on reconnect', async () => {
    const { service, queue } = makeQueue(2)
    await queue.advance()
    service.setOffline(true)

    const result = await queue.decide('approve')
    expect(result.ok && result.delivery).toBe('buffered')
    expect(queue.buffered).toBe(1)
    expect(service.task('task-00').status).toBe('pending') // never arrived

    service.setOffline(false)
    expect(await queue.reconnect()).toBe(1)
    expect(queue.buffered).toBe(0)
    expect(service.task('task-00').status).toBe('approved')
    expect(service.reviewLog.filter((r) => r.taskId === 'task-00').length).toBe(1)

    // a second reconnect has nothing to replay
    expect(await queue.reconnect()).toBe(0)
    expect(service.reviewLog.length).toBe(1)
  })
})
