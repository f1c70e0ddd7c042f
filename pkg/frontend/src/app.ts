import type { AffordanceRecord, PlanningRecord, TrajectoryRecord } from './types.js'
import { ReviewApi } from './api.js'
import { LocalStorageStore, Outbox } from './outbox.js'
import { ReviewQueue } from './queue.js'
import { fitTransform, toModel, type ViewTransform } from './coords.js'
import { drawAffordance, drawPlaceholder, drawTrajectory } from './overlay.js'
import type { Handle } from './editor.js'

const CANVAS_SIZE = 640

/**
 * Review screen wiring: canvas on the left, task fields and decision buttons
 * on the right, stats strip on top. One task on screen at a time.
 */
export class App {
  private queue: ReviewQueue
  private canvas!: HTMLCanvasElement
  private ctx!: CanvasRenderingContext2D
  private transform: ViewTransform = fitTransform(CANVAS_SIZE, CANVAS_SIZE)
  private image: HTMLImageElement | null = null
  private dragging: Handle | null = null
  private statusLine = ''

  constructor(private root: HTMLElement, apiBase: string) {
    const api = new ReviewApi(apiBase)
    const outbox = new Outbox(
      (req) => api.review(req.taskId, req.decision, req.revision, req.reviewer).then(() => undefined),
      new LocalStorageStore(),
    )
    this.queue = new ReviewQueue(api, outbox)
    this.queue.onChange(() => this.render())
  }

  async start(): Promise<void> {
    this.root.innerHTML = `
      <div class="topbar">
        <span class="stats"></span>
        <span class="buffered"></span>
        <label>reviewer <input type="text" class="reviewer" placeholder="anonymous"></label>
      </div>
      <div class="main">
        <div class="viewport">
          <canvas width="${CANVAS_SIZE}" height="${CANVAS_SIZE}"></canvas>
        </div>
        <div class="panel">
          <div class="task-meta"></div>
          <div class="fields"></div>
          <div class="problems"></div>
          <div class="actions">
            <button data-decision="approve">approve <kbd>a</kbd></button>
            <button data-decision="revise">revise <kbd>r</kbd></button>
            <button data-decision="reject">reject <kbd>x</kbd></button>
          </div>
          <div class="status"></div>
        </div>
      </div>
    `
    this.canvas = this.root.querySelector('canvas')!
    this.ctx = this.canvas.getContext('2d')!

    this.bindEvents()
    await this.queue.reconnect() // drain anything buffered before the reload
    await this.queue.advance()
  }

  private bindEvents(): void {
    const reviewerInput = this.root.querySelector<HTMLInputElement>('.reviewer')!
    reviewerInput.addEventListener('input', () => {
      this.queue.reviewer = reviewerInput.value.trim()
    })

    this.root.querySelectorAll<HTMLButtonElement>('.actions button').forEach((btn) => {
      btn.addEventListener('click', () => {
        void this.decide(btn.dataset.decision as 'approve' | 'revise' | 'reject')
      })
    })

    // Keyboard decisions, skipped while typing into a field.
    document.addEventListener('keydown', (ev) => {
      const target = ev.target as HTMLElement
      if (target.tagName === 'INPUT' || target.tagName === 'TEXTAREA') return
      if (ev.key === 'a' || ev.key === 'r' || ev.key === 'x') {
        void this.decide(ev.key === 'a' ? 'approve' : ev.key === 'r' ? 'revise' : 'reject')
      }
    })

    this.canvas.addEventListener('mousedown', (ev) => {
      const buf = this.queue.current
      if (!buf) return
      const { x, y } = this.canvasPoint(ev)
      this.dragging = buf.hitTest(x, y, this.transform)
    })
    this.canvas.addEventListener('mousemove', (ev) => {
      if (!this.dragging) return
      const buf = this.queue.current
      if (!buf) return
      const { x, y } = this.canvasPoint(ev)
      buf.dragHandle(this.dragging, toModel(x, y, this.transform))
      this.render()
    })
    const stopDrag = () => {
      this.dragging = null
    }
    this.canvas.addEventListener('mouseup', stopDrag)
    this.canvas.addEventListener('mouseleave', stopDrag)

    window.addEventListener('online', () => {
      void this.queue.reconnect().then((n) => {
        if (n > 0) this.setStatus(`replayed ${n} buffered decision${n === 1 ? '' : 's'}`)
      })
    })
  }

  private canvasPoint(ev: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect()
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top }
  }

  private async decide(decision: 'approve' | 'revise' | 'reject'): Promise<void> {
    const result = await this.queue.decide(decision)
    if (!result.ok) {
      this.setStatus('fix the highlighted fields before submitting a revision')
      this.render()
      return
    }
    this.setStatus(result.delivery === 'buffered' ? 'offline: decision buffered, will retry' : `${decision} sent`)
    this.image = null
    this.loadImageForCurrent()
  }

  /** Best-effort image fetch from the service's asset mount. */
  private loadImageForCurrent(): void {
    const buf = this.queue.current
    this.image = null
    if (!buf || buf.kind !== 'affordance') {
      this.render()
      return
    }
    const record = buf.current as AffordanceRecord
    const img = new Image()
    img.onload = () => {
      this.image = img
      this.render()
    }
    img.onerror = () => {
      this.image = null // placeholder path; text fields stay editable
      this.render()
    }
    img.src = `assets/${record.image_ref}`
  }

  private setStatus(text: string): void {
    this.statusLine = text
    const el = this.root.querySelector('.status')
    if (el) el.textContent = text
  }

  // -- rendering ---------------------------------------------------------------

  private render(): void {
    this.renderStats()
    this.renderCanvas()
    this.renderPanel()
  }

  private renderStats(): void {
    const stats = this.queue.stats
    const el = this.root.querySelector('.stats')!
    el.textContent = stats
      ? `pending ${stats.pending} / total ${stats.total}`
      : 'loading…'
    const buffered = this.root.querySelector('.buffered')!
    buffered.textContent = this.queue.buffered > 0 ? `⏳ ${this.queue.buffered} buffered` : ''
  }

  private renderCanvas(): void {
    const ctx = this.ctx
    ctx.clearRect(0, 0, CANVAS_SIZE, CANVAS_SIZE)
    const buf = this.queue.current
    if (!buf) return

    if (this.image) {
      ctx.drawImage(this.image, 0, 0, CANVAS_SIZE, CANVAS_SIZE)
    } else if (buf.kind !== 'planning') {
      drawPlaceholder(ctx, CANVAS_SIZE, CANVAS_SIZE)
    }

    if (buf.kind === 'affordance') {
      drawAffordance(ctx, buf.current as AffordanceRecord, this.transform, buf.canSubmitRevision())
    } else if (buf.kind === 'trajectory') {
      drawTrajectory(ctx, buf.current as TrajectoryRecord, this.transform)
    }
  }

  private renderPanel(): void {
    const buf = this.queue.current
    const meta = this.root.querySelector('.task-meta')!
    const fields = this.root.querySelector<HTMLElement>('.fields')!
    const problemsEl = this.root.querySelector<HTMLElement>('.problems')!

    if (!buf) {
      meta.textContent = 'queue empty, nothing pending'
      fields.innerHTML = ''
      problemsEl.innerHTML = ''
      return
    }

    meta.textContent = `${buf.kind} · ${buf.task.task_id}${buf.dirty ? ' · edited' : ''}`
    this.renderFields(fields, buf.kind)

    const problems = buf.problems()
    problemsEl.innerHTML = problems
      .map((p) => `<div class="problem">⚠ ${escapeHtml(p.field)}: ${escapeHtml(p.message)}</div>`)
      .join('')

    // revise is gated on a valid buffer; approve/reject always available
    const reviseBtn = this.root.querySelector<HTMLButtonElement>('button[data-decision="revise"]')!
    reviseBtn.disabled = !buf.canSubmitRevision()
  }

  private renderFields(container: HTMLElement, kind: string): void {
    const buf = this.queue.current!
    if (kind === 'affordance') {
      const r = buf.current as AffordanceRecord
      container.innerHTML = `
        <dl>
          <dt>image</dt><dd>${escapeHtml(r.image_ref)}</dd>
          <dt>object</dt><dd>${escapeHtml(r.object)}</dd>
          <dt>prompt</dt><dd>${escapeHtml(r.prompt)}</dd>
          <dt>box</dt><dd>(${r.box.lx}, ${r.box.ly}) – (${r.box.rx}, ${r.box.ry})</dd>
        </dl>
        <p class="hint">drag a corner handle to adjust the box</p>
      `
    } else if (kind === 'trajectory') {
      const r = buf.current as TrajectoryRecord
      container.innerHTML = `
        <dl>
          <dt>episode</dt><dd>${escapeHtml(r.episode_id)}</dd>
          <dt>instruction</dt><dd>${escapeHtml(r.instruction)}</dd>
          <dt>waypoints</dt><dd>${r.points.length}</dd>
        </dl>
        <p class="hint">drag a vertex to adjust the path; 0 is start, last is goal</p>
      `
    } else {
      const r = buf.current as PlanningRecord
      container.innerHTML = `
        <dl>
          <dt>episode</dt><dd>${escapeHtml(r.episode_id)}</dd>
        </dl>
        <label>task <textarea class="high-level" rows="2">${escapeHtml(r.high_level)}</textarea></label>
        ${r.steps
          .map(
            (s, i) =>
              `<label>step ${i + 1} <textarea class="step" data-index="${i}" rows="2">${escapeHtml(s)}</textarea></label>`,
          )
          .join('')}
      `
      container.querySelector<HTMLTextAreaElement>('.high-level')!.addEventListener('input', (ev) => {
        buf.setHighLevel((ev.target as HTMLTextAreaElement).value)
      })
      container.querySelectorAll<HTMLTextAreaElement>('.step').forEach((area) => {
        area.addEventListener('input', () => {
          buf.setStep(Number(area.dataset.index), area.value)
        })
      })
    }
  }
}

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}
