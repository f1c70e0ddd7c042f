import type {
  AffordanceRecord,
  Kind,
  PlanningRecord,
  Point,
  Problem,
  TaskPayload,
  TaskView,
  TrajectoryRecord,
} from './types.js'
import { validateRecord } from './validate.js'
import { toDisplay, type ViewTransform } from './coords.js'

export type Corner = 'tl' | 'tr' | 'bl' | 'br'

export type Handle =
  | { type: 'corner'; corner: Corner }
  | { type: 'vertex'; index: number }

const HANDLE_RADIUS = 8 // px hit radius around a draggable handle

/**
 * Client-side edit buffer for one task under review. Edits land here, not on
 * the task itself; the buffer may pass through invalid states while dragging
 * (that is what problems() reports), but submitPayload() refuses to produce
 * anything the service would reject.
 */
export class EditBuffer {
  readonly task: TaskView
  private buffer: TaskPayload
  private edited = false

  constructor(task: TaskView) {
    this.task = task
    this.buffer = structuredClone(task.payload)
  }

  get kind(): Kind {
    return this.task.kind
  }

  get dirty(): boolean {
    return this.edited
  }

  /** Current buffer contents; treat as read-only, mutate through the methods. */
  get current(): TaskPayload {
    return this.buffer
  }

  problems(): Problem[] {
    return validateRecord(this.task.kind, this.buffer)
  }

  canSubmitRevision(): boolean {
    return this.problems().length === 0
  }

  /** The revision to send, or null while the buffer violates an invariant. */
  submitPayload(): TaskPayload | null {
    if (!this.canSubmitRevision()) return null
    return structuredClone(this.buffer)
  }

  revert(): void {
    this.buffer = structuredClone(this.task.payload)
    this.edited = false
  }

  // -- affordance box editing ------------------------------------------------

  private boxOrThrow(): AffordanceRecord {
    if (this.task.kind !== 'affordance') {
      throw new Error(`not an affordance task: ${this.task.kind}`)
    }
    return this.buffer as AffordanceRecord
  }

  /**
   * Drag one corner to a model-space point. The opposite corner stays put.
   * No clamping against the invariant here: dragging rx past lx is allowed
   * to happen and shows up as a problem, blocking submit.
   */
  moveCorner(corner: Corner, p: Point): void {
    const box = this.boxOrThrow().box
    if (corner === 'tl' || corner === 'bl') box.lx = p.x
    else box.rx = p.x
    if (corner === 'tl' || corner === 'tr') box.ly = p.y
    else box.ry = p.y
    this.edited = true
  }

  setBoxField(field: keyof AffordanceRecord['box'], value: number): void {
    this.boxOrThrow().box[field] = value
    this.edited = true
  }

  // -- trajectory editing ----------------------------------------------------

  private trajOrThrow(): TrajectoryRecord {
    if (this.task.kind !== 'trajectory') {
      throw new Error(`not a trajectory task: ${this.task.kind}`)
    }
    return this.buffer as TrajectoryRecord
  }

  moveVertex(index: number, p: Point): void {
    const points = this.trajOrThrow().points
    const old = points[index]
    if (old === undefined) throw new Error(`no waypoint at index ${index}`)
    points[index] = { x: p.x, y: p.y }
    this.edited = true
  }

  // -- planning text editing ---------------------------------------------------

  private planningOrThrow(): PlanningRecord {
    if (this.task.kind !== 'planning') {
      throw new Error(`not a planning task: ${this.task.kind}`)
    }
    return this.buffer as PlanningRecord
  }

  setHighLevel(text: string): void {
    this.planningOrThrow().high_level = text
    this.edited = true
  }

  setStep(index: number, text: string): void {
    const steps = this.planningOrThrow().steps
    if (index < 0 || index >= steps.length) throw new Error(`no step at index ${index}`)
    steps[index] = text
    this.edited = true
  }

  // -- hit testing -------------------------------------------------------------

  /** The draggable handle under a display-space point, if any. */
  hitTest(dx: number, dy: number, t: ViewTransform): Handle | null {
    if (this.task.kind === 'affordance') {
      const box = (this.buffer as AffordanceRecord).box
      const corners: [Corner, Point][] = [
        ['tl', { x: box.lx, y: box.ly }],
        ['tr', { x: box.rx, y: box.ly }],
        ['bl', { x: box.lx, y: box.ry }],
        ['br', { x: box.rx, y: box.ry }],
      ]
      for (const [corner, p] of corners) {
        if (within(dx, dy, p, t)) return { type: 'corner', corner }
      }
      return null
    }
    if (this.task.kind === 'trajectory') {
      const points = (this.buffer as TrajectoryRecord).points
      for (let i = 0; i < points.length; i++) {
        if (within(dx, dy, points[i]!, t)) return { type: 'vertex', index: i }
      }
      return null
    }
    return null
  }

  /** Apply a drag of the given handle to a model-space point. */
  dragHandle(handle: Handle, p: Point): void {
    if (handle.type === 'corner') this.moveCorner(handle.corner, p)
    else this.moveVertex(handle.index, p)
  }
}

function within(dx: number, dy: number, p: Point, t: ViewTransform): boolean {
  const d = toDisplay(p, t)
  return Math.hypot(dx - d.dx, dy - d.dy) <= HANDLE_RADIUS
}
