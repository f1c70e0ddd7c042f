import type { AffordanceRecord, TrajectoryRecord } from './types.js'
import { toDisplay, type ViewTransform } from './coords.js'

// Canvas drawing for the two geometry kinds. Model coordinates go through
// the shared transform so what the editor hit-tests is what gets drawn.

const HANDLE_SIZE = 6

export function drawAffordance(
  ctx: CanvasRenderingContext2D,
  record: AffordanceRecord,
  t: ViewTransform,
  valid: boolean,
): void {
  const { box } = record
  const tl = toDisplay({ x: box.lx, y: box.ly }, t)
  const br = toDisplay({ x: box.rx, y: box.ry }, t)
  ctx.strokeStyle = valid ? '#2e86de' : '#d63031'
  ctx.lineWidth = 2
  ctx.strokeRect(tl.dx, tl.dy, br.dx - tl.dx, br.dy - tl.dy)

  ctx.fillStyle = ctx.strokeStyle
  for (const [x, y] of [
    [box.lx, box.ly],
    [box.rx, box.ly],
    [box.lx, box.ry],
    [box.rx, box.ry],
  ] as const) {
    const d = toDisplay({ x, y }, t)
    ctx.fillRect(d.dx - HANDLE_SIZE / 2, d.dy - HANDLE_SIZE / 2, HANDLE_SIZE, HANDLE_SIZE)
  }
}

export function drawTrajectory(
  ctx: CanvasRenderingContext2D,
  record: TrajectoryRecord,
  t: ViewTransform,
): void {
  const pts = record.points.map((p) => toDisplay(p, t))
  if (pts.length === 0) return

  ctx.strokeStyle = '#27ae60'
  ctx.lineWidth = 2
  ctx.beginPath()
  ctx.moveTo(pts[0]!.dx, pts[0]!.dy)
  for (const p of pts.slice(1)) ctx.lineTo(p.dx, p.dy)
  ctx.stroke()

  pts.forEach((p, i) => {
    const isStart = i === 0
    const isGoal = i === pts.length - 1
    // start and goal get bigger, distinct markers; interior vertices small dots
    ctx.fillStyle = isStart ? '#e67e22' : isGoal ? '#8e44ad' : '#27ae60'
    ctx.beginPath()
    ctx.arc(p.dx, p.dy, isStart || isGoal ? 7 : 4, 0, Math.PI * 2)
    ctx.fill()
    ctx.fillStyle = '#222'
    ctx.font = '11px sans-serif'
    ctx.fillText(String(i), p.dx + 8, p.dy - 8)
  })
}

/** Grey placeholder when the image asset is missing; the task stays reviewable. */
export function drawPlaceholder(ctx: CanvasRenderingContext2D, w: number, h: number): void {
  ctx.fillStyle = '#dfe6e9'
  ctx.fillRect(0, 0, w, h)
  ctx.fillStyle = '#636e72'
  ctx.font = '14px sans-serif'
  ctx.textAlign = 'center'
  ctx.fillText('image unavailable', w / 2, h / 2)
  ctx.textAlign = 'start'
}
