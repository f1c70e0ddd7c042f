import type { Point } from './types.js'

// Model coordinates are integers in [0, 1000) on both axes, matching the
// server's coordinate system. Display coordinates are canvas pixels.

export const COORD_LIMIT = 1000

export interface ViewTransform {
  scale: number
  offsetX: number
  offsetY: number
}

/** Transform that fits the model square into a view, centered, never upscaling past fit. */
export function fitTransform(viewWidth: number, viewHeight: number): ViewTransform {
  const scale = Math.min(viewWidth, viewHeight) / COORD_LIMIT
  return {
    scale,
    offsetX: (viewWidth - COORD_LIMIT * scale) / 2,
    offsetY: (viewHeight - COORD_LIMIT * scale) / 2,
  }
}

export function toDisplay(p: Point, t: ViewTransform): { dx: number; dy: number } {
  return { dx: p.x * t.scale + t.offsetX, dy: p.y * t.scale + t.offsetY }
}

/**
 * Inverse of toDisplay, snapped to the integer model grid and clamped into
 * range. Rounding makes the round trip exact for every integer coordinate:
 * the float error of (m*s + o - o)/s is far below 0.5 for any sane scale.
 */
export function toModel(dx: number, dy: number, t: ViewTransform): Point {
  return {
    x: clampCoord(Math.round((dx - t.offsetX) / t.scale)),
    y: clampCoord(Math.round((dy - t.offsetY) / t.scale)),
  }
}

export function clampCoord(v: number): number {
  if (v < 0) return 0
  if (v >= COORD_LIMIT) return COORD_LIMIT - 1
  return v
}
