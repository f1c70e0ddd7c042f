import { COORD_LIMIT } from './coords.js'
import type {
  AffordanceRecord,
  Box,
  Kind,
  PlanningRecord,
  Point,
  Problem,
  TaskPayload,
  TrajectoryRecord,
} from './types.js'

// Client-side twin of the server's record validation. Every rule the server
// enforces is enforced here, so a payload that passes validateRecord is never
// rejected by POST /tasks/{id}/review. Keep in sync with the service.

function checkCoord(field: string, v: number, out: Problem[]): void {
  if (!Number.isInteger(v)) {
    out.push({ field, message: `${field} must be an integer, got ${v}` })
  } else if (v < 0 || v >= COORD_LIMIT) {
    out.push({ field, message: `${field} must be in [0, ${COORD_LIMIT}), got ${v}` })
  }
}

function checkNonEmpty(field: string, v: string, out: Problem[]): void {
  if (typeof v !== 'string' || v.length === 0) {
    out.push({ field, message: `${field} must be a non-empty string` })
  }
}

export function validateBox(b: Box): Problem[] {
  const problems: Problem[] = []
  checkCoord('lx', b.lx, problems)
  checkCoord('ly', b.ly, problems)
  checkCoord('rx', b.rx, problems)
  checkCoord('ry', b.ry, problems)
  if (problems.length > 0) return problems
  if (!(b.lx < b.rx)) {
    problems.push({ field: 'lx', message: `lx < rx violated (lx=${b.lx}, rx=${b.rx})` })
  }
  if (!(b.ly < b.ry)) {
    problems.push({ field: 'ly', message: `ly < ry violated (ly=${b.ly}, ry=${b.ry})` })
  }
  return problems
}

export function validateAffordance(r: AffordanceRecord): Problem[] {
  const problems: Problem[] = []
  checkNonEmpty('image_ref', r.image_ref, problems)
  checkNonEmpty('object', r.object, problems)
  checkNonEmpty('prompt', r.prompt, problems)
  return problems.concat(validateBox(r.box))
}

export function validateTrajectory(r: TrajectoryRecord): Problem[] {
  const problems: Problem[] = []
  if (r.points.length < 1) {
    problems.push({ field: 'points', message: 'points must contain at least one waypoint' })
  }
  r.points.forEach((p: Point, i: number) => {
    checkCoord(`points[${i}].x`, p.x, problems)
    checkCoord(`points[${i}].y`, p.y, problems)
  })
  checkNonEmpty('episode_id', r.episode_id, problems)
  if (typeof r.instruction !== 'string') {
    problems.push({ field: 'instruction', message: 'instruction must be a string' })
  }
  return problems
}

export function validatePlanning(r: PlanningRecord): Problem[] {
  const problems: Problem[] = []
  checkNonEmpty('episode_id', r.episode_id, problems)
  if (typeof r.high_level !== 'string') {
    problems.push({ field: 'high_level', message: 'high_level must be a string' })
  }
  r.steps.forEach((s: string, i: number) => {
    if (typeof s !== 'string') {
      problems.push({ field: `steps[${i}]`, message: 'steps must be strings' })
    }
  })
  if (!Number.isInteger(r.frame_count) || r.frame_count < 0) {
    problems.push({ field: 'frame_count', message: 'frame_count must be a non-negative integer' })
  }
  if (r.resolution.length !== 2) {
    problems.push({ field: 'resolution', message: 'resolution must be a (width, height) pair' })
  } else {
    for (const side of r.resolution) {
      if (!Number.isInteger(side) || side < 1) {
        problems.push({ field: 'resolution', message: 'resolution sides must be positive integers' })
      }
    }
  }
  for (const field of ['success', 'occluded', 'trajectory_clear'] as const) {
    if (typeof r[field] !== 'boolean') {
      problems.push({ field, message: `${field} must be a boolean` })
    }
  }
  return problems
}

export function validateRecord(kind: Kind, payload: TaskPayload): Problem[] {
  switch (kind) {
    case 'affordance':
      return validateAffordance(payload as AffordanceRecord)
    case 'trajectory':
      return validateTrajectory(payload as TrajectoryRecord)
    case 'planning':
      return validatePlanning(payload as PlanningRecord)
  }
}
