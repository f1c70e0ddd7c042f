// Wire shapes of the review service HTTP API. Field names and nesting must
// match the server's JSON exactly; nothing here is client-invented except
// the edit-buffer types at the bottom.

export interface Box {
  lx: number
  ly: number
  rx: number
  ry: number
}

export interface Point {
  x: number
  y: number
}

export interface AffordanceRecord {
  image_ref: string
  object: string
  prompt: string
  box: Box
}

export interface TrajectoryRecord {
  points: Point[]
  episode_id: string
  instruction: string
}

export interface PlanningRecord {
  episode_id: string
  high_level: string
  steps: string[]
  frame_count: number
  resolution: [number, number]
  success: boolean
  occluded: boolean
  trajectory_clear: boolean
}

export type Kind = 'planning' | 'affordance' | 'trajectory'
export type TaskStatus = 'pending' | 'approved' | 'revised' | 'rejected'
export type Decision = 'approve' | 'revise' | 'reject'

export type TaskPayload = AffordanceRecord | TrajectoryRecord | PlanningRecord

export interface TaskView {
  task_id: string
  kind: Kind
  status: TaskStatus
  payload: TaskPayload
  revision: TaskPayload | null
  reviewer: string | null
  reviewed_at: string | null
}

export interface TaskListResponse {
  tasks: TaskView[]
  total: number
}

export interface EnqueueResponse {
  enqueued: number
  duplicates: number
  invalid: { index: number; error: string }[]
}

export interface StatsResponse {
  kinds: Record<Kind, Record<TaskStatus, number>>
  total: number
  pending: number
}

/** One violated constraint in the edit buffer, rendered inline next to the canvas. */
export interface Problem {
  field: string
  message: string
}
