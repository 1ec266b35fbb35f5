// Wire types for the /ws JSON protocol and GET /config.

export interface QuestionView {
  index: number;
  total: number;
  text: string;
}

export interface AnswerView {
  corner: number;
  text: string;
  color: string;
  number: number;
}

export interface FeedbackView {
  correct: boolean;
  corner: number;
  correct_corner: number;
}

export interface BeaconView {
  beacon_id: number;
  mean_rssi_dbm: number | null;
  distance_m: number;
  confidence: number;
}

export type Phase =
  | "idle"
  | "question_shown"
  | "answer_highlighted"
  | "feedback"
  | "won"
  | "game_over";

export interface Snapshot {
  type: "snapshot";
  seq: number;
  ts_ms: number;
  phase: Phase;
  question: QuestionView | null;
  answers: AnswerView[] | null;
  highlighted: number | null;
  feedback: FeedbackView | null;
  score_level: number;
  prize: string | null;
  position: { x: number; y: number };
  selection: number | null;
  beacons: BeaconView[];
}

export interface ErrorFrame {
  type: "error";
  reason: string;
}

export type ServerFrame = Snapshot | ErrorFrame;

export interface MoveFrame {
  type: "move";
  x: number;
  y: number;
}

export type ClientFrame =
  | MoveFrame
  | { type: "confirm" }
  | { type: "advance" }
  | { type: "reset" };

export interface CornerLegendEntry {
  corner: number;
  name: string;
  color: string;
  number: number;
}

export interface ServerConfig {
  mode: string;
  tick_rate_hz: number;
  window_size: number;
  shuffle_answers: boolean;
  room: { width: number; depth: number };
  corners: CornerLegendEntry[];
  policy: { enter_threshold_m: number; exit_threshold_m: number };
  question_count: number;
  ladder: string[];
}
