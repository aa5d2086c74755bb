// Payload shapes mirrored from the core's bus topics.

export interface BusFrame {
  op: "pub" | "sub" | "ack" | "err";
  topic?: string;
  seq?: number;
  stamp_us?: number;
  data?: any;
  code?: string;
  detail?: string;
  ok?: string;
}

export interface PanelButton {
  id: number;
  label: string;
  action: string;
  rect_mm: [number, number, number, number];
  color: string;
  state: "idle" | "armed" | "pressed";
}

export interface PanelModel {
  panel_size_mm: [number, number];
  buttons: PanelButton[];
}

export interface RobotStateMsg {
  joints: number[];
  pose: { position: number[]; orientation: number[] };
  links: number[][];
  gripper: { opening_mm: number; holding: string | null };
  wrist_rotation_active: boolean;
  action: string | null;
}

export interface ContactMsg {
  thumb: { s: number; f: number };
  index: { s: number; f: number };
  pattern: number;
}

export interface SceneMsg {
  containers: { id: string; fill_fraction: number }[];
  box: { footprint: number[]; content_fraction: number };
  attached: string | null;
  pouring: boolean;
}

export type GestureName = "palm" | "one";
