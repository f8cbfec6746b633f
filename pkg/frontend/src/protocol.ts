/**
 * Wire protocol spoken with the session service: one JSON message per
 * WebSocket frame. Field names match the server bit for bit.
 */

export interface HelloMsg {
  type: "HELLO";
  participantId: string;
}

export interface GazeMsg {
  type: "GAZE";
  t_ms: number;
  x: number;
  y: number;
  lv: 0 | 1;
  rv: 0 | 1;
}

export interface DocReadyMsg {
  type: "DOC_READY";
  docId: string;
}

export interface NextMsg {
  type: "NEXT";
  docId: string;
}

export interface AnswersMsg {
  type: "ANSWERS";
  docId: string;
  choices: number[];
}

export interface RatingsMsg {
  type: "RATINGS";
  items: number[];
}

export type ClientMessage =
  | HelloMsg | GazeMsg | DocReadyMsg | NextMsg | AnswersMsg | RatingsMsg;

export interface RectJson {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface BarJson {
  id: string;
  label: string;
  series?: string;
  value: number;
  color: string;
}

export interface QuestionItemJson {
  kind: "rating" | "choice";
  prompt: string;
  scale?: number;
  options?: string[];
}

export interface DocJson {
  format: string;
  id: string;
  title: string;
  sentences: string[];
  references: { id: string; sentences: number[]; dataPoints: string[] }[];
  chart: { kind: string; bars: BarJson[]; axes?: { x?: string; y?: string } };
  layout: {
    aois: Record<string, RectJson[]>;
    bars: Record<string, RectJson>;
    sentences: Record<string, RectJson[]>;
  };
  source?: string;
  items?: QuestionItemJson[];
}

export interface ShowDocMsg {
  type: "SHOW_DOC";
  doc: DocJson;
}

export interface HighlightMsg {
  type: "HIGHLIGHT";
  refId: string;
  barIds: string[];
  outline: string;
  width: number;
}

export interface DesaturateMsg {
  type: "DESATURATE";
  refId: string;
  outline: string;
}

export interface RemoveMsg {
  type: "REMOVE";
  refId: string;
}

export interface QuestionsMsg {
  type: "QUESTIONS";
  docId: string;
  items: QuestionItemJson[];
}

export interface EndMsg {
  type: "END";
}

export interface ErrorMsg {
  type: "ERROR";
  code: string;
  message: string;
}

export type ServerMessage =
  | ShowDocMsg | HighlightMsg | DesaturateMsg | RemoveMsg
  | QuestionsMsg | EndMsg | ErrorMsg;

export type InterventionMsg = HighlightMsg | DesaturateMsg | RemoveMsg;

const SERVER_TYPES = new Set([
  "SHOW_DOC", "HIGHLIGHT", "DESATURATE", "REMOVE", "QUESTIONS", "END", "ERROR",
]);

export class ProtocolError extends Error {}

function requireFields(raw: Record<string, unknown>, fields: string[]): void {
  for (const f of fields) {
    if (!(f in raw)) {
      throw new ProtocolError(`${String(raw.type)} message is missing '${f}'`);
    }
  }
}

/** Parse one frame from the server; throws ProtocolError on garbage. */
export function parseServerMessage(text: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError(`not JSON: ${text.slice(0, 80)}`);
  }
  if (typeof raw !== "object" || raw === null || !("type" in raw)) {
    throw new ProtocolError("message must be an object with a 'type'");
  }
  const msg = raw as Record<string, unknown> & { type: string };
  if (!SERVER_TYPES.has(msg.type)) {
    throw new ProtocolError(`unknown server message type '${msg.type}'`);
  }
  switch (msg.type) {
    case "SHOW_DOC":
      requireFields(msg, ["doc"]);
      break;
    case "HIGHLIGHT":
      requireFields(msg, ["refId", "barIds", "outline", "width"]);
      break;
    case "DESATURATE":
      requireFields(msg, ["refId", "outline"]);
      break;
    case "REMOVE":
      requireFields(msg, ["refId"]);
      break;
    case "QUESTIONS":
      requireFields(msg, ["docId", "items"]);
      break;
    case "ERROR":
      requireFields(msg, ["code", "message"]);
      break;
  }
  return msg as unknown as ServerMessage;
}

export function encodeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
