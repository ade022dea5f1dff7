/**
 * Wire types for the session service, plus parsing of the fact strings it
 * returns. The server is the only source of truth; nothing here re-checks
 * constraints, it only gives the snapshot a typed shape.
 */

export interface FactEntry {
  fact: string;
  step: number;
}

export interface ViolationEntry {
  kind: string;
  subject: number;
  missing: number;
}

export interface ActionEntry {
  index: number;
  label: string;
  effects: string[];
}

export interface SessionSnapshot {
  session_id: string;
  strategy: string;
  step: number;
  valid: boolean;
  facts: FactEntry[];
  violations: ViolationEntry[];
  actions: ActionEntry[];
}

export interface AutocompleteSnapshot extends SessionSnapshot {
  autocompleted: boolean;
  result: string;
  steps_added: number;
}

export type LinkKind = "rack_frame" | "frame_module" | "element_module";

export type ParsedFact =
  | { kind: "isA"; id: number; className: string }
  | { kind: LinkKind; from: number; to: number };

const FACT_RE = /^([A-Za-z_][A-Za-z0-9_]*)\((\d+),([A-Za-z0-9_]+)\)$/;
const LINK_KINDS: ReadonlySet<string> = new Set([
  "rack_frame",
  "frame_module",
  "element_module",
]);

export class MalformedSnapshotError extends Error {}

/** Parse one fact string like `isA(1,elementA)` or `rack_frame(2,3)`. */
export function parseFact(text: string): ParsedFact {
  const match = FACT_RE.exec(text.trim());
  if (!match) {
    throw new MalformedSnapshotError(`unreadable fact: ${text}`);
  }
  const [, functor, first, second] = match;
  if (functor === "isA") {
    if (/^\d+$/.test(second!)) {
      throw new MalformedSnapshotError(`isA needs a class name: ${text}`);
    }
    return { kind: "isA", id: Number(first), className: second! };
  }
  if (LINK_KINDS.has(functor!)) {
    if (!/^\d+$/.test(second!)) {
      throw new MalformedSnapshotError(`link needs two ids: ${text}`);
    }
    return {
      kind: functor as LinkKind,
      from: Number(first),
      to: Number(second),
    };
  }
  throw new MalformedSnapshotError(`unknown fact functor: ${text}`);
}
