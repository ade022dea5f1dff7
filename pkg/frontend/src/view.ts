/**
 * Pure view model for a session snapshot. Builds the containment graph
 * (racks hold frames, frames hold modules) plus the element list, annotates
 * every object and link with the step it first appeared, and attaches
 * violation badges by subject. Any inconsistency in the snapshot throws
 * MalformedSnapshotError before anything is assembled, so callers either get
 * a complete model or none at all.
 */

import {
  MalformedSnapshotError,
  parseFact,
  type SessionSnapshot,
  type ViolationEntry,
} from "./model.js";

const RACK_CLASSES: ReadonlySet<string> = new Set(["rackSingle", "rackDouble"]);
const MODULE_CLASSES: ReadonlySet<string> = new Set([
  "moduleI",
  "moduleII",
  "moduleIII",
  "moduleIV",
  "moduleV",
]);
const ELEMENT_CLASSES: ReadonlySet<string> = new Set([
  "elementA",
  "elementB",
  "elementC",
  "elementD",
]);

export interface Badge {
  kind: string;
  missing: number;
}

export interface ObjectView {
  id: number;
  className: string;
  step: number;
  badges: Badge[];
}

export interface ModuleView extends ObjectView {
  /** Step of the frame_module link placing it, when nested under a frame. */
  linkStep: number | null;
}

export interface FrameView extends ObjectView {
  linkStep: number | null;
  modules: ModuleView[];
}

export interface RackView extends ObjectView {
  frames: FrameView[];
}

export interface ElementModuleRef {
  moduleId: number;
  linkStep: number;
}

export interface ElementView extends ObjectView {
  modules: ElementModuleRef[];
}

export interface SessionView {
  step: number;
  valid: boolean;
  strategy: string;
  racks: RackView[];
  /** Frames not linked to any rack, modules not linked to any frame. */
  looseFrames: FrameView[];
  looseModules: ModuleView[];
  elements: ElementView[];
  violations: ViolationEntry[];
}

interface ObjectRecord {
  id: number;
  className: string;
  step: number;
}

function byId(a: { id: number }, b: { id: number }): number {
  return a.id - b.id;
}

export function buildViewModel(snapshot: SessionSnapshot): SessionView {
  const objects = new Map<number, ObjectRecord>();
  const rackOfFrame = new Map<number, { rack: number; step: number }>();
  const frameOfModule = new Map<number, { frame: number; step: number }>();
  const modulesOfElement = new Map<number, ElementModuleRef[]>();

  for (const entry of snapshot.facts) {
    const fact = parseFact(entry.fact);
    if (fact.kind === "isA") {
      if (objects.has(fact.id)) {
        throw new MalformedSnapshotError(`object ${fact.id} typed twice`);
      }
      objects.set(fact.id, {
        id: fact.id,
        className: fact.className,
        step: entry.step,
      });
    } else if (fact.kind === "rack_frame") {
      rackOfFrame.set(fact.to, { rack: fact.from, step: entry.step });
    } else if (fact.kind === "frame_module") {
      frameOfModule.set(fact.to, { frame: fact.from, step: entry.step });
    } else {
      const refs = modulesOfElement.get(fact.from) ?? [];
      refs.push({ moduleId: fact.to, linkStep: entry.step });
      modulesOfElement.set(fact.from, refs);
    }
  }

  const requireObject = (
    id: number,
    role: string,
    classes: ReadonlySet<string>,
  ): ObjectRecord => {
    const record = objects.get(id);
    if (record === undefined) {
      throw new MalformedSnapshotError(`${role} ${id} has no type fact`);
    }
    if (!classes.has(record.className)) {
      throw new MalformedSnapshotError(
        `${role} ${id} is ${record.className}`,
      );
    }
    return record;
  };

  // Check every link endpoint up front so a bad snapshot yields no model
  // at all instead of a tree with links quietly dropped.
  const FRAME_ONLY: ReadonlySet<string> = new Set(["frame"]);
  for (const [frameId, placement] of rackOfFrame) {
    requireObject(frameId, "frame", FRAME_ONLY);
    requireObject(placement.rack, "rack", RACK_CLASSES);
  }
  for (const [moduleId, placement] of frameOfModule) {
    requireObject(moduleId, "module", MODULE_CLASSES);
    requireObject(placement.frame, "frame", FRAME_ONLY);
  }
  for (const [elementId, refs] of modulesOfElement) {
    requireObject(elementId, "element", ELEMENT_CLASSES);
    for (const ref of refs) {
      requireObject(ref.moduleId, "module", MODULE_CLASSES);
    }
  }

  const badgesBySubject = new Map<number, Badge[]>();
  for (const violation of snapshot.violations) {
    const badges = badgesBySubject.get(violation.subject) ?? [];
    badges.push({ kind: violation.kind, missing: violation.missing });
    badgesBySubject.set(violation.subject, badges);
  }
  const badgesFor = (id: number): Badge[] => badgesBySubject.get(id) ?? [];

  const moduleView = (record: ObjectRecord, linkStep: number | null): ModuleView => ({
    ...record,
    badges: badgesFor(record.id),
    linkStep,
  });

  const modulesByFrame = new Map<number, ModuleView[]>();
  const looseModules: ModuleView[] = [];
  for (const record of objects.values()) {
    if (!MODULE_CLASSES.has(record.className)) {
      continue;
    }
    const placement = frameOfModule.get(record.id);
    if (placement === undefined) {
      looseModules.push(moduleView(record, null));
    } else {
      const views = modulesByFrame.get(placement.frame) ?? [];
      views.push(moduleView(record, placement.step));
      modulesByFrame.set(placement.frame, views);
    }
  }

  const frameView = (record: ObjectRecord, linkStep: number | null): FrameView => ({
    ...record,
    badges: badgesFor(record.id),
    linkStep,
    modules: (modulesByFrame.get(record.id) ?? []).sort(byId),
  });

  const framesByRack = new Map<number, FrameView[]>();
  const looseFrames: FrameView[] = [];
  for (const record of objects.values()) {
    if (record.className !== "frame") {
      continue;
    }
    const placement = rackOfFrame.get(record.id);
    if (placement === undefined) {
      looseFrames.push(frameView(record, null));
    } else {
      const views = framesByRack.get(placement.rack) ?? [];
      views.push(frameView(record, placement.step));
      framesByRack.set(placement.rack, views);
    }
  }

  const racks: RackView[] = [];
  const elements: ElementView[] = [];
  for (const record of objects.values()) {
    if (RACK_CLASSES.has(record.className)) {
      racks.push({
        ...record,
        badges: badgesFor(record.id),
        frames: (framesByRack.get(record.id) ?? []).sort(byId),
      });
    } else if (ELEMENT_CLASSES.has(record.className)) {
      const refs = modulesOfElement.get(record.id) ?? [];
      elements.push({
        ...record,
        badges: badgesFor(record.id),
        modules: [...refs].sort((a, b) => a.moduleId - b.moduleId),
      });
    } else if (
      record.className !== "frame" &&
      !MODULE_CLASSES.has(record.className)
    ) {
      throw new MalformedSnapshotError(
        `object ${record.id} has unknown class ${record.className}`,
      );
    }
  }

  return {
    step: snapshot.step,
    valid: snapshot.valid,
    strategy: snapshot.strategy,
    racks: racks.sort(byId),
    looseFrames: looseFrames.sort(byId),
    looseModules: looseModules.sort(byId),
    elements: elements.sort(byId),
    violations: snapshot.violations,
  };
}
