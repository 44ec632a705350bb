/**
 * Layout and highlighting for the static dependency graph. Pure functions:
 * nodes are "Type.field" strings, edges come from GET /schema.
 */

import { GraphEdge } from './api.js';

export interface PlacedNode {
  id: string;
  recordType: string;
  field: string;
  x: number;
  y: number;
}

export interface PlacedEdge {
  from: string;
  to: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GraphLayout {
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  width: number;
  height: number;
}

export const COLUMN_WIDTH = 240;
export const ROW_HEIGHT = 34;
export const MARGIN = 24;

/** Column per record type, row per field, alphabetical and deterministic. */
export function layoutGraph(nodeIds: string[], edges: GraphEdge[]): GraphLayout {
  const ids = [...new Set([...nodeIds, ...edges.flatMap((e) => [e.from, e.to])])].sort();
  const byType = new Map<string, string[]>();
  for (const id of ids) {
    const recordType = id.split('.', 1)[0];
    const bucket = byType.get(recordType) ?? [];
    bucket.push(id);
    byType.set(recordType, bucket);
  }
  const types = [...byType.keys()].sort();
  const positions = new Map<string, { x: number; y: number }>();
  const nodes: PlacedNode[] = [];
  let height = 0;
  types.forEach((recordType, column) => {
    const bucket = byType.get(recordType) ?? [];
    bucket.forEach((id, row) => {
      const x = MARGIN + column * COLUMN_WIDTH;
      const y = MARGIN + row * ROW_HEIGHT;
      positions.set(id, { x, y });
      nodes.push({
        id,
        recordType,
        field: id.slice(recordType.length + 1),
        x,
        y,
      });
      height = Math.max(height, y + ROW_HEIGHT);
    });
  });
  const placedEdges: PlacedEdge[] = edges
    .filter((e) => positions.has(e.from) && positions.has(e.to))
    .map((e) => {
      const a = positions.get(e.from)!;
      const b = positions.get(e.to)!;
      return { from: e.from, to: e.to, x1: a.x, y1: a.y, x2: b.x, y2: b.y };
    });
  return {
    nodes,
    edges: placedEdges,
    width: MARGIN * 2 + Math.max(types.length, 1) * COLUMN_WIDTH,
    height: height + MARGIN,
  };
}

/**
 * Nodes and edges on any dependency path out of `start` ("Type.field"),
 * i.e. everything the inspected fact can transitively depend on.
 */
export function highlightFrom(
  start: string | null,
  edges: GraphEdge[],
): { nodes: Set<string>; edges: Set<string> } {
  const nodes = new Set<string>();
  const picked = new Set<string>();
  if (!start) return { nodes, edges: picked };
  const adjacency = new Map<string, GraphEdge[]>();
  for (const edge of edges) {
    const bucket = adjacency.get(edge.from) ?? [];
    bucket.push(edge);
    adjacency.set(edge.from, bucket);
  }
  const queue = [start];
  nodes.add(start);
  while (queue.length > 0) {
    const current = queue.shift()!;
    for (const edge of adjacency.get(current) ?? []) {
      picked.add(`${edge.from}->${edge.to}`);
      if (!nodes.has(edge.to)) {
        nodes.add(edge.to);
        queue.push(edge.to);
      }
    }
  }
  return { nodes, edges: picked };
}

/** "Entity[Corp].fiscal_year" -> graph node id "Entity.fiscal_year". */
export function factToNode(factId: string): string | null {
  const match = /^([A-Z][A-Za-z0-9_]*)\[.+\]\.([a-z][A-Za-z0-9_]*|key)$/.exec(factId);
  return match ? `${match[1]}.${match[2]}` : null;
}
