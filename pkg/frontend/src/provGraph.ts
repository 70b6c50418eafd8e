// Layered provenance DAG: columns are layers (statement index for versions
// a statement created, negative layers for stored versions), edges point
// from a derived version back to its sources, so x strictly decreases along
// every edge.
import type { ProvGraph } from "./types.js";

const NODE_WIDTH = 150;
const NODE_HEIGHT = 40;
const H_GAP = 50;
const V_GAP = 14;

export interface LaidOutNode {
  id: string;
  x: number;
  y: number;
}

export function layoutGraph(graph: ProvGraph): Map<string, LaidOutNode> {
  const layers = [...new Set(graph.nodes.map((n) => n.layer))].sort((a, b) => a - b);
  const layerX = new Map(layers.map((layer, i) => [layer, i]));
  const counts = new Map<number, number>();
  const out = new Map<string, LaidOutNode>();
  for (const node of graph.nodes) {
    const column = layerX.get(node.layer) ?? 0;
    const position = counts.get(column) ?? 0;
    counts.set(column, position + 1);
    out.set(node.id, {
      id: node.id,
      x: column * (NODE_WIDTH + H_GAP) + 8,
      y: position * (NODE_HEIGHT + V_GAP) + 8,
    });
  }
  return out;
}

export function renderProvGraph(container: HTMLElement, graph: ProvGraph): void {
  container.innerHTML = "";
  container.classList.add("prov-graph");
  const layout = layoutGraph(graph);
  const width = Math.max(...[...layout.values()].map((n) => n.x + NODE_WIDTH), 100) + 8;
  const height = Math.max(...[...layout.values()].map((n) => n.y + NODE_HEIGHT), 60) + 8;

  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));

  for (const edge of graph.edges) {
    const from = layout.get(edge.from);
    const to = layout.get(edge.to);
    if (!from || !to) continue;
    const line = document.createElementNS(
      svg.namespaceURI, "line") as SVGLineElement;
    line.classList.add("prov-edge");
    line.dataset.from = edge.from;
    line.dataset.to = edge.to;
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y + NODE_HEIGHT / 2));
    line.setAttribute("x2", String(to.x + NODE_WIDTH));
    line.setAttribute("y2", String(to.y + NODE_HEIGHT / 2));
    svg.appendChild(line);
  }

  for (const node of graph.nodes) {
    const place = layout.get(node.id)!;
    const g = document.createElementNS(svg.namespaceURI, "g") as SVGGElement;
    g.classList.add("prov-node");
    if (node.id === graph.root) g.classList.add("prov-root");
    g.dataset.id = node.id;
    g.dataset.layer = String(node.layer);

    const rect = document.createElementNS(svg.namespaceURI, "rect");
    rect.setAttribute("x", String(place.x));
    rect.setAttribute("y", String(place.y));
    rect.setAttribute("width", String(NODE_WIDTH));
    rect.setAttribute("height", String(NODE_HEIGHT));
    rect.setAttribute("rx", "4");
    g.appendChild(rect);

    const title = document.createElementNS(svg.namespaceURI, "text");
    title.setAttribute("x", String(place.x + 6));
    title.setAttribute("y", String(place.y + 15));
    title.classList.add("prov-node-title");
    const creator = node.creatorXid === 0 ? "load"
      : node.creatorStmt !== null ? `T${node.creatorXid}/${node.creatorStmt}`
      : node.creatorXid !== null ? `T${node.creatorXid}` : "edited";
    title.textContent = `${node.table} #${node.rowId} (${creator})`;
    g.appendChild(title);

    const values = document.createElementNS(svg.namespaceURI, "text");
    values.setAttribute("x", String(place.x + 6));
    values.setAttribute("y", String(place.y + 31));
    values.classList.add("prov-node-values");
    values.textContent = node.values.join(", ");
    g.appendChild(values);

    svg.appendChild(g);
  }
  container.appendChild(svg);
}
