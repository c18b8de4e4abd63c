/** Static board layout keyed by territory id. Geometry is schematic and
 * presentation-only; the canonical territory list and adjacency mirror the
 * server's map so the drawing stays truthful to reachability. */

export interface TerritorySpot {
  x: number;
  y: number;
  continent: string;
}

export const VIEW_WIDTH = 1000;
export const VIEW_HEIGHT = 640;

/** Canonical territory order, identical to the server's. */
export const TERRITORIES: readonly string[] = [
  "Red_A",
  "Red_B",
  "Red_C",
  "Green_A",
  "Green_B",
  "Green_C",
  "Green_D",
  "Green_E",
  "Purple_A",
  "Purple_B",
  "Purple_C",
  "Purple_D",
  "Purple_E",
  "Yellow_A",
  "Yellow_B",
  "Yellow_C",
  "Yellow_D",
  "Blue_A",
  "Blue_B",
  "Blue_C",
  "Blue_D",
];

export const LAYOUT: Record<string, TerritorySpot> = {
  Red_A: { x: 425, y: 290, continent: "Red" },
  Red_B: { x: 575, y: 290, continent: "Red" },
  Red_C: { x: 500, y: 400, continent: "Red" },
  Green_A: { x: 160, y: 225, continent: "Green" },
  Green_B: { x: 85, y: 90, continent: "Green" },
  Green_C: { x: 210, y: 60, continent: "Green" },
  Green_D: { x: 290, y: 200, continent: "Green" },
  Green_E: { x: 330, y: 95, continent: "Green" },
  Purple_A: { x: 665, y: 95, continent: "Purple" },
  Purple_B: { x: 790, y: 55, continent: "Purple" },
  Purple_C: { x: 915, y: 90, continent: "Purple" },
  Purple_D: { x: 900, y: 215, continent: "Purple" },
  Purple_E: { x: 760, y: 185, continent: "Purple" },
  Yellow_A: { x: 95, y: 490, continent: "Yellow" },
  Yellow_B: { x: 280, y: 430, continent: "Yellow" },
  Yellow_C: { x: 235, y: 560, continent: "Yellow" },
  Yellow_D: { x: 130, y: 360, continent: "Yellow" },
  Blue_A: { x: 740, y: 560, continent: "Blue" },
  Blue_B: { x: 690, y: 430, continent: "Blue" },
  Blue_C: { x: 855, y: 370, continent: "Blue" },
  Blue_D: { x: 900, y: 510, continent: "Blue" },
};

/** Undirected adjacency, deduplicated; drawn once per pair. */
export const EDGES: readonly [string, string][] = [
  // Red
  ["Red_A", "Red_B"],
  ["Red_A", "Red_C"],
  ["Red_B", "Red_C"],
  // Green (fully connected)
  ["Green_A", "Green_B"],
  ["Green_A", "Green_C"],
  ["Green_A", "Green_D"],
  ["Green_A", "Green_E"],
  ["Green_B", "Green_C"],
  ["Green_B", "Green_D"],
  ["Green_B", "Green_E"],
  ["Green_C", "Green_D"],
  ["Green_C", "Green_E"],
  ["Green_D", "Green_E"],
  // Purple (fully connected)
  ["Purple_A", "Purple_B"],
  ["Purple_A", "Purple_C"],
  ["Purple_A", "Purple_D"],
  ["Purple_A", "Purple_E"],
  ["Purple_B", "Purple_C"],
  ["Purple_B", "Purple_D"],
  ["Purple_B", "Purple_E"],
  ["Purple_C", "Purple_D"],
  ["Purple_C", "Purple_E"],
  ["Purple_D", "Purple_E"],
  // Yellow (fully connected)
  ["Yellow_A", "Yellow_B"],
  ["Yellow_A", "Yellow_C"],
  ["Yellow_A", "Yellow_D"],
  ["Yellow_B", "Yellow_C"],
  ["Yellow_B", "Yellow_D"],
  ["Yellow_C", "Yellow_D"],
  // Blue (fully connected)
  ["Blue_A", "Blue_B"],
  ["Blue_A", "Blue_C"],
  ["Blue_A", "Blue_D"],
  ["Blue_B", "Blue_C"],
  ["Blue_B", "Blue_D"],
  ["Blue_C", "Blue_D"],
  // Continent bridges
  ["Yellow_D", "Green_A"],
  ["Green_D", "Red_A"],
  ["Red_B", "Purple_E"],
  ["Red_C", "Yellow_B"],
  ["Red_C", "Blue_B"],
  ["Blue_A", "Yellow_C"],
  ["Yellow_C", "Blue_D"],
  ["Blue_C", "Purple_A"],
  ["Purple_A", "Green_E"],
];

export const CONTINENT_COLORS: Record<string, string> = {
  Red: "#c0392b",
  Green: "#27ae60",
  Purple: "#8e44ad",
  Yellow: "#d4a017",
  Blue: "#2980b9",
};

const OWNER_FILLS: Record<string, { fill: string; text: string }> = {
  White: { fill: "#fdfdfb", text: "#222222" },
  Black: { fill: "#2f2f2f", text: "#eeeeee" },
  Grey: { fill: "#9a9a9a", text: "#111111" },
};

export const NEUTRAL_FILL = { fill: "#eceae3", text: "#777777" };

export function ownerFill(owner: string | null): { fill: string; text: string } {
  if (owner === null) return NEUTRAL_FILL;
  return OWNER_FILLS[owner] ?? { fill: "#b07aa1", text: "#ffffff" };
}
