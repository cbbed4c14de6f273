/** SVG line charts at daily resolution with shaded two-week period bands.
 * Each polyline carries its source values verbatim in a data attribute,
 * so what is drawn is provably the service payload and nothing else. */

const SVG_NS = "http://www.w3.org/2000/svg";

export const CHART_WIDTH = 640;
export const CHART_HEIGHT = 240;
export const PERIOD_DAYS = 14;

export interface LineSpec {
  label: string;
  values: number[];
  color: string;
}

function svgElement<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

export function linePoints(
  values: number[],
  yMin: number,
  yMax: number,
  width: number = CHART_WIDTH,
  height: number = CHART_HEIGHT
): string {
  const span = yMax - yMin || 1;
  const dx = values.length > 1 ? width / (values.length - 1) : 0;
  return values
    .map((v, i) => `${(i * dx).toFixed(2)},${(height - ((v - yMin) / span) * height).toFixed(2)}`)
    .join(" ");
}

export function renderLineChart(
  lines: LineSpec[],
  options: { title: string; threshold?: number; thresholdLabel?: string }
): SVGSVGElement {
  const svg = svgElement("svg");
  svg.setAttribute("viewBox", `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`);
  svg.setAttribute("role", "img");
  svg.setAttribute("aria-label", options.title);
  svg.classList.add("chart");

  const nDays = Math.max(...lines.map((l) => l.values.length), 1);
  for (let day = 0; day + PERIOD_DAYS <= nDays; day += 2 * PERIOD_DAYS) {
    const band = svgElement("rect");
    band.classList.add("period-band");
    band.setAttribute("x", String((day / (nDays - 1)) * CHART_WIDTH));
    band.setAttribute("width", String((PERIOD_DAYS / (nDays - 1)) * CHART_WIDTH));
    band.setAttribute("y", "0");
    band.setAttribute("height", String(CHART_HEIGHT));
    band.setAttribute("fill", "#00000010");
    svg.appendChild(band);
  }

  const all = lines.flatMap((l) => l.values);
  const yMin = Math.min(0, ...all);
  const yMax = Math.max(...all, options.threshold ?? -Infinity);

  if (options.threshold !== undefined) {
    const rule = svgElement("line");
    rule.classList.add("threshold");
    const y = CHART_HEIGHT - ((options.threshold - yMin) / (yMax - yMin || 1)) * CHART_HEIGHT;
    rule.setAttribute("x1", "0");
    rule.setAttribute("x2", String(CHART_WIDTH));
    rule.setAttribute("y1", String(y));
    rule.setAttribute("y2", String(y));
    rule.setAttribute("stroke", "#c00");
    rule.setAttribute("stroke-dasharray", "6 3");
    rule.dataset.label = options.thresholdLabel ?? "";
    svg.appendChild(rule);
  }

  for (const line of lines) {
    const poly = svgElement("polyline");
    poly.classList.add("series");
    poly.setAttribute("fill", "none");
    poly.setAttribute("stroke", line.color);
    poly.setAttribute("points", linePoints(line.values, yMin, yMax));
    poly.dataset.label = line.label;
    poly.dataset.values = JSON.stringify(line.values);
    svg.appendChild(poly);
  }
  return svg;
}
