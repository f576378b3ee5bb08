/**
 * Dashboard entry point: plain DOM wiring over the Dashboard controller.
 *
 * Served at /ui next to the API (same origin); pass ?api=http://host:port
 * to point a dev copy at another server.  The page is a pure view: every
 * number shown comes from the server, and the client-side curve rendering
 * is cross-checked against the server mean on every paint.
 */

import { Client, ApiError, type Posterior } from "./api.js";
import { numericMean } from "./basis.js";
import { CARD_LAYOUT, axisTicks, bandRect, meanX, pdfArea, pdfPath } from "./charts.js";
import { Dashboard, type WhatIf } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const base = new URLSearchParams(location.search).get("api") ?? "";
const client = new Client(base);
const dashboard = new Dashboard(client);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, String(value));
  }
  return node;
}

function fmt(x: number): string {
  return x.toFixed(3);
}

function skillCard(p: Posterior): HTMLElement {
  const card = el("div", "card");
  const title = el("div", "card-title");
  title.append(el("span", "skill-name", p.skill), el("span", "skill-mean", fmt(p.mean)));
  card.append(title);

  const svg = svgEl("svg", {
    width: CARD_LAYOUT.width,
    height: CARD_LAYOUT.height,
    viewBox: `0 0 ${CARD_LAYOUT.width} ${CARD_LAYOUT.height}`,
  });
  if (p.interval) {
    const band = bandRect(p.interval);
    svg.append(
      svgEl("rect", {
        x: band.x, width: band.width, y: CARD_LAYOUT.pad,
        height: CARD_LAYOUT.height - 2 * CARD_LAYOUT.pad, class: "band",
      }),
    );
  }
  const area = pdfArea(p.coeffs);
  svg.append(svgEl("path", { d: area.path, class: "curve-fill" }));
  svg.append(svgEl("path", { d: pdfPath(p.coeffs, CARD_LAYOUT, 161, area.yMax).path, class: "curve" }));
  svg.append(
    svgEl("line", {
      x1: meanX(p.mean), x2: meanX(p.mean),
      y1: CARD_LAYOUT.pad, y2: CARD_LAYOUT.height - CARD_LAYOUT.pad, class: "mean-line",
    }),
  );
  for (const tick of axisTicks()) {
    const label = svgEl("text", { x: tick.x, y: CARD_LAYOUT.height - 1, class: "tick" });
    label.textContent = tick.label;
    svg.append(label);
  }
  card.append(svg);

  // Guard: the curve we just drew must integrate to the mean the server
  // reported; disagreement means the client math is wrong, so say so.
  const drift = Math.abs(numericMean(p.coeffs) - p.mean);
  if (drift > 1e-6) {
    card.append(el("div", "error", `render drift ${drift.toExponential(2)} vs server mean`));
  }

  const trace = el("ul", "trace");
  for (const source of p.trace) {
    const from = source.skills && source.skills.length ? ` from ${source.skills.join(", ")}` : "";
    trace.append(el("li", undefined, `${source.source}${from}: mean ${fmt(source.mean)}`));
  }
  card.append(trace);
  if (p.interval) {
    card.append(el("div", "interval", `90% interval [${fmt(p.interval[0])}, ${fmt(p.interval[1])}]`));
  }
  return card;
}

function entryPanel(): HTMLElement {
  const panel = el("div", "panel");
  panel.append(el("h2", undefined, "Enter an outcome"));
  const select = el("select");
  select.id = "exercise-select";
  for (const id of dashboard.state.exerciseIds) {
    const option = el("option", undefined, id);
    option.value = id;
    select.append(option);
  }
  const ok = el("button", "success", "Success");
  const fail = el("button", "failure", "Failure");
  ok.onclick = () => void dashboard.enter(select.value, true);
  fail.onclick = () => void dashboard.enter(select.value, false);
  panel.append(select, ok, fail);

  const queue = el("ul", "pending");
  for (const entry of dashboard.state.pending) {
    const item = el(
      "li",
      entry.status,
      `${entry.exercise}: ${entry.outcome ? "success" : "failure"} (${entry.status}${entry.error ? `, ${entry.error}` : ""})`,
    );
    if (entry.status === "failed") {
      const dismiss = el("button", "dismiss", "x");
      dismiss.onclick = () => dashboard.dismiss(entry.key);
      item.append(dismiss);
    }
    queue.append(item);
  }
  panel.append(queue);
  return panel;
}

function whatIfPanel(): HTMLElement {
  const panel = el("div", "panel");
  panel.append(el("h2", undefined, "What if the next attempt..."));
  const select = el("select");
  for (const id of dashboard.state.exerciseIds) {
    const option = el("option", undefined, id);
    option.value = id;
    select.append(option);
  }
  const button = el("button", undefined, "Preview");
  const out = el("div", "whatif-out");
  button.onclick = async () => {
    out.textContent = "computing...";
    try {
      const preview = await dashboard.whatIf(select.value);
      out.replaceChildren(...renderWhatIf(preview));
    } catch (err) {
      out.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  };
  panel.append(select, button, out);
  return panel;
}

function renderWhatIf(preview: WhatIf): HTMLElement[] {
  const rows: HTMLElement[] = [];
  for (const [label, result] of [["succeeds", preview.success], ["fails", preview.failure]] as const) {
    const list = result.skills.map((s) => `${s.skill} ${fmt(s.mean)}`).join(", ");
    rows.push(el("div", undefined, `...${label}: ${list}`));
  }
  return rows;
}

function recommendationsPanel(): HTMLElement {
  const panel = el("div", "panel");
  panel.append(el("h2", undefined, "Practice next"));
  const list = el("ol", "recs");
  for (const rec of dashboard.state.recommendations) {
    list.append(el("li", undefined, `${rec.exercise} (expected success ${fmt(rec.expected_success)})`));
  }
  panel.append(list);
  return panel;
}

function render(): void {
  const root = document.getElementById("app");
  if (!root) return;
  root.replaceChildren();

  const skills = el("div", "skills");
  const ordered = dashboard.state.skillIds
    .map((id) => dashboard.state.skills[id])
    .filter((p): p is Posterior => p !== undefined);
  for (const posterior of ordered) skills.append(skillCard(posterior));
  if (!ordered.length) {
    skills.append(el("div", "empty", dashboard.state.student ? "loading..." : "pick a student"));
  }

  const side = el("div", "side");
  side.append(entryPanel(), whatIfPanel(), recommendationsPanel());
  root.append(skills, side);
}

async function buildHeader(): Promise<void> {
  const header = document.getElementById("header");
  if (!header) return;
  header.replaceChildren(el("h1", undefined, "skilltracer"));

  const roster = el("select");
  roster.id = "student-select";
  const { students } = await client.listStudents();
  for (const id of students) {
    const option = el("option", undefined, id);
    option.value = id;
    roster.append(option);
  }
  roster.onchange = () => void dashboard.open(roster.value);

  const name = el("input");
  name.placeholder = "new student id";
  const add = el("button", undefined, "Add");
  add.onclick = async () => {
    if (!name.value) return;
    try {
      const created = await client.createStudent(name.value);
      const option = el("option", undefined, created.id);
      option.value = created.id;
      roster.append(option);
      roster.value = created.id;
      name.value = "";
      await dashboard.open(created.id);
    } catch (err) {
      alert(err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
    }
  };
  header.append(roster, name, add);

  if (students.length) {
    roster.value = students[0];
    await dashboard.open(students[0]);
  }
}

async function main(): Promise<void> {
  dashboard.subscribe(render);
  try {
    await dashboard.loadCatalog();
    await buildHeader();
  } catch (err) {
    const root = document.getElementById("app");
    if (root) {
      root.replaceChildren(
        el("div", "error",
           err instanceof ApiError && err.code === "no-graph"
             ? "No skill graph is loaded yet: POST /graph first."
             : `cannot reach the API: ${String(err)}`),
      );
    }
  }
  render();
}

void main();
