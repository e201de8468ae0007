import init, { Demo } from "./pkg/squatguard_web.js";

const $ = (id) => document.getElementById(id);
const SVG = "http://www.w3.org/2000/svg";
let demo;

function el(name, attrs, text) {
  const e = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  if (text !== undefined) e.textContent = text;
  return e;
}

function showError(target, e) {
  target.innerHTML = "";
  const p = document.createElement("p");
  p.className = "err";
  p.textContent = String(e.message || e);
  target.appendChild(p);
}

function runDistance() {
  const out = $("distance-out");
  try {
    const r = JSON.parse(demo.distance($("pa").value, $("pb").value));
    const ops = r.script.map((s) => {
      if (s.op === "keep") return `<span class="keep">${s.phoneme}</span>`;
      if (s.op === "substitute") return `<span class="sub">${s.from}&rarr;${s.to} (${s.cost.toFixed(2)})</span>`;
      if (s.op === "delete") return `<span class="del">-${s.phoneme}</span>`;
      return `<span class="ins">+${s.phoneme}</span>`;
    });
    out.innerHTML = `<p><b>${r.distance.toFixed(2)}</b> / 1000</p>
      <p>${r.a.join(" ")}<br>${r.b.join(" ")}</p><p>${ops.join(" ")}</p>`;
  } catch (e) {
    showError(out, e);
  }
}

function drawGraph() {
  const svg = $("graph");
  const t = Number($("threshold").value);
  $("threshold-val").textContent = t;
  svg.innerHTML = "";
  let g;
  try {
    g = JSON.parse(demo.graph($("phrases").value, t));
  } catch (e) {
    svg.appendChild(el("text", { x: 10, y: 20, fill: "#a00" }, String(e.message || e)));
    return;
  }
  const W = 600, H = 420, R = 150;
  const pos = {};
  g.nodes.forEach((n, i) => {
    const a = (2 * Math.PI * i) / g.nodes.length - Math.PI / 2;
    pos[n.id] = [W / 2 + R * Math.cos(a), H / 2 + R * Math.sin(a)];
  });
  for (const p of g.pairs) {
    const [x1, y1] = pos[p.a], [x2, y2] = pos[p.b];
    if (!p.kept && p.d > 1000) continue;
    svg.appendChild(el("line", {
      x1, y1, x2, y2,
      stroke: p.kept ? "#333" : "#ccc",
      "stroke-width": p.kept ? 2 : 1,
      "stroke-dasharray": p.kept ? "" : "4 4",
    }));
    if (p.kept) {
      svg.appendChild(el("text", { x: (x1 + x2) / 2, y: (y1 + y2) / 2 - 4, "font-size": 11, fill: "#555" }, p.d.toFixed(0)));
    }
  }
  for (const n of g.nodes) {
    const [x, y] = pos[n.id];
    svg.appendChild(el("circle", { cx: x, cy: y, r: 6, fill: "#4a7" }));
    svg.appendChild(el("text", { x: x + 9, y: y + 4, "font-size": 13 }, n.id));
  }
}

function runSweep() {
  const svg = $("curves");
  svg.innerHTML = "";
  let r;
  try {
    r = JSON.parse(demo.tradeoff(Number($("seed").value), Number($("skills").value), Number($("users").value)));
  } catch (e) {
    showError($("sweep-out"), e);
    return;
  }
  const W = 600, H = 320, P = 40;
  const x = (t) => P + ((W - 2 * P) * t) / 1000;
  const y = (v) => H - P - (H - 2 * P) * v;
  svg.appendChild(el("line", { x1: P, y1: H - P, x2: W - P, y2: H - P, stroke: "#999" }));
  svg.appendChild(el("line", { x1: P, y1: P, x2: P, y2: H - P, stroke: "#999" }));
  for (const t of [0, 250, 500, 750, 1000]) {
    svg.appendChild(el("text", { x: x(t) - 10, y: H - P + 16, "font-size": 11 }, t));
  }
  for (const v of [0, 0.5, 1]) {
    svg.appendChild(el("text", { x: 8, y: y(v) + 4, "font-size": 11 }, v));
  }
  const line = (key, color) => {
    const pts = r.rows.map((row) => `${x(row.threshold)},${y(row[key])}`).join(" ");
    svg.appendChild(el("polyline", { points: pts, fill: "none", stroke: color, "stroke-width": 2 }));
    svg.appendChild(el("text", { x: W - P + 4, y: y(r.rows[r.rows.length - 1][key]) + 4, fill: color, "font-size": 12 }, key.toUpperCase()));
  };
  line("far", "#c33");
  line("frr", "#36c");
  svg.appendChild(el("circle", { cx: x(r.eer.threshold), cy: y(r.eer.eer), r: 4, fill: "#000" }));
  const rows = r.rows.map((row) =>
    `<tr><td>${row.threshold}</td><td>${row.far.toFixed(3)}</td><td>${row.frr.toFixed(3)}</td><td>${row.setup_seconds.toFixed(1)}</td></tr>`);
  $("sweep-out").innerHTML = `<p>EER ${r.eer.eer.toFixed(3)} at threshold ${r.eer.threshold}</p>
    <table><tr><th>threshold</th><th>FAR</th><th>FRR</th><th>setup s</th></tr>${rows.join("")}</table>`;
}

async function main() {
  await init();
  const [dict, overrides] = await Promise.all([
    fetch("cmudict.dict").then((r) => r.text()),
    fetch("overrides.json").then((r) => (r.ok ? r.text() : "")),
  ]);
  demo = new Demo(dict, overrides);
  $("status").textContent = `${demo.pairCount()} alternate-pronunciation pairs learned`;
  $("go-distance").onclick = runDistance;
  $("threshold").oninput = drawGraph;
  $("phrases").oninput = drawGraph;
  $("go-sweep").onclick = runSweep;
  runDistance();
  drawGraph();
}

main().catch((e) => showError($("status"), e));
