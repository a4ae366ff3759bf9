import init, { gamma_density_curve, tmvn_scatter, ridge_trace } from "./pkg/gammareg_browser.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const num = (id) => parseFloat(document.getElementById(id).value);

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
}

// Wraps a draw function so errors from the wasm side land in the section's error span.
function guarded(errId, fn) {
  return () => {
    const el = document.getElementById(errId);
    try {
      fn();
      el.textContent = "";
    } catch (e) {
      el.textContent = String(e.message ?? e);
    }
  };
}

function drawDensity() {
  const ymax = num("d-ymax");
  const v = gamma_density_curve(num("d-zeta"), num("d-mu"), ymax, 400);
  const c = document.getElementById("d-canvas");
  const ctx = c.getContext("2d");
  const pad = 30;
  axes(ctx, c.width, c.height, pad);
  let fmax = 0;
  for (let i = 1; i < v.length; i += 2) if (isFinite(v[i])) fmax = Math.max(fmax, v[i]);
  fmax = Math.min(fmax, 10) || 1;
  const sx = (y) => pad + (y / ymax) * (c.width - 2 * pad);
  const sy = (f) => c.height - pad - (Math.min(f, fmax) / fmax) * (c.height - 2 * pad);
  ctx.strokeStyle = COLORS[0];
  ctx.beginPath();
  for (let i = 0; i < v.length; i += 2) ctx.lineTo(sx(v[i]), sy(v[i + 1]));
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(`0`, pad - 10, c.height - pad + 14);
  ctx.fillText(`${ymax}`, c.width - pad - 10, c.height - pad + 14);
  ctx.fillText(`${fmax.toFixed(3)}`, 2, pad);
}

function drawTmvn() {
  const [a1, a2, b] = [num("t-a1"), num("t-a2"), num("t-b")];
  const v = tmvn_scatter(num("t-mx"), num("t-my"), num("t-sx"), num("t-sy"), num("t-rho"),
    a1, a2, b, Math.max(1, num("t-n") | 0), num("t-seed") >>> 0);
  const c = document.getElementById("t-canvas");
  const ctx = c.getContext("2d");
  const pad = 20;
  axes(ctx, c.width, c.height, pad);
  let lo = Infinity, hi = -Infinity;
  for (const x of v) { lo = Math.min(lo, x); hi = Math.max(hi, x); }
  const span = hi - lo || 1;
  lo -= 0.05 * span; hi += 0.05 * span;
  const s = (x) => (x - lo) / (hi - lo) * (c.width - 2 * pad);
  const px = (x) => pad + s(x);
  const py = (y) => c.height - pad - s(y);
  if (a1 !== 0 || a2 !== 0) {
    ctx.strokeStyle = "#999";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    if (Math.abs(a2) > 1e-12) {
      ctx.moveTo(px(lo), py((b - a1 * lo) / a2));
      ctx.lineTo(px(hi), py((b - a1 * hi) / a2));
    } else {
      ctx.moveTo(px(b / a1), py(lo));
      ctx.lineTo(px(b / a1), py(hi));
    }
    ctx.stroke();
    ctx.setLineDash([]);
  }
  ctx.fillStyle = "rgba(31,119,180,0.35)";
  for (let i = 0; i < v.length; i += 2) ctx.fillRect(px(v[i]) - 1, py(v[i + 1]) - 1, 2, 2);
}

function drawRidge() {
  const kmin = -3, kmax = 8;
  const v = ridge_trace(Math.max(10, num("r-n") | 0), num("r-rho"), num("r-seed") >>> 0, kmin, kmax, 120);
  const w = 5;
  const rows = [];
  for (let i = 0; i < v.length; i += w) rows.push(v.slice(i, i + w));
  const [k1, k2] = rows.slice(0, 2);
  const path = rows.slice(2);
  const c = document.getElementById("r-canvas");
  const ctx = c.getContext("2d");
  const pad = 35;
  axes(ctx, c.width, c.height, pad);
  let bmax = 0;
  for (const r of path) for (let j = 1; j < w; j++) bmax = Math.max(bmax, Math.abs(r[j]));
  bmax = bmax || 1;
  const sx = (k) => pad + (Math.log10(k) - kmin) / (kmax - kmin) * (c.width - 2 * pad);
  const sy = (b) => c.height / 2 - b / bmax * (c.height / 2 - pad);
  ctx.strokeStyle = "#ccc";
  ctx.beginPath();
  ctx.moveTo(pad, sy(0));
  ctx.lineTo(c.width - pad, sy(0));
  ctx.stroke();
  for (let j = 1; j < w; j++) {
    ctx.strokeStyle = COLORS[j - 1];
    ctx.beginPath();
    for (const r of path) ctx.lineTo(sx(r[0]), sy(r[j]));
    ctx.stroke();
  }
  ctx.setLineDash([5, 4]);
  ctx.strokeStyle = "#555";
  for (const r of [k1, k2]) {
    if (!(r[0] > 0)) continue;
    ctx.beginPath();
    ctx.moveTo(sx(r[0]), pad);
    ctx.lineTo(sx(r[0]), c.height - pad);
    ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#444";
  for (let t = kmin; t <= kmax; t++) ctx.fillText(`1e${t}`, sx(10 ** t) - 10, c.height - pad + 14);
  document.getElementById("r-legend").innerHTML =
    COLORS.map((col, j) => `<span style="color:${col}">&#9632; &beta;${j}</span>`).join("");
  const fmt = (r) => r[0] > 0 ? `k = ${r[0].toPrecision(4)}, &beta; = (${r.slice(1).map((b) => b.toFixed(3)).join(", ")})` : "not available";
  const mle = path[0].slice(1).map((b) => b.toFixed(3)).join(", ");
  document.getElementById("r-info").innerHTML =
    `Near-MLE (k = 1e${kmin}): (${mle})<br>k&#8321;: ${fmt(k1)}<br>k&#8322;: ${fmt(k2)}`;
}

await init();
const views = [
  ["d-", guarded("d-err", drawDensity)],
  ["t-", guarded("t-err", drawTmvn)],
  ["r-", guarded("r-err", drawRidge)],
];
for (const [prefix, draw] of views) {
  document.querySelectorAll(`input[id^="${prefix}"]`).forEach((el) => el.addEventListener("change", draw));
  draw();
}
