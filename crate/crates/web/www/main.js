import init, { haar_moments, alpha_curves, sinr_sweep } from "./pkg/relay_bf_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const list = (id) => $(id).value.split(",").map((s) => Number(s.trim())).filter((x) => !Number.isNaN(x));
const COLORS = ["#1b6ac9", "#d9480f", "#2b8a3e", "#862e9c", "#e67700", "#0b7285", "#c2255c"];

// series: [{ label, xs, ys }]
function plot(canvas, series, xlabel, ylabel) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = { l: 60, r: 170, t: 15, b: 40 };
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.xs);
  const ys = series.flatMap((s) => s.ys).filter(Number.isFinite);
  if (!xs.length || !ys.length) return;
  let [x0, x1, y0, y1] = [Math.min(...xs), Math.max(...xs), Math.min(...ys), Math.max(...ys)];
  if (x0 === x1) { x0 -= 1; x1 += 1; }
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const px = (x) => pad.l + ((x - x0) / (x1 - x0)) * (w - pad.l - pad.r);
  const py = (y) => h - pad.b - ((y - y0) / (y1 - y0)) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4;
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(x.toPrecision(3), px(x) - 12, h - pad.b + 16);
    ctx.fillText(y.toPrecision(3), 8, py(y) + 4);
  }
  ctx.fillText(xlabel, (w - pad.r) / 2, h - 6);
  ctx.save();
  ctx.translate(14, h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();

  series.forEach((s, i) => {
    ctx.strokeStyle = ctx.fillStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.xs.forEach((x, j) => (j ? ctx.lineTo(px(x), py(s.ys[j])) : ctx.moveTo(px(x), py(s.ys[j]))));
    ctx.stroke();
    ctx.fillRect(w - pad.r + 12, pad.t + 8 + 18 * i, 14, 3);
    ctx.fillText(s.label, w - pad.r + 32, pad.t + 13 + 18 * i);
  });
}

function runHaar() {
  const vals = list("h-vals");
  try {
    const [mu, nu, md, mo, sd, so] = haar_moments(vals, num("h-draws"), num("h-seed"));
    const z = (a, b, s) => (s > 0 ? ((a - b) / s).toFixed(2) : "-");
    $("h-out").innerHTML = `<table>
      <tr><th></th><th>closed form</th><th>sampled</th><th>std. err.</th><th>z</th></tr>
      <tr><th>E{A<sub>kk</sub>²}</th><td>${mu.toFixed(5)}</td><td>${md.toFixed(5)}</td><td>${sd.toExponential(2)}</td><td>${z(md, mu, sd)}</td></tr>
      <tr><th>E{|A<sub>kj</sub>|²}</th><td>${nu.toFixed(5)}</td><td>${mo.toFixed(5)}</td><td>${so.toExponential(2)}</td><td>${z(mo, nu, so)}</td></tr>
    </table>`;
  } catch (e) {
    $("h-out").innerHTML = `<span class="err">${e.message ?? e}</span>`;
  }
}

function runAlpha() {
  $("a-err").textContent = "";
  try {
    const flat = alpha_curves(num("a-k"), num("a-r"), num("a-bc"), num("a-fc"), num("a-emax"), 31, 7);
    const rows = [];
    for (let i = 0; i < flat.length; i += 5) rows.push(flat.slice(i, i + 5));
    const xs = rows.map((r) => r[0]);
    const names = ["α MMSE (multi-relay)", "α RZF (multi-relay)", "α SVD-RZF, large K", "Kσ2²/Pr"];
    plot($("a-plot"), names.map((label, j) => ({ label, xs, ys: rows.map((r) => r[j + 1]) })), "e1² = e2²", "α");
  } catch (e) {
    $("a-err").textContent = e.message ?? String(e);
  }
}

function runSweep() {
  $("s-err").textContent = "";
  try {
    const csv = sinr_sweep($("s-axis").value, list("s-values"), num("s-k"), num("s-r"), num("s-bc"), num("s-fc"),
      num("s-e"), num("s-trials"), 2012);
    const bySeries = new Map();
    for (const line of csv.trim().split("\n").slice(1)) {
      const [x, scheme, mean] = line.split(",");
      if (!bySeries.has(scheme)) bySeries.set(scheme, { label: scheme, xs: [], ys: [] });
      bySeries.get(scheme).xs.push(Number(x));
      bySeries.get(scheme).ys.push(Number(mean));
    }
    plot($("s-plot"), [...bySeries.values()], $("s-axis").selectedOptions[0].text, "mean SINR (dB)");
  } catch (e) {
    $("s-err").textContent = e.message ?? String(e);
  }
}

await init();
$("h-run").onclick = runHaar;
$("a-run").onclick = runAlpha;
$("s-run").onclick = runSweep;
runHaar();
runAlpha();
runSweep();
