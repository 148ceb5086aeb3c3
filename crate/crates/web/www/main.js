import init, { spectrumPoints, dampingSummary, spectralWidth, birkhoffSamples } from "./pkg/qmap_web.js";

const $ = (id) => document.getElementById(id);
const status = (msg) => { $("status").textContent = msg; };

function params() {
  return {
    dim: Number($("dim").value),
    m: Number($("m").value),
    alpha: Number($("alpha").value),
    kind: $("kind").value,
    value: Number($("value").value),
  };
}

function drawScatter(points, summary) {
  const cv = $("scatter");
  const ctx = cv.getContext("2d");
  const w = cv.width, c = w / 2, scale = (w / 2 - 12) / 1.05;
  ctx.clearRect(0, 0, w, w);
  ctx.strokeStyle = "#ccc";
  ctx.beginPath(); ctx.moveTo(0, c); ctx.lineTo(w, c); ctx.moveTo(c, 0); ctx.lineTo(c, w); ctx.stroke();
  const [aMinus, aPlus, mean] = summary;
  ctx.strokeStyle = "#c33";
  for (const [r, dashed] of [[aMinus, true], [aPlus, true], [mean, false]]) {
    ctx.setLineDash(dashed ? [6, 4] : []);
    ctx.beginPath(); ctx.arc(c, c, r * scale, 0, 2 * Math.PI); ctx.stroke();
  }
  ctx.setLineDash([]);
  ctx.fillStyle = "#136";
  for (let i = 0; i < points.length; i += 2) {
    ctx.fillRect(c + points[i] * scale - 1, c - points[i + 1] * scale - 1, 2, 2);
  }
}

function drawRadial(points, summary) {
  const cv = $("radial");
  const ctx = cv.getContext("2d");
  const w = cv.width, h = cv.height, pad = 30;
  ctx.clearRect(0, 0, w, h);
  const radii = [];
  for (let i = 0; i < points.length; i += 2) radii.push(Math.hypot(points[i], points[i + 1]));
  radii.sort((a, b) => a - b);
  const lo = Math.min(summary[0], radii[0]) - 0.02;
  const hi = Math.max(summary[1], radii[radii.length - 1]) + 0.02;
  const x = (r) => pad + (r - lo) / (hi - lo) * (w - 2 * pad);
  const y = (f) => h - pad - f * (h - 2 * pad);
  ctx.strokeStyle = "#444";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.strokeStyle = "#136";
  ctx.beginPath(); ctx.moveTo(x(lo), y(0));
  radii.forEach((r, i) => { ctx.lineTo(x(r), y(i / radii.length)); ctx.lineTo(x(r), y((i + 1) / radii.length)); });
  ctx.lineTo(x(hi), y(1)); ctx.stroke();
  ctx.strokeStyle = "#c33";
  ctx.beginPath(); ctx.moveTo(x(summary[2]), y(0)); ctx.lineTo(x(summary[2]), y(1)); ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.fillText("integrated radial density", pad, pad - 8);
  ctx.fillText(lo.toFixed(2), pad, h - 10);
  ctx.fillText(hi.toFixed(2), w - pad - 20, h - 10);
}

function drawHistogram(values) {
  const cv = $("hist");
  const ctx = cv.getContext("2d");
  const w = cv.width, h = cv.height, pad = 24, bins = 60;
  ctx.clearRect(0, 0, w, h);
  const lo = Math.min(...values), hi = Math.max(...values);
  const span = hi - lo || 1;
  const counts = new Array(bins).fill(0);
  for (const v of values) counts[Math.min(bins - 1, Math.floor((v - lo) / span * bins))] += 1;
  const top = Math.max(...counts);
  const bw = (w - 2 * pad) / bins;
  ctx.fillStyle = "#136";
  counts.forEach((cnt, i) => {
    const bh = cnt / top * (h - 2 * pad);
    ctx.fillRect(pad + i * bw, h - pad - bh, bw - 1, bh);
  });
  const zero = pad + (0 - lo) / span * (w - 2 * pad);
  ctx.strokeStyle = "#c33";
  ctx.beginPath(); ctx.moveTo(zero, pad); ctx.lineTo(zero, h - pad); ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.fillText(`x_n = ℓa_n − log⟨a⟩, range [${lo.toFixed(3)}, ${hi.toFixed(3)}]`, pad, 14);
}

function runSpectrum() {
  const p = params();
  status(`diagonalizing a ${p.dim}×${p.dim} matrix…`);
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const summary = dampingSummary(p.kind, p.value);
      const pts = spectrumPoints(p.dim, p.m, p.alpha, p.kind, p.value);
      drawScatter(pts, summary);
      drawRadial(pts, summary);
      const wdt = spectralWidth(pts);
      $("stats").textContent =
        `a₋ = ${summary[0].toFixed(4)}, a₊ = ${summary[1].toFixed(4)}, ⟨a⟩ = ${summary[2].toFixed(5)}, width W = ${wdt.toFixed(5)}`;
      status(`done in ${((performance.now() - t0) / 1000).toFixed(2)} s`);
    } catch (e) {
      status(`error: ${e.message ?? e}`);
    }
  }, 10);
}

function runBirkhoff() {
  const p = params();
  try {
    const xs = birkhoffSamples(p.kind, p.value, p.m, p.alpha,
      Number($("n").value), Number($("samples").value), BigInt($("seed").value));
    drawHistogram(Array.from(xs));
    const mean = xs.reduce((a, b) => a + b, 0) / xs.length;
    status(`${xs.length} samples, mean deviation ${mean.toExponential(3)}`);
  } catch (e) {
    status(`error: ${e.message ?? e}`);
  }
}

await init();
$("run-spectrum").addEventListener("click", runSpectrum);
$("run-birkhoff").addEventListener("click", runBirkhoff);
runSpectrum();
