import init, { compareAggregators, coefficientTrace, weightSnapshot } from "./pkg/adacons_web.js";

const $ = (id) => document.getElementById(id);

function readParams() {
  const int = (id) => parseInt($(id).value, 10);
  return {
    dim: int("dim"),
    workers: int("workers"),
    batch: int("batch"),
    iters: int("iters"),
    seed: BigInt(int("seed")),
    beta: parseFloat($("beta").value),
  };
}

function frame(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = { l: 60, r: 10, t: 10, b: 25 };
  return { ctx, pad, w: canvas.width - pad.l - pad.r, h: canvas.height - pad.t - pad.b };
}

function axes(f, yMin, yMax, xMax, yLabel) {
  const { ctx, pad, w, h } = f;
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad.l, pad.t, w, h);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(yLabel(yMax), 2, pad.t + 10);
  ctx.fillText(yLabel(yMin), 2, pad.t + h);
  ctx.fillText("0", pad.l, pad.t + h + 15);
  ctx.fillText(String(xMax), pad.l + w - 20, pad.t + h + 15);
}

function polyline(f, ys, xMax, toY, color, dash = []) {
  const { ctx, pad, w } = f;
  ctx.strokeStyle = color;
  ctx.setLineDash(dash);
  ctx.beginPath();
  ys.forEach((y, i) => {
    const px = pad.l + (i / Math.max(1, xMax)) * w;
    const py = toY(y);
    i === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.setLineDash([]);
}

function drawObjective(curves) {
  const f = frame($("objective"));
  const sum = curves.sum();
  const ada = curves.adacons();
  const all = [...sum, ...ada].filter((v) => v > 0);
  const lo = Math.log10(Math.min(...all));
  const hi = Math.log10(Math.max(...all));
  const span = Math.max(hi - lo, 1e-9);
  const toY = (v) => f.pad.t + f.h * (1 - (Math.log10(Math.max(v, 1e-300)) - lo) / span);
  axes(f, lo, hi, sum.length - 1, (e) => `1e${e.toFixed(1)}`);
  polyline(f, sum, sum.length - 1, toY, "#1f77b4");
  polyline(f, ada, ada.length - 1, toY, "#d62728");
  const ratio = curves.adaconsWallTime() / Math.max(curves.sumWallTime(), 1e-12);
  $("timing").textContent =
    `final: sum ${sum[sum.length - 1].toExponential(3)}, AdaCons ${ada[ada.length - 1].toExponential(3)}` +
    ` | per-iteration time ratio ${ratio.toFixed(2)}x`;
}

function drawCoefficients(trace) {
  const f = frame($("coefficients"));
  const stages = [
    [trace.rawMean(), trace.rawStd(), "#2ca02c"],
    [trace.smoothedMean(), trace.smoothedStd(), "#9467bd"],
    [trace.normalizedMean(), trace.normalizedStd(), "#ff7f0e"],
  ];
  let lo = Infinity;
  let hi = -Infinity;
  for (const [m, s] of stages) {
    m.forEach((v, i) => {
      lo = Math.min(lo, v - s[i]);
      hi = Math.max(hi, v + s[i]);
    });
  }
  const span = Math.max(hi - lo, 1e-12);
  const toY = (v) => f.pad.t + f.h * (1 - (v - lo) / span);
  const n = stages[0][0].length;
  axes(f, lo, hi, n, (v) => v.toExponential(1));
  for (const [m, s, color] of stages) {
    polyline(f, m, n - 1, toY, color);
    polyline(f, m.map((v, i) => v + s[i]), n - 1, toY, color, [3, 3]);
    polyline(f, m.map((v, i) => v - s[i]), n - 1, toY, color, [3, 3]);
  }
}

function drawWeights(snap) {
  const f = frame($("weights"));
  const { ctx, pad, w, h } = f;
  const weights = snap.normalized();
  const cos = snap.cosine();
  const n = weights.length;
  const lo = Math.min(0, ...weights, -1 / n);
  const hi = Math.max(...weights, 2 / n);
  const toY = (v) => pad.t + h * (1 - (v - lo) / (hi - lo));
  axes(f, lo, hi, n, (v) => v.toFixed(3));
  const bw = w / n;
  weights.forEach((v, i) => {
    ctx.fillStyle = v >= 0 ? "#1f77b4" : "#d62728";
    const y0 = toY(0);
    const y1 = toY(v);
    ctx.fillRect(pad.l + i * bw + 1, Math.min(y0, y1), Math.max(bw - 2, 1), Math.abs(y1 - y0));
  });
  ctx.strokeStyle = "#333";
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.moveTo(pad.l, toY(1 / n));
  ctx.lineTo(pad.l + w, toY(1 / n));
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.fillStyle = "#ff7f0e";
  cos.forEach((c, i) => {
    const y = pad.t + h * (1 - (c + 1) / 2);
    ctx.beginPath();
    ctx.arc(pad.l + (i + 0.5) * bw, y, 3, 0, 2 * Math.PI);
    ctx.fill();
  });
  if (snap.fallback()) {
    ctx.fillStyle = "#a33";
    ctx.fillText("uniform fallback", pad.l + 5, pad.t + 12);
  }
}

function runAll() {
  const p = readParams();
  $("status").textContent = "";
  try {
    drawObjective(compareAggregators(p.dim, p.workers, p.batch, p.iters, p.seed, p.beta));
    drawCoefficients(coefficientTrace(p.dim, p.workers, p.batch, p.iters, p.seed, p.beta));
    refreshWeights();
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
  }
}

function refreshWeights() {
  const p = readParams();
  const local = parseInt($("local").value, 10);
  $("localOut").textContent = String(local);
  try {
    drawWeights(weightSnapshot(p.dim, p.workers, local, p.seed));
  } catch (e) {
    $("status").textContent = String(e.message ?? e);
  }
}

await init();
$("run").addEventListener("click", runAll);
$("local").addEventListener("input", refreshWeights);
runAll();
