import init, {
  phantom_names,
  simulate_and_recover,
  log_weight_map,
  singular_values,
} from "./pkg/holodeconv_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// Grayscale rendering of a row-major side x side array into a canvas.
function drawGray(canvas, values, side, lo, hi) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(side, side);
  const span = hi > lo ? hi - lo : 1;
  values.forEach((v, i) => {
    const g = Number.isFinite(v) ? Math.round((255 * (v - lo)) / span) : 0;
    img.data.set([g, g, g, 255], 4 * i);
  });
  const tmp = new OffscreenCanvas(side, side);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function runRecovery() {
  const r = simulate_and_recover(
    $("rec-phantom").value, num("rec-n"), num("rec-m"), $("rec-ref").value, num("rec-ppp"), BigInt(num("rec-seed")),
  );
  const truth = r.truth();
  const est = r.estimate();
  const hi = Math.max(...truth, ...est);
  drawGray($("rec-truth"), truth, r.n, 0, hi);
  drawGray($("rec-est"), est, r.n, 0, hi);
  $("rec-out").textContent =
    `relative squared error ${r.relative_error.toExponential(3)}, ` +
    `predicted ${r.expected_relative_error.toExponential(3)}`;
  r.free();
}

function runMaps() {
  const [n, m, stride] = [num("map-n"), num("map-m"), num("map-stride")];
  const side = Math.ceil(m / stride);
  const maps = ["block", "pinhole", "dual"].map((kind) => [kind, log_weight_map(n, m, kind, stride)]);
  const finite = maps.flatMap(([, v]) => Array.from(v).filter(Number.isFinite));
  const lo = Math.min(...finite);
  const hi = Math.max(...finite);
  const row = $("map-row");
  row.replaceChildren();
  for (const [kind, values] of maps) {
    const wrap = document.createElement("div");
    const canvas = document.createElement("canvas");
    canvas.width = canvas.height = 256;
    const cap = document.createElement("div");
    cap.className = "caption";
    cap.textContent = kind;
    wrap.append(canvas, cap);
    row.append(wrap);
    drawGray(canvas, values, side, lo, hi);
  }
}

function runSingularValues() {
  const s = singular_values(num("sv-n"));
  const canvas = $("sv-plot");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 20];
  const logs = Array.from(s, Math.log10);
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#036";
  logs.forEach((v, i) => {
    const x = pad + ((w - 2 * pad) * (i + 0.5)) / logs.length;
    const y = h - pad - ((h - 2 * pad) * (v - lo)) / (hi - lo || 1);
    ctx.beginPath();
    ctx.arc(x, y, 2.5, 0, 2 * Math.PI);
    ctx.fill();
  });
  $("sv-out").textContent =
    `largest ${s[0].toPrecision(6)}, smallest ${s[s.length - 1].toPrecision(6)}, ` +
    `condition number ${(s[0] / s[s.length - 1]).toPrecision(6)} (log scale)`;
}

function guarded(f) {
  return () => {
    try {
      $("status").textContent = "";
      f();
    } catch (e) {
      $("status").textContent = String(e);
    }
  };
}

await init();
for (const name of phantom_names()) {
  $("rec-phantom").append(new Option(name, name));
}
$("rec-run").onclick = guarded(runRecovery);
$("map-run").onclick = guarded(runMaps);
$("sv-run").onclick = guarded(runSingularValues);
$("status").textContent = "";
guarded(runRecovery)();
guarded(runMaps)();
guarded(runSingularValues)();
