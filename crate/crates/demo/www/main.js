import init, { eigen_spectrum, bessel_correlation, sigma_sq_curve } from "./pkg/dmimo_demo.js";

const COLORS = ["#1f77b4", "#ff7f0e"];

function num(id) {
  return Number(document.getElementById(id).value);
}

// Draws one or more series of [x, y] points with linear axes.
function plot(canvas, series, { xlabel, ylabel }) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = { l: 70, r: 15, t: 10, b: 35 };
  ctx.clearRect(0, 0, width, height);
  const pts = series.flat();
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const sx = (x) => pad.l + ((x - x0) / (x1 - x0)) * (width - pad.l - pad.r);
  const sy = (y) => height - pad.b - ((y - y0) / (y1 - y0)) * (height - pad.t - pad.b);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#333";
  ctx.font = "12px system-ui";
  ctx.strokeRect(pad.l, pad.t, width - pad.l - pad.r, height - pad.t - pad.b);
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4;
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(x.toPrecision(3), sx(x) - 12, height - pad.b + 15);
    ctx.fillText(y.toPrecision(3), 5, sy(y) + 4);
  }
  ctx.fillText(xlabel, width / 2, height - 5);
  ctx.fillText(ylabel, pad.l + 5, pad.t + 14);

  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.beginPath();
    s.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
  });
}

function guard(infoId, f) {
  return () => {
    try {
      f();
    } catch (e) {
      const el = infoId && document.getElementById(infoId);
      if (el) el.textContent = `error: ${e.message ?? e}`;
      else alert(e.message ?? e);
    }
  };
}

function runEigen() {
  const out = eigen_spectrum(
    num("eig-m"), num("eig-d"), num("eig-t0"), num("eig-t1"),
    document.getElementById("eig-random").checked, 1,
  );
  const [rank, bound, ...db] = out;
  plot(document.getElementById("eig-plot"), [db.map((v, i) => [i + 1, v])], {
    xlabel: "eigenvalue index",
    ylabel: "λk/λ1 (dB)",
  });
  document.getElementById("eig-info").textContent =
    `effective rank (1e-5 threshold): ${rank}; closed-form model: ${bound.toFixed(1)}`;
}

function runCorrelation() {
  const out = bessel_correlation(num("cor-m"), num("cor-d"), 121, num("cor-seed"));
  const sim = [];
  const ref = [];
  for (let i = 0; i < out.length; i += 3) {
    sim.push([out[i], out[i + 1]]);
    ref.push([out[i], out[i + 2]]);
  }
  plot(document.getElementById("cor-plot"), [sim, ref], { xlabel: "D / λ", ylabel: "correlation" });
}

function runSigma() {
  const out = sigma_sq_curve(num("sig-r"), num("sig-g"), num("sig-d"), 40);
  const pts = [];
  for (let i = 0; i < out.length; i += 2) pts.push([out[i], Math.log10(out[i + 1])]);
  plot(document.getElementById("sig-plot"), [pts], { xlabel: "D (m)", ylabel: "log10 σ²(D)" });
}

await init();
document.getElementById("eig-run").onclick = guard("eig-info", runEigen);
document.getElementById("cor-run").onclick = guard(null, runCorrelation);
document.getElementById("sig-run").onclick = guard(null, runSigma);
runEigen();
runCorrelation();
runSigma();
