import init, { solve, pseudospectrum, tracking } from "./pkg/entropic_anneal_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guard(outId, f) {
  const out = $(outId);
  out.classList.remove("err");
  try {
    f(out);
  } catch (e) {
    out.classList.add("err");
    out.textContent = String(e.message ?? e);
  }
}

function heat(t) {
  const c = Math.max(0, Math.min(1, t));
  return `rgb(${Math.round(255 * c)}, ${Math.round(80 + 120 * c)}, ${Math.round(255 * (1 - c))})`;
}

function drawMatrix(canvas, rows, scale, marks) {
  const ctx = canvas.getContext("2d");
  const n = rows.length, m = rows[0].length;
  const w = canvas.width / m, h = canvas.height / n;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  rows.forEach((row, i) => row.forEach((v, j) => {
    ctx.fillStyle = heat(scale(v));
    ctx.fillRect(j * w, i * h, w + 0.5, h + 0.5);
  }));
  if (marks) {
    ctx.strokeStyle = "#000";
    marks.forEach((j, i) => ctx.strokeRect(j * w + 1, i * h + 1, w - 2, h - 2));
  }
}

function runSolve() {
  guard("s-out", (out) => {
    const r = JSON.parse(solve(num("s-n"), num("s-margin"), num("s-eps"), BigInt(num("s-seed"))));
    const max = Math.max(...r.plan.flat());
    drawMatrix($("s-canvas"), r.plan, (v) => v / max, r.assignment);
    const lines = [
      `iterations ${r.iterations}, residual ${r.marginal_residual.toExponential(2)}, entropy ${r.entropy.toFixed(4)}`,
      `assignment ${r.assignment.join(" ")}`,
    ];
    if (r.planted) lines.push(`planted    ${r.planted.join(" ")}`);
    if (r.report) {
      lines.push(`spectral radius ${r.report.spectral_radius.toFixed(6)}, gap ${r.report.spectral_gap.toExponential(3)}`);
      lines.push(`resolvent norm ${r.report.resolvent_norm.toExponential(3)}`);
    }
    out.textContent = lines.join("\n");
  });
}

function runPseudo() {
  guard("p-out", (out) => {
    const g = JSON.parse(pseudospectrum(num("p-n"), num("p-margin"), num("p-eps"), BigInt(num("p-seed")), num("p-res")));
    const logs = g.values.flat().map((v) => Math.log10(Math.max(v, 1e-16)));
    const lo = Math.min(...logs), hi = Math.max(...logs);
    // image rows run top to bottom, so flip the imaginary axis
    const rows = g.values.slice().reverse();
    drawMatrix($("p-canvas"), rows, (v) => 1 - (Math.log10(Math.max(v, 1e-16)) - lo) / (hi - lo || 1));
    out.textContent = `log10 sigma_min from ${lo.toFixed(2)} to ${hi.toFixed(2)}`;
  });
}

function runTrack() {
  guard("t-out", (out) => {
    const r = JSON.parse(tracking(num("t-gamma"), num("t-s"), num("t-r"), num("t-alpha"), num("t-c"), num("t-steps")));
    const canvas = $("t-canvas"), ctx = canvas.getContext("2d");
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const R = num("t-r");
    const series = Object.entries(r).map(([name, v]) => [name, v.records.map((x) => x.error / (R * x.epsilon))]);
    const len = Math.max(...series.map(([, s]) => s.length));
    const top = 2;
    const y = (v) => canvas.height * (1 - Math.min(v, top) / top);
    ctx.strokeStyle = "#999";
    ctx.setLineDash([4, 4]);
    ctx.beginPath(); ctx.moveTo(0, y(1)); ctx.lineTo(canvas.width, y(1)); ctx.stroke();
    ctx.setLineDash([]);
    const colours = { exponential: "#c33", quadratic: "#36c" };
    for (const [name, s] of series) {
      ctx.strokeStyle = colours[name];
      ctx.beginPath();
      s.forEach((v, k) => {
        const px = (k / Math.max(len - 1, 1)) * canvas.width;
        k ? ctx.lineTo(px, y(v)) : ctx.moveTo(px, y(v));
      });
      ctx.stroke();
    }
    out.textContent = Object.entries(r).map(([name, v]) => {
      const esc = v.records.find((x) => x.escaped);
      const where = esc ? `escapes at step ${esc.step} (eps ${esc.epsilon.toExponential(3)})` : "stays in the basin";
      const crit = v.critical.analytic == null ? "none" : v.critical.analytic.toExponential(3);
      return `${name} (${colours[name] === "#c33" ? "red" : "blue"}): ${where}; analytic critical eps ${crit}`;
    }).join("\n");
  });
}

await init();
$("s-go").onclick = runSolve;
$("p-go").onclick = runPseudo;
$("t-go").onclick = runTrack;
runSolve();
runPseudo();
runTrack();
