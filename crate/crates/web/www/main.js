import init, { profile_cut, azimuth_schedule, CoverageExplorer } from "./pkg/linescan_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const COLORS = ["#000", "#d73027", "#fc8d59", "#91bfdb", "#4575b4"];
const NAMES = ["", "hole", "positioning", "sensing", "communication"];

function guard(errId, f) {
  return () => {
    $(errId).textContent = "";
    try { f(); } catch (e) { $(errId).textContent = e.message ?? String(e); }
  };
}

function drawProfile() {
  const cv = $("pcv"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const orders = $("orders").value.split(",").map((s) => parseInt(s, 10)).filter((n) => n > 0);
  orders.forEach((n, k) => {
    const v = profile_cut(n, num("pdiv"), 60, num("pz"), 401);
    g.strokeStyle = `hsl(${(k * 360) / orders.length}, 70%, 40%)`;
    g.beginPath();
    v.forEach((y, i) => {
      const px = (i / (v.length - 1)) * cv.width, py = cv.height - 10 - y * (cv.height - 20);
      i ? g.lineTo(px, py) : g.moveTo(px, py);
    });
    g.stroke();
    g.fillStyle = g.strokeStyle;
    g.fillText(`n=${n}`, 10, 15 + 14 * k);
  });
}

function drawSchedule() {
  const s = azimuth_schedule(num("sd"), num("sa"), num("sm"), num("sp"));
  const nodes = s.nodes_deg, dwell = s.dwell_us;
  const cv = $("scv"), g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  const span = Math.max(...nodes.map(Math.abs)) || 1, top = Math.max(...dwell);
  g.fillStyle = "#4575b4";
  nodes.forEach((p, i) => {
    const x = cv.width / 2 + (p / span) * (cv.width / 2 - 4), h = (dwell[i] / top) * (cv.height - 10);
    g.fillRect(x, cv.height - h, 1, h);
  });
  $("sinfo").textContent = `${nodes.length} states, dwell ${Math.min(...dwell).toFixed(2)} to ${top.toFixed(2)} us`;
}

let explorer = null;

function calibrate() {
  explorer?.free();
  explorer = null;
  $("cinfo").textContent = "calibrating...";
  setTimeout(guard("cerr", () => {
    explorer = new CoverageExplorer(num("cg"), num("cd"));
    classify();
  }), 0);
}

function classify() {
  $("cav").textContent = num("ca").toFixed(3);
  if (!explorer) return;
  const m = explorer.classify(num("ca"));
  const cv = $("ccv"), g = cv.getContext("2d");
  const sx = cv.width / m.nx, sy = cv.height / m.ny, c = m.classes;
  for (let j = 0; j < m.ny; j++) {
    for (let i = 0; i < m.nx; i++) {
      g.fillStyle = COLORS[c[j * m.nx + i]];
      // row 0 is the lowest lateral offset, draw it at the bottom
      g.fillRect(i * sx, cv.height - (j + 1) * sy, Math.ceil(sx), Math.ceil(sy));
    }
  }
  const f = m.fractions;
  $("cinfo").textContent = `${m.states} states, holes ${(100 * f[0]).toFixed(2)}%, ` +
    `positioning ${(100 * f[1]).toFixed(2)}%, sensing ${(100 * f[2]).toFixed(2)}%, ` +
    `communication ${(100 * f[3]).toFixed(2)}%`;
  m.free();
}

await init();
$("legend").innerHTML = [1, 2, 3, 4].map((k) => `<span style="background:${COLORS[k]}"></span>${NAMES[k]}`).join("");
$("pgo").onclick = guard("perr", drawProfile);
$("sgo").onclick = guard("serr", drawSchedule);
$("cinit").onclick = calibrate;
$("ca").oninput = guard("cerr", classify);
guard("perr", drawProfile)();
guard("serr", drawSchedule)();
