import init, { packet_curves, fd_compare, symmetry_curves } from "./pkg/fpk_web.js";

const X_MIN = -5, X_MAX = 5;
const COLORS = ["#888", "#1f6fb4", "#d2452b"];
const ids = ["lambda", "k3", "kappa", "epsilon", "mean", "b0", "c0", "t", "xga"];
let view = "packet";

function read() {
  const v = {};
  for (const id of ids) {
    const el = document.getElementById(id);
    v[id] = parseFloat(el.value);
    el.nextElementSibling.textContent = el.value;
  }
  return v;
}

function split(data, n, k) {
  const out = [];
  for (let i = 0; i < k; i++) out.push(data.subarray(i * n, (i + 1) * n));
  return out;
}

function draw(x, curves, labels) {
  const c = document.getElementById("plot");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  let lo = 0, hi = 0;
  for (const y of curves) for (const v of y) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (hi - lo < 1e-12) hi = lo + 1;
  const pad = 30;
  const px = (v) => pad + (v - X_MIN) / (X_MAX - X_MIN) * (c.width - 2 * pad);
  const py = (v) => c.height - pad - (v - lo) / (hi - lo) * (c.height - 2 * pad);
  g.strokeStyle = "#ddd";
  g.beginPath(); g.moveTo(pad, py(0)); g.lineTo(c.width - pad, py(0)); g.stroke();
  g.fillStyle = "#555";
  g.fillText(hi.toPrecision(3), 2, pad);
  g.fillText(lo.toPrecision(3), 2, c.height - pad);
  g.fillText(String(X_MIN), pad, c.height - 10);
  g.fillText(String(X_MAX), c.width - pad - 10, c.height - 10);
  curves.forEach((y, k) => {
    g.strokeStyle = COLORS[k % COLORS.length];
    g.lineWidth = 2;
    g.setLineDash(k === 2 && view === "fd" ? [6, 4] : []);
    g.beginPath();
    for (let i = 0; i < x.length; i++) {
      const f = i === 0 ? "moveTo" : "lineTo";
      g[f](px(x[i]), py(y[i]));
    }
    g.stroke();
  });
  g.setLineDash([]);
  document.getElementById("legend").innerHTML = labels
    .map((l, k) => `<span style="color:${COLORS[k % COLORS.length]}">${l}</span>`).join("");
}

function render() {
  const v = read();
  const args = [v.lambda, v.k3, v.kappa, v.epsilon, v.mean, v.b0, v.c0, v.t];
  const info = document.getElementById("info");
  document.getElementById("status").textContent = "";
  try {
    if (view === "packet") {
      const n = 401, d = packet_curves(...args, X_MIN, X_MAX, n);
      const [x, u0, ut] = split(d, n, 3);
      draw(x, [u0, ut], ["u(x,0)", "u(x,t)"]);
      info.textContent = `X(t) = ${d[3 * n].toPrecision(6)}`;
    } else if (view === "fd") {
      const n = 801, d = fd_compare(...args, X_MIN, X_MAX, n);
      const [x, exact, fd] = split(d, n, 3);
      draw(x, [new Float64Array(n), exact, fd], ["", "closed form", "finite differences"]);
      info.textContent = `max |difference| = ${d[3 * n].toExponential(3)}`;
    } else {
      const n = 401, d = symmetry_curves(...args, v.xga, X_MIN, X_MAX, n);
      const [x, u, ua] = split(d, n, 3);
      draw(x, [new Float64Array(n), u, ua], ["", "u(x,t)", "u_A(x,t)"]);
      info.textContent = "u_A is the image of the solution under x − X(s) + ∂ₓ; it carries zero mass.";
    }
  } catch (e) {
    document.getElementById("status").textContent = String(e);
  }
}

await init();
for (const id of ids) document.getElementById(id).addEventListener("input", render);
for (const b of document.querySelectorAll("nav button")) {
  b.addEventListener("click", () => {
    view = b.dataset.view;
    for (const o of document.querySelectorAll("nav button")) o.setAttribute("aria-pressed", String(o === b));
    render();
  });
}
render();
