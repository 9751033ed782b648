import init, { check_breaking, activate, sweep } from "./pkg/chsh_web.js";

const $ = (id) => document.getElementById(id);
const int = (id) => Math.max(0, parseInt($(id).value, 10) || 0);

// let the status text paint before a blocking search
const later = (fn) => new Promise((ok) => setTimeout(() => ok(fn()), 20));

async function guarded(out, fn) {
  out.textContent = "running…";
  try {
    out.textContent = await later(fn);
  } catch (err) {
    out.textContent = "error: " + err;
  }
}

function pretty(json) {
  return JSON.stringify(JSON.parse(json), null, 2);
}

function drawGrid(points) {
  const grid = $("sw-grid");
  grid.replaceChildren();
  const p1s = [...new Set(points.map((p) => p.p1))];
  const p2s = [...new Set(points.map((p) => p.p2))];
  const head = grid.insertRow();
  head.insertCell().textContent = "p1 \\ p2";
  p2s.forEach((p2) => (head.insertCell().textContent = p2.toFixed(3)));
  p1s.forEach((p1) => {
    const row = grid.insertRow();
    row.insertCell().textContent = p1.toFixed(3);
    points
      .filter((p) => p.p1 === p1)
      .forEach((p) => {
        const cell = row.insertCell();
        cell.className = p.activated ? "on" : "off";
        cell.textContent = p.best_value.toFixed(4);
      });
  });
}

await init();

$("cb-run").onclick = () =>
  guarded($("cb-out"), () => pretty(check_breaking($("cb-spec").value, int("restarts"), int("seed"))));

$("act-run").onclick = () =>
  guarded($("act-out"), () => {
    const kind = $("act-kind").value;
    const ch2 = kind === "single" ? "" : $("act-ch2").value;
    return pretty(activate(kind, $("act-ch1").value, ch2, int("restarts"), int("seed")));
  });

$("sw-run").onclick = () =>
  guarded($("sw-status"), () => {
    const points = JSON.parse(
      sweep(
        $("sw-kind").value,
        $("sw-f1").value,
        $("sw-f2").value,
        parseFloat($("sw-lo").value),
        parseFloat($("sw-hi").value),
        parseFloat($("sw-step").value),
        int("restarts"),
        int("seed"),
      ),
    );
    drawGrid(points);
    const hits = points.filter((p) => p.activated).length;
    return `${points.length} points, ${hits} activated`;
  });
