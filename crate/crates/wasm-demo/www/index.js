import init, { matchDemo, gmXorDemo, bfvNoiseDemo } from "./pkg/helb_wasm.js";

const $ = (id) => document.getElementById(id);

function el(tag, attrs = {}, ...children) {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  for (const c of children) node.append(c instanceof Node ? c : String(c));
  return node;
}

function table(headers, rows) {
  const t = el("table");
  t.append(el("tr", {}, ...headers.map((h) => el("th", {}, h))));
  for (const r of rows) t.append(el("tr", {}, ...r.map((c) => el("td", {}, c ?? ""))));
  return t;
}

// Runs a wasm call after the button state has painted, then renders its JSON.
function wire(button, out, call, render) {
  $(button).addEventListener("click", () => {
    const target = $(out);
    target.replaceChildren(el("span", { class: "muted" }, "working…"));
    $(button).disabled = true;
    setTimeout(() => {
      try {
        const start = performance.now();
        const report = JSON.parse(call());
        const ms = performance.now() - start;
        target.replaceChildren(...render(report), el("p", { class: "muted" }, `${ms.toFixed(1)} ms in the browser`));
      } catch (e) {
        target.replaceChildren(el("div", { class: "err" }, String(e)));
      } finally {
        $(button).disabled = false;
      }
    }, 20);
  });
}

function renderMatch(r) {
  const verdict = r.matched
    ? el("p", { class: "hit" }, `MATCH ${r.ip}: line ${r.entry_line} (/${r.prefix_len})`)
    : el("p", { class: "miss" }, `NO-MATCH ${r.ip}`);
  const groups = r.groups.map((g) => `/${g.prefix_len}: ${g.entries}`).join(", ");
  const summary = el(
    "p",
    { class: "muted" },
    `${r.scheme}, ${r.protocol} protocol. Stored ${r.stored} entries in ${r.ciphertexts} ciphertexts (${groups}). ` +
      `${r.stats.target_encryptions} target encryptions, ${r.stats.homomorphic_ops} homomorphic ops, ${r.stats.zero_tests} zero tests.`,
  );
  const rows = r.differences.map((d) => [d.line, d.cidr, `/${d.prefix_len}`, d.value ?? "(zero-test only)", d.zero === null ? "" : d.zero ? "yes" : "no"]);
  return [verdict, summary, table(["line", "network", "mask", "decrypted difference", "zero"], rows)];
}

function renderGm(r) {
  const ok = r.xor === String(r.expected);
  const head = el("p", { class: ok ? "hit" : "miss" }, `Dec(Enc(${r.a}) ⊕ Enc(${r.b})) = ${r.xor}, expected ${r.expected}`);
  const note = el("p", { class: "muted" }, `${r.modulus_bits}-bit modulus. A bit decrypts to 0 exactly when its ciphertext is a quadratic residue mod p.`);
  const rows = r.bits.map((b, i) => [
    r.width - 1 - i,
    b.a ? 1 : 0,
    b.b ? 1 : 0,
    b.ct_a,
    b.ct_b,
    b.ct_xor,
    b.quadratic_residue ? "QR (0)" : "non-QR (1)",
  ]);
  return [head, note, table(["bit", "a", "b", "Enc(a)", "Enc(b)", "product", "residue"], rows)];
}

function noiseChart(r) {
  const w = 560, h = 220, pad = 36;
  const ns = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(ns, "svg");
  svg.setAttribute("width", w);
  svg.setAttribute("height", h);
  const steps = r.steps;
  const top = Math.ceil(r.budget_log2) + 2;
  const bottom = Math.floor(Math.min(...steps.map((s) => s.noise_log2)) - 2);
  const x = (i) => pad + (i / Math.max(steps.length - 1, 1)) * (w - 2 * pad);
  const y = (v) => h - pad - ((v - bottom) / (top - bottom)) * (h - 2 * pad);
  const line = (pts, color, dash) => {
    const p = document.createElementNS(ns, "polyline");
    p.setAttribute("points", pts.map(([a, b]) => `${a},${b}`).join(" "));
    p.setAttribute("fill", "none");
    p.setAttribute("stroke", color);
    p.setAttribute("stroke-width", "2");
    if (dash) p.setAttribute("stroke-dasharray", "5 4");
    svg.append(p);
  };
  const text = (tx, ty, s) => {
    const t = document.createElementNS(ns, "text");
    t.setAttribute("x", tx);
    t.setAttribute("y", ty);
    t.setAttribute("font-size", "11");
    t.textContent = s;
    svg.append(t);
  };
  line([[pad, y(r.budget_log2)], [w - pad, y(r.budget_log2)]], "#b00", true);
  line(steps.map((s, i) => [x(i), y(s.bound_log2)]), "#888", true);
  line(steps.map((s, i) => [x(i), y(s.noise_log2)]), "#0a5fb0", false);
  text(pad + 4, y(r.budget_log2) - 4, `budget 2^${r.budget_log2.toFixed(1)}`);
  text(pad + 4, y(steps[steps.length - 1].bound_log2) - 4, "bound");
  text(w - pad - 60, y(steps[steps.length - 1].noise_log2) + 14, "measured");
  text(pad, h - 10, "1 addition");
  text(w - pad - 70, h - 10, `${steps.length} additions`);
  return svg;
}

function renderNoise(r) {
  const last = r.steps[r.steps.length - 1];
  const head = el(
    "p",
    { class: r.exact ? "hit" : "miss" },
    r.exact ? "Decryption exact after every addition" : "Decryption error",
  );
  const facts = el(
    "p",
    { class: "muted" },
    `n = ${r.ring_dim}, t = ${r.plaintext_mod}, log2 q = ${r.ciphertext_mod_log2.toFixed(1)}. ` +
      `Fresh bound 2^${r.fresh_bound_log2.toFixed(1)}, budget 2^${r.budget_log2.toFixed(1)}, ` +
      `final noise 2^${last.noise_log2.toFixed(1)}. Guaranteed headroom: ${r.max_additions} additions.`,
  );
  return [head, facts, noiseChart(r)];
}

await init();

wire("m-run", "m-out", () => matchDemo($("m-list").value, $("m-ip").value, $("m-scheme").value), renderMatch);
wire("g-run", "g-out", () => gmXorDemo(Number($("g-a").value) >>> 0, Number($("g-b").value) >>> 0, Number($("g-w").value)), renderGm);
wire("n-run", "n-out", () => bfvNoiseDemo(Number($("n-dim").value), Number($("n-adds").value)), renderNoise);
