import init, { analyze, simulate, coalescence } from './pkg/bitdiss_demo.js';

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function protocolArgs() {
  return [$('builtin').value, num('ell'), $('g0').value, $('g1').value];
}

function show(id, value) {
  const el = $(id);
  el.classList.toggle('error', Boolean(value.error));
  el.textContent = value.error ? value.error : JSON.stringify(value, null, 2);
}

// Line or bar plot of [x, y] pairs; `zero` draws the y = 0 axis.
function plot(canvas, points, { bars = false, zero = false, color = 'steelblue' } = {}) {
  const ctx = canvas.getContext('2d');
  const { width: w, height: h } = canvas;
  const m = 30;
  ctx.clearRect(0, 0, w, h);
  if (points.length === 0) return;
  const xs = points.map((p) => p[0]);
  const ys = points.map((p) => p[1]);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(0, ...ys), Math.max(0, ...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 1; y1 += 1; }
  const sx = (x) => m + ((x - x0) / (x1 - x0)) * (w - 2 * m);
  const sy = (y) => h - m - ((y - y0) / (y1 - y0)) * (h - 2 * m);
  ctx.strokeStyle = '#999';
  ctx.strokeRect(m, m, w - 2 * m, h - 2 * m);
  if (zero) {
    ctx.beginPath();
    ctx.moveTo(m, sy(0));
    ctx.lineTo(w - m, sy(0));
    ctx.stroke();
  }
  ctx.fillStyle = '#444';
  ctx.font = '11px sans-serif';
  ctx.fillText(String(+y1.toPrecision(3)), 2, m);
  ctx.fillText(String(+y0.toPrecision(3)), 2, h - m);
  ctx.fillText(String(+x0.toPrecision(3)), m, h - m + 14);
  ctx.fillText(String(+x1.toPrecision(3)), w - m - 20, h - m + 14);
  if (bars) {
    const bw = Math.max(1, (w - 2 * m) / (x1 - x0 + 1));
    ctx.fillStyle = color;
    for (const [x, y] of points) ctx.fillRect(sx(x) - bw / 2, sy(y), bw, sy(0) - sy(y));
    return;
  }
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
  ctx.stroke();
}

function runAnalyze() {
  const out = JSON.parse(analyze(...protocolArgs()));
  if (out.error) return show('analysis', out);
  plot($('curve'), out.curve, { zero: true, color: 'crimson' });
  const r = out.report;
  const roots = r.roots.map((x) => (x.exact ? x.value : x.approx.toPrecision(8))).join(', ');
  $('analysis').classList.remove('error');
  $('analysis').textContent = [
    `F(p) = ${r.polynomial}`,
    r.identically_zero ? 'F is identically zero' : `roots in [0, 1]: ${roots}`,
    `well-formed: ${r.well_formed}${r.violations.length ? ' (' + r.violations.join(', ') + ')' : ''}`,
    r.classification ? `classification: ${r.classification}, suggested x0 = ${r.suggested_x0_fraction} n` : '',
    r.error ? `error: ${r.error}` : '',
  ].filter(Boolean).join('\n');
  if (r.suggested_x0_fraction) $('x0').value = Math.round(r.suggested_x0_fraction * num('n'));
}

function runSimulate() {
  const out = JSON.parse(simulate(...protocolArgs(), num('n'), num('z'), num('x0'), num('rounds'),
    $('sequential').checked, num('seed')));
  if (out.error) return show('run', out);
  const scale = out.mode === 'sequential' ? 1 / out.n : 1;
  plot($('trajectory'), out.counts.map((x, t) => [t * scale, x]));
  const { counts, ...summary } = out;
  summary.steps = counts.length - 1;
  show('run', summary);
}

function runCoalesce() {
  const out = JSON.parse(coalescence(num('cn'), num('ctrials'), num('seed')));
  if (out.error) return show('walks', out);
  plot($('histogram'), out.histogram, { bars: true });
  const { histogram, ...summary } = out;
  show('walks', summary);
}

await init();
$('builtin').addEventListener('change', () => { $('custom').hidden = $('builtin').value !== ''; });
$('analyze').addEventListener('click', runAnalyze);
$('simulate').addEventListener('click', runSimulate);
$('coalesce').addEventListener('click', runCoalesce);
runAnalyze();
