import init, { Scene } from "./pkg/phasetv_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let scene = null;

function paint(id, rgba, size) {
  const canvas = $(id);
  canvas.width = size;
  canvas.height = size;
  const img = new ImageData(new Uint8ClampedArray(rgba), size, size);
  canvas.getContext("2d").putImageData(img, 0, 0);
}

function clear(id) {
  const c = $(id);
  c.getContext("2d").clearRect(0, 0, c.width, c.height);
}

function status(msg) {
  $("status").textContent = msg;
}

function generate() {
  try {
    scene?.free();
    scene = new Scene(num("size"), num("fringes"), num("snr"), num("seed"));
  } catch (e) {
    scene = null;
    $("denoise").disabled = true;
    status(String(e));
    return;
  }
  const n = scene.size();
  paint("clean", scene.cleanRgba(), n);
  paint("noisy", scene.noisyRgba(), n);
  clear("result");
  clear("deviation");
  $("stats").textContent = `achieved SNR ${scene.achievedSnrDb().toFixed(2)} dB`;
  $("denoise").disabled = false;
  status("");
}

function denoise() {
  if (!scene) return;
  status("running...");
  // Let the status text render before the solver blocks the thread.
  setTimeout(() => {
    const t0 = performance.now();
    let out;
    try {
      out = scene.denoise($("method").value, num("lambda3"), num("beta"), num("maxOuter"), num("sigma"));
    } catch (e) {
      status(String(e));
      return;
    }
    const ms = performance.now() - t0;
    const n = scene.size();
    paint("result", out.phase, n);
    paint("deviation", out.deviation, n);
    const f = (x) => x.toFixed(5);
    $("stats").textContent = [
      `achieved SNR  ${scene.achievedSnrDb().toFixed(2)} dB`,
      `iterations    ${out.iterations}${out.converged ? "" : " (not converged)"}  ${ms.toFixed(0)} ms`,
      `MSE  re/im    ${f(out.mseReal)} / ${f(out.mseIm)}`,
      `IQI  re/im    ${f(out.iqiReal)} / ${f(out.iqiIm)}`,
      `|re²+im²-1|   mean ${f(out.pythMean)}  max ${f(out.deviationMax)}`,
    ].join("\n");
    out.free();
    status("");
  }, 10);
}

await init();
$("generate").addEventListener("click", generate);
$("denoise").addEventListener("click", denoise);
generate();
