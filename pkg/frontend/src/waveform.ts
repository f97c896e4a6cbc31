/** Canvas waveform rendering from min/max peak pairs. */

import { waveformPeaks } from "./wav";

export function drawWaveform(
  canvas: HTMLCanvasElement,
  samples: Float32Array,
  color = "#4a7cc9",
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = color;
  const mid = height / 2;
  const peaks = waveformPeaks(samples, width);
  for (let x = 0; x < peaks.length; x++) {
    const [lo, hi] = peaks[x];
    const top = mid - hi * mid;
    const bottom = mid - lo * mid;
    ctx.fillRect(x, top, 1, Math.max(1, bottom - top));
  }
}
