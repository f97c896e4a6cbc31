/** Minimal WAV encode/decode: 16-bit PCM mono, enough for clip uploads and
 * waveform preview. The server accepts exactly this encoding. */

export type DecodedWav = {
  sampleRate: number;
  samples: Float32Array;
};

export function encodeWavPcm16(samples: Float32Array, sampleRate: number): ArrayBuffer {
  const dataBytes = samples.length * 2;
  const buffer = new ArrayBuffer(44 + dataBytes);
  const view = new DataView(buffer);
  const writeAscii = (offset: number, text: string) => {
    for (let i = 0; i < text.length; i++) view.setUint8(offset + i, text.charCodeAt(i));
  };
  writeAscii(0, "RIFF");
  view.setUint32(4, 36 + dataBytes, true);
  writeAscii(8, "WAVE");
  writeAscii(12, "fmt ");
  view.setUint32(16, 16, true); // PCM fmt chunk size
  view.setUint16(20, 1, true); // PCM
  view.setUint16(22, 1, true); // mono
  view.setUint32(24, sampleRate, true);
  view.setUint32(28, sampleRate * 2, true); // byte rate
  view.setUint16(32, 2, true); // block align
  view.setUint16(34, 16, true); // bits per sample
  writeAscii(36, "data");
  view.setUint32(40, dataBytes, true);
  for (let i = 0; i < samples.length; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]));
    view.setInt16(44 + i * 2, Math.round(clamped * 32767), true);
  }
  return buffer;
}

/** Parse a 16-bit PCM WAV (what we encode, what the server serves back). */
export function decodeWavPcm16(buffer: ArrayBuffer): DecodedWav {
  const view = new DataView(buffer);
  const ascii = (offset: number, n: number) =>
    String.fromCharCode(...new Uint8Array(buffer, offset, n));
  if (ascii(0, 4) !== "RIFF" || ascii(8, 4) !== "WAVE") {
    throw new Error("not a WAV file");
  }
  let offset = 12;
  let sampleRate = 0;
  let bits = 0;
  let channels = 1;
  while (offset + 8 <= view.byteLength) {
    const chunkId = ascii(offset, 4);
    const size = view.getUint32(offset + 4, true);
    if (chunkId === "fmt ") {
      const format = view.getUint16(offset + 8, true);
      if (format !== 1) throw new Error(`unsupported WAV format ${format}`);
      channels = view.getUint16(offset + 10, true);
      sampleRate = view.getUint32(offset + 12, true);
      bits = view.getUint16(offset + 22, true);
    } else if (chunkId === "data") {
      if (bits !== 16) throw new Error(`unsupported bit depth ${bits}`);
      const n = Math.floor(size / 2 / channels);
      const samples = new Float32Array(n);
      for (let i = 0; i < n; i++) {
        // mono preview: first channel only
        samples[i] = view.getInt16(offset + 8 + i * 2 * channels, true) / 32768;
      }
      return { sampleRate, samples };
    }
    offset += 8 + size + (size % 2);
  }
  throw new Error("WAV data chunk not found");
}

/** Min/max sample pairs per pixel column for canvas waveform rendering. */
export function waveformPeaks(samples: Float32Array, columns: number): Array<[number, number]> {
  if (columns < 1) throw new Error("columns must be >= 1");
  const peaks: Array<[number, number]> = [];
  const perColumn = samples.length / columns;
  for (let c = 0; c < columns; c++) {
    const start = Math.floor(c * perColumn);
    const end = Math.max(start + 1, Math.floor((c + 1) * perColumn));
    let lo = Infinity;
    let hi = -Infinity;
    for (let i = start; i < Math.min(end, samples.length); i++) {
      if (samples[i] < lo) lo = samples[i];
      if (samples[i] > hi) hi = samples[i];
    }
    if (lo === Infinity) {
      lo = 0;
      hi = 0;
    }
    peaks.push([lo, hi]);
  }
  return peaks;
}

export function peakDb(samples: Float32Array, floor = -80): number {
  let peak = 0;
  for (const s of samples) peak = Math.max(peak, Math.abs(s));
  if (peak <= 0) return floor;
  return Math.max(20 * Math.log10(peak), floor);
}
