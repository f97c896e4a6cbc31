import { describe, expect, it } from "vitest";

import { decodeWavPcm16, encodeWavPcm16, peakDb, waveformPeaks } from "../src/wav";

function sine(seconds: number, rate: number, freq = 220, amp = 0.5): Float32Array {
  const out = new Float32Array(Math.round(seconds * rate));
  for (let i = 0; i < out.length; i++) out[i] = amp * Math.sin((2 * Math.PI * freq * i) / rate);
  return out;
}

describe("encodeWavPcm16", () => {
  it("writes a RIFF/WAVE header with the right sizes", () => {
    const buf = encodeWavPcm16(new Float32Array(100), 8000);
    const view = new DataView(buf);
    const ascii = (o: number, n: number) => String.fromCharCode(...new Uint8Array(buf, o, n));
    expect(ascii(0, 4)).toBe("RIFF");
    expect(ascii(8, 4)).toBe("WAVE");
    expect(view.getUint32(24, true)).toBe(8000);
    expect(view.getUint16(22, true)).toBe(1);
    expect(view.getUint32(40, true)).toBe(200);
    expect(buf.byteLength).toBe(44 + 200);
  });

  it("round-trips samples within quantization error", () => {
    const original = sine(0.25, 8000);
    const decoded = decodeWavPcm16(encodeWavPcm16(original, 8000));
    expect(decoded.sampleRate).toBe(8000);
    expect(decoded.samples.length).toBe(original.length);
    for (let i = 0; i < original.length; i += 97) {
      expect(Math.abs(decoded.samples[i] - original[i])).toBeLessThan(1 / 32767);
    }
  });

  it("clamps out-of-range samples", () => {
    const decoded = decodeWavPcm16(encodeWavPcm16(new Float32Array([2.0, -3.0]), 8000));
    expect(decoded.samples[0]).toBeCloseTo(32767 / 32768, 4);
    expect(decoded.samples[1]).toBeCloseTo(-32767 / 32768, 4);
  });
});

describe("decodeWavPcm16", () => {
  it("rejects non-WAV bytes", () => {
    expect(() => decodeWavPcm16(new ArrayBuffer(64))).toThrow(/not a WAV/);
  });

  it("rejects non-PCM formats", () => {
    const buf = encodeWavPcm16(new Float32Array(10), 8000);
    new DataView(buf).setUint16(20, 3, true); // float format tag
    expect(() => decodeWavPcm16(buf)).toThrow(/unsupported/);
  });
});

describe("waveformPeaks", () => {
  it("emits one lo/hi pair per column", () => {
    const peaks = waveformPeaks(sine(1, 8000), 120);
    expect(peaks).toHaveLength(120);
    for (const [lo, hi] of peaks) {
      expect(lo).toBeLessThanOrEqual(hi);
      expect(Math.abs(lo)).toBeLessThanOrEqual(0.5001);
      expect(Math.abs(hi)).toBeLessThanOrEqual(0.5001);
    }
  });

  it("covers the full amplitude for a dense sine", () => {
    const peaks = waveformPeaks(sine(1, 8000, 440), 10);
    for (const [lo, hi] of peaks) {
      expect(hi).toBeGreaterThan(0.45);
      expect(lo).toBeLessThan(-0.45);
    }
  });
});

describe("peakDb", () => {
  it("is 0 dB at full scale", () => {
    expect(peakDb(new Float32Array([1.0, -0.2]))).toBeCloseTo(0, 6);
  });

  it("is about -6 dB at half scale", () => {
    expect(peakDb(new Float32Array([0.5]))).toBeCloseTo(-6.0206, 3);
  });

  it("floors on silence", () => {
    expect(peakDb(new Float32Array(32))).toBe(-80);
  });
});
