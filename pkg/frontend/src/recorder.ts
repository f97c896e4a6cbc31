/** Microphone capture of exactly `seconds` of mono audio.
 *
 * Captures raw Float32 frames via an AudioContext (the server wants PCM WAV,
 * which MediaRecorder's webm/opus cannot provide), trims to the configured
 * clip length, and hands back samples ready for `encodeWavPcm16`.
 */

export type Recording = {
  samples: Float32Array;
  sampleRate: number;
};

export async function recordClip(
  seconds: number,
  onProgress?: (elapsed: number) => void,
): Promise<Recording> {
  const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
  const ctx = new AudioContext();
  const source = ctx.createMediaStreamSource(stream);
  const processor = ctx.createScriptProcessor(4096, 1, 1);
  const chunks: Float32Array[] = [];
  let collected = 0;
  const target = Math.round(seconds * ctx.sampleRate);

  const done = new Promise<void>((resolve) => {
    processor.onaudioprocess = (event) => {
      const data = event.inputBuffer.getChannelData(0);
      chunks.push(new Float32Array(data));
      collected += data.length;
      onProgress?.(Math.min(collected / ctx.sampleRate, seconds));
      if (collected >= target) resolve();
    };
  });

  source.connect(processor);
  processor.connect(ctx.destination);
  try {
    await done;
  } finally {
    processor.disconnect();
    source.disconnect();
    stream.getTracks().forEach((t) => t.stop());
    await ctx.close();
  }

  const samples = new Float32Array(target);
  let offset = 0;
  for (const chunk of chunks) {
    const take = Math.min(chunk.length, target - offset);
    samples.set(chunk.subarray(0, take), offset);
    offset += take;
    if (offset >= target) break;
  }
  return { samples, sampleRate: ctx.sampleRate };
}
