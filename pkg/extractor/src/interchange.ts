/**
 * Writers for the gsdp interchange formats.
 *
 * Byte layouts mirror the primary package exactly: little-endian, a 4-byte
 * magic, a u8 format version, u32 dimensions, float32 payloads. This module
 * only moves bytes; prototypes and signatures are computed by the primary.
 */

import { writeFileSync } from 'node:fs';

export const FORMAT_VERSION = 1;
export const FEATURES_MAGIC = 'GSDF';
export const HEAD_MAGIC = 'GSDH';
export const SIGNATURE_MAGIC = 'GSDS';

export interface FeatureSetData {
  /** One id per object; utf-8, at most 65535 bytes each. */
  ids: string[];
  /** One integer label per object. */
  labels: Int32Array;
  /** Row-major n x m activations. */
  features: Float32Array;
  /** Feature length m. */
  m: number;
  /** Optional names indexed by label; written to the .meta.json sidecar. */
  categoryNames?: string[];
}

export interface HeadData {
  /** Row-major n x m weights, one row per category. */
  weights: Float32Array;
  /** One bias per category. */
  biases: Float32Array;
  /** Feature length m. */
  m: number;
}

export interface SignatureRecord {
  taxonomy: number;
  category: number;
  r: number;
  m: number;
  mPadded: number;
  p: number;
  q: number;
  objectId: string | null;
  values: Float32Array;
}

const encoder = new TextEncoder();

function checkFinite(values: Float32Array, what: string): void {
  for (let i = 0; i < values.length; i++) {
    if (!Number.isFinite(values[i])) {
      throw new Error(`${what}: non-finite value at index ${i}`);
    }
  }
}

function encodeId(id: string): Uint8Array {
  const bytes = encoder.encode(id);
  if (bytes.length > 0xffff) {
    throw new Error(`id exceeds 65535 bytes: ${id.slice(0, 32)}...`);
  }
  return bytes;
}

function writeF32(view: DataView, offset: number, values: Float32Array): number {
  for (let i = 0; i < values.length; i++) {
    view.setFloat32(offset, values[i], true);
    offset += 4;
  }
  return offset;
}

/** Replace the final extension with .meta.json, as the primary expects. */
export function sidecarPath(path: string): string {
  const dot = path.lastIndexOf('.');
  const slash = Math.max(path.lastIndexOf('/'), path.lastIndexOf('\\'));
  const base = dot > slash ? path.slice(0, dot) : path;
  return `${base}.meta.json`;
}

function writeSidecar(path: string, categoryNames: string[],
                      provenance?: string): void {
  const meta: Record<string, unknown> = { category_names: categoryNames };
  if (provenance) {
    meta.provenance = provenance;
  }
  writeFileSync(sidecarPath(path), JSON.stringify(meta, null, 2) + '\n');
}

/** Write a GSDF feature-set file plus its category-name sidecar. */
export function writeFeatureSet(data: FeatureSetData, path: string,
                                provenance?: string): void {
  const n = data.ids.length;
  if (data.labels.length !== n) {
    throw new Error(`${n} ids but ${data.labels.length} labels`);
  }
  if (data.features.length !== n * data.m) {
    throw new Error(
      `features hold ${data.features.length} values, expected ${n * data.m}`);
  }
  checkFinite(data.features, 'features');

  const idBytes = data.ids.map(encodeId);
  let size = 4 + 9;
  for (const bytes of idBytes) {
    size += 2 + bytes.length + 4 + 4 * data.m;
  }
  const buffer = Buffer.alloc(size);
  const view = new DataView(buffer.buffer, buffer.byteOffset, size);
  buffer.write(FEATURES_MAGIC, 0, 'ascii');
  view.setUint8(4, FORMAT_VERSION);
  view.setUint32(5, n, true);
  view.setUint32(9, data.m, true);
  let offset = 13;
  for (let row = 0; row < n; row++) {
    view.setUint16(offset, idBytes[row].length, true);
    offset += 2;
    buffer.set(idBytes[row], offset);
    offset += idBytes[row].length;
    view.setInt32(offset, data.labels[row], true);
    offset += 4;
    offset = writeF32(view, offset,
                      data.features.subarray(row * data.m, (row + 1) * data.m));
  }
  writeFileSync(path, buffer);
  if (data.categoryNames !== undefined || provenance) {
    writeSidecar(path, data.categoryNames ?? [], provenance);
  }
}

/** Write a GSDH linear-head file: biases first, then weight rows. */
export function writeHead(data: HeadData, path: string): void {
  if (data.weights.length % data.m !== 0) {
    throw new Error(
      `weights hold ${data.weights.length} values, not a multiple of m=${data.m}`);
  }
  const n = data.weights.length / data.m;
  if (data.biases.length !== n) {
    throw new Error(`${n} weight rows but ${data.biases.length} biases`);
  }
  checkFinite(data.weights, 'weights');
  checkFinite(data.biases, 'biases');

  const size = 4 + 9 + 4 * n + 4 * n * data.m;
  const buffer = Buffer.alloc(size);
  const view = new DataView(buffer.buffer, buffer.byteOffset, size);
  buffer.write(HEAD_MAGIC, 0, 'ascii');
  view.setUint8(4, FORMAT_VERSION);
  view.setUint32(5, n, true);
  view.setUint32(9, data.m, true);
  let offset = writeF32(view, 13, data.biases);
  writeF32(view, offset, data.weights);
  writeFileSync(path, buffer);
}

/** Parse a GSDS signature stream (read-only; used to check primary output). */
export function readSignatures(buffer: Buffer): SignatureRecord[] {
  const view = new DataView(buffer.buffer, buffer.byteOffset, buffer.length);
  const records: SignatureRecord[] = [];
  let offset = 0;
  while (offset < buffer.length) {
    const magic = buffer.toString('ascii', offset, offset + 4);
    if (magic !== SIGNATURE_MAGIC) {
      throw new Error(`bad magic ${JSON.stringify(magic)} at record ${records.length}`);
    }
    offset += 4;
    const version = view.getUint8(offset);
    if (version !== FORMAT_VERSION) {
      throw new Error(`unsupported format version ${version}`);
    }
    const taxonomy = view.getUint8(offset + 1);
    const category = view.getInt32(offset + 2, true);
    const r = view.getUint32(offset + 6, true);
    const m = view.getUint32(offset + 10, true);
    const mPadded = view.getUint32(offset + 14, true);
    const p = view.getUint32(offset + 18, true);
    const q = view.getUint32(offset + 22, true);
    offset += 26;
    const idLen = view.getUint16(offset, true);
    offset += 2;
    const objectId =
      idLen > 0 ? buffer.toString('utf-8', offset, offset + idLen) : null;
    offset += idLen;
    const length = 2 * (mPadded / (r * r)) * 8;
    const values = new Float32Array(length);
    for (let i = 0; i < length; i++) {
      values[i] = view.getFloat32(offset, true);
      offset += 4;
    }
    records.push({ taxonomy, category, r, m, mPadded, p, q, objectId, values });
  }
  return records;
}
