import { spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import { beforeAll, describe, expect, it } from 'vitest';

import { loadDigits } from '../src/data.js';
import { ExtractionJob, ExtractionResult, extract } from '../src/extract.js';
import { readSignatures } from '../src/interchange.js';

const JOB: Omit<ExtractionJob, 'outDir'> = {
  modelName: 'digits-dense-512',
  categories: [0, 1, 2, 3, 4, 5, 6, 7, 8, 9],
  perCategory: 80,
  batchSize: 64,
  featureDim: 512,
  train: { epochs: 6, batchSize: 64, learningRate: 0.002, seed: 0 },
};

function gsdp(...args: string[]) {
  const run = spawnSync('gsdp', args, { encoding: 'utf-8' });
  if (run.error) {
    throw run.error;
  }
  return run;
}

describe('extraction dump', () => {
  let outDir: string;
  let result: ExtractionResult;

  beforeAll(async () => {
    outDir = mkdtempSync(join(tmpdir(), 'extract-'));
    result = await extract({ ...JOB, outDir });
  });

  it('dumps one row per image with the declared width', () => {
    expect(result.nObjects).toBe(800);
    expect(result.m).toBe(512);
    const header = readFileSync(result.featuresPath).subarray(0, 13);
    expect(header.toString('ascii', 0, 4)).toBe('GSDF');
    expect(header.readUInt32LE(5)).toBe(800);
    expect(header.readUInt32LE(9)).toBe(512);
  });

  it('learns the digits well enough to be useful', () => {
    expect(result.trainAccuracy).toBeGreaterThan(0.85);
  });

  it('records the model identifier and layer name in the manifest', () => {
    const manifest = JSON.parse(readFileSync(result.manifestPath, 'utf-8'));
    expect(manifest.model).toBe('digits-dense-512');
    expect(manifest.layer).toBe('feature_layer');
    expect(manifest.outputs).toEqual(['features.bin', 'head.bin']);
  });

  it('is accepted by the primary prototype command with zero warnings', () => {
    const protos = join(outDir, 'protos.bin');
    const run = gsdp('prototype', '--features', result.featuresPath,
                     '--head', result.headPath, '--out', protos);
    expect(run.status).toBe(0);
    const manifest = JSON.parse(
      readFileSync(join(outDir, 'protos.manifest.json'), 'utf-8'));
    expect(manifest.warnings).toBe(0);
    expect(manifest.skipped_categories).toEqual([]);
  });

  it('yields length-32 signatures for the 512-dim layer at r=16', () => {
    const sigs = join(outDir, 'sigs.bin');
    const run = gsdp('describe', '--features', result.featuresPath,
                     '--prototypes', join(outDir, 'protos.bin'),
                     '--r', '16', '--out', sigs);
    expect(run.status).toBe(0);
    const records = readSignatures(readFileSync(sigs));
    expect(records).toHaveLength(800);
    for (const record of records) {
      expect(record.values).toHaveLength(32);
      expect(record.m).toBe(512);
    }
  });

  it('ranks most-typical members that the model itself got right', () => {
    const csv = join(outDir, 'rank.csv');
    const run = gsdp('rank', '--features', result.featuresPath,
                     '--prototypes', join(outDir, 'protos.bin'),
                     '--category', '0', '--k', '5', '--out', csv);
    expect(run.status).toBe(0);
    const rows = readFileSync(csv, 'utf-8').trim().split('\n').slice(1);
    const topIds = rows.slice(0, 5).map((row) => row.split(',')[0]);
    expect(topIds).toHaveLength(5);
    for (const id of topIds) {
      const index = result.ids.indexOf(id);
      expect(index).toBeGreaterThanOrEqual(0);
      expect(result.predictions[index]).toBe(0);
    }
  });

  it('passes the primary property suites end to end', () => {
    const run = gsdp('verify', '--features', result.featuresPath,
                     '--head', result.headPath);
    expect(run.status).toBe(0);
    expect(run.stdout).toContain('6/6 property suites passed');
  });

  it('re-runs byte-identically on identical inputs', async () => {
    const againDir = mkdtempSync(join(tmpdir(), 'extract-again-'));
    const again = await extract({ ...JOB, outDir: againDir });
    expect(readFileSync(again.featuresPath)
      .equals(readFileSync(result.featuresPath))).toBe(true);
    expect(readFileSync(again.headPath)
      .equals(readFileSync(result.headPath))).toBe(true);
  });
});

describe('job validation', () => {
  it('rejects a layer whose width differs from the declared one', async () => {
    const outDir = mkdtempSync(join(tmpdir(), 'extract-'));
    await expect(extract({ ...JOB, outDir, layerName: 'head' }))
      .rejects.toThrow('10 wide');
  });

  it('rejects unknown layers and datasets without training', async () => {
    const outDir = mkdtempSync(join(tmpdir(), 'extract-'));
    await expect(extract({ ...JOB, outDir, layerName: 'missing' }))
      .rejects.toThrow();
    await expect(extract({ ...JOB, outDir, datasetPath: '/nope' }))
      .rejects.toThrow('only mnist:bundled');
  });

  it('caps the per-digit request at the bundled sample count', () => {
    expect(() => loadDigits([4], 100000)).toThrow('fewer than');
  });

  it('dumps category subsets with original digit labels', async () => {
    const outDir = mkdtempSync(join(tmpdir(), 'extract-subset-'));
    const result = await extract({
      ...JOB,
      outDir,
      categories: [3, 7],
      perCategory: 5,
      train: { ...JOB.train, epochs: 1 },
    });
    expect(result.nObjects).toBe(10);
    expect(result.ids[0]).toBe('digit3-0000');
    expect(result.ids[5]).toBe('digit7-0000');
    const buffer = readFileSync(result.featuresPath);
    expect(buffer.readUInt32LE(5)).toBe(10);
  });
});
