#!/usr/bin/env node
/**
 * Command-line wrapper: train the digit model and dump its feature layer.
 *
 *   extract-digits --out-dir dump [--categories 0,1,2] [--per-category 80]
 */

import { parseArgs } from 'node:util';

import { extract } from './extract.js';

export async function main(argv: string[]): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        'out-dir': { type: 'string' },
        model: { type: 'string', default: 'digits-dense-512' },
        categories: { type: 'string', default: '0,1,2,3,4,5,6,7,8,9' },
        'per-category': { type: 'string', default: '80' },
        'batch-size': { type: 'string', default: '64' },
        'feature-dim': { type: 'string', default: '512' },
        layer: { type: 'string', default: 'feature_layer' },
        epochs: { type: 'string', default: '6' },
        'learning-rate': { type: 'string', default: '0.002' },
        seed: { type: 'string', default: '0' },
      },
    }));
  } catch (error) {
    console.error(`extract-digits: ${(error as Error).message}`);
    return 1;
  }
  if (!values['out-dir']) {
    console.error('extract-digits: --out-dir is required');
    return 1;
  }
  try {
    const result = await extract({
      modelName: values.model,
      categories: values.categories.split(',').map(Number),
      perCategory: Number(values['per-category']),
      outDir: values['out-dir'],
      batchSize: Number(values['batch-size']),
      featureDim: Number(values['feature-dim']),
      layerName: values.layer,
      train: {
        epochs: Number(values.epochs),
        batchSize: Number(values['batch-size']),
        learningRate: Number(values['learning-rate']),
        seed: Number(values.seed),
      },
    });
    console.log(
      `wrote ${result.nObjects} x ${result.m} features and the head to ` +
      `${values['out-dir']} (train accuracy ${result.trainAccuracy.toFixed(3)})`);
    return 0;
  } catch (error) {
    console.error(`extract-digits: ${(error as Error).message}`);
    return 1;
  }
}

const entry = process.argv[1] ?? '';
if (entry.endsWith('cli.js') || entry.endsWith('extract-digits')) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
