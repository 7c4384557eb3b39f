/**
 * End-to-end dump: train the digit model, run batch inference, and write
 * its feature-layer activations and final-layer parameters as interchange
 * files the primary package reads bit-exactly.
 */

import { mkdirSync, writeFileSync } from 'node:fs';
import { join } from 'node:path';

import * as tf from '@tensorflow/tfjs';

import { BUNDLED_DATASET, IMAGE_PIXELS, loadDigits } from './data.js';
import { writeFeatureSet, writeHead } from './interchange.js';
import {
  FEATURE_LAYER,
  HEAD_LAYER,
  N_DIGITS,
  TrainSettings,
  buildDigitModel,
  trainDigitModel,
} from './model.js';

export const VERSION = '0.1.0';

export interface ExtractionJob {
  /** Model identifier recorded in the manifest. */
  modelName: string;
  /** Image source; only the bundled digit set is supported. */
  datasetPath?: string;
  /** Digit values to dump, each 0..9. */
  categories: number[];
  /** Images per digit, taken in index order. */
  perCategory: number;
  /** Directory receiving features.bin, head.bin, and manifest.json. */
  outDir: string;
  /** Inference batch size. */
  batchSize: number;
  /** Declared feature dimensionality; must match the layer's width. */
  featureDim: number;
  /** Layer whose activations are dumped (default feature_layer). */
  layerName?: string;
  train: TrainSettings;
}

export interface ExtractionResult {
  featuresPath: string;
  headPath: string;
  manifestPath: string;
  nObjects: number;
  m: number;
  trainAccuracy: number;
  /** Row ids, in file order. */
  ids: string[];
  /** The model's own Top-1 prediction for each dumped row. */
  predictions: Int32Array;
}

/** Train, extract activations, and write the interchange files. */
export async function extract(job: ExtractionJob): Promise<ExtractionResult> {
  if (job.batchSize < 1) {
    throw new Error(`batch size must be positive, got ${job.batchSize}`);
  }
  const layerName = job.layerName ?? FEATURE_LAYER;
  const batch = loadDigits(job.categories, job.perCategory,
                           job.datasetPath ?? BUNDLED_DATASET);
  const n = batch.labels.length;

  const model = buildDigitModel(IMAGE_PIXELS, job.featureDim, job.train.seed);
  try {
    const layer = model.getLayer(layerName);
    const width = layer.outputShape[layer.outputShape.length - 1];
    if (width !== job.featureDim) {
      throw new Error(
        `layer ${layerName} is ${width} wide, job declares ${job.featureDim}`);
    }

    const trainAccuracy = await trainDigitModel(
      model, batch.pixels, batch.labels, IMAGE_PIXELS, job.train);
    const featureModel = tf.model({
      inputs: model.inputs,
      outputs: layer.output as tf.SymbolicTensor,
    });

    const x = tf.tensor2d(batch.pixels, [n, IMAGE_PIXELS]);
    let features: Float32Array;
    let predictions: Int32Array;
    try {
      const activations = featureModel.predict(
        x, { batchSize: job.batchSize }) as tf.Tensor;
      const scores = model.predict(x, { batchSize: job.batchSize }) as tf.Tensor;
      const top1 = scores.argMax(1);
      features = new Float32Array(await activations.data());
      predictions = new Int32Array(await top1.data());
      activations.dispose();
      scores.dispose();
      top1.dispose();
    } finally {
      x.dispose();
    }

    const headLayer = model.getLayer(HEAD_LAYER);
    const [kernel, bias] = headLayer.getWeights();
    const rowMajor = kernel.transpose();
    const weights = new Float32Array(await rowMajor.data());
    const biases = new Float32Array(await bias.data());
    rowMajor.dispose();

    mkdirSync(job.outDir, { recursive: true });
    const featuresPath = join(job.outDir, 'features.bin');
    const headPath = join(job.outDir, 'head.bin');
    const manifestPath = join(job.outDir, 'manifest.json');
    writeFeatureSet(
      {
        ids: batch.ids,
        labels: batch.labels,
        features,
        m: job.featureDim,
        categoryNames: batch.categoryNames,
      },
      featuresPath,
      `${job.modelName} ${layerName} activations`,
    );
    writeHead({ weights, biases, m: job.featureDim }, headPath);
    const manifest = {
      categories: job.categories,
      dataset: job.datasetPath ?? BUNDLED_DATASET,
      layer: layerName,
      model: job.modelName,
      n_categories: N_DIGITS,
      outputs: ['features.bin', 'head.bin'],
      per_category: job.perCategory,
      train: {
        accuracy: trainAccuracy,
        batch_size: job.train.batchSize,
        epochs: job.train.epochs,
        learning_rate: job.train.learningRate,
        seed: job.train.seed,
      },
      version: VERSION,
    };
    writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n');

    return {
      featuresPath,
      headPath,
      manifestPath,
      nObjects: n,
      m: job.featureDim,
      trainAccuracy,
      ids: batch.ids,
      predictions,
    };
  } finally {
    model.dispose();
  }
}
