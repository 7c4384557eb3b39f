/**
 * A small trainable digit classifier with a named feature layer.
 *
 * Dense 784 -> featureDim (relu) -> 10 (softmax). The relu outputs are the
 * activations "right before the softmax layer": the softmax layer's weights
 * applied to them give the class scores, so a linear head dumped from the
 * final layer reproduces the model's own Top-1 decisions exactly.
 */

import * as tf from '@tensorflow/tfjs';

export const N_DIGITS = 10;
export const FEATURE_LAYER = 'feature_layer';
export const HEAD_LAYER = 'head';

export interface TrainSettings {
  epochs: number;
  batchSize: number;
  learningRate: number;
  /** Seeds the weight initializers; training itself adds no randomness. */
  seed: number;
}

export function buildDigitModel(inputDim: number, featureDim: number,
                                seed: number): tf.Sequential {
  const model = tf.sequential();
  model.add(tf.layers.dense({
    inputShape: [inputDim],
    units: featureDim,
    activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed }),
    biasInitializer: 'zeros',
    name: FEATURE_LAYER,
  }));
  model.add(tf.layers.dense({
    units: N_DIGITS,
    activation: 'softmax',
    kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1 }),
    biasInitializer: 'zeros',
    name: HEAD_LAYER,
  }));
  return model;
}

/** Train in a fixed sample order; returns the final epoch's accuracy. */
export async function trainDigitModel(
  model: tf.Sequential, pixels: Float32Array, labels: Int32Array,
  inputDim: number, settings: TrainSettings,
): Promise<number> {
  const n = labels.length;
  const x = tf.tensor2d(pixels, [n, inputDim]);
  const y = tf.oneHot(tf.tensor1d(labels, 'int32'), N_DIGITS);
  model.compile({
    optimizer: tf.train.adam(settings.learningRate),
    loss: 'categoricalCrossentropy',
    metrics: ['accuracy'],
  });
  try {
    const history = await model.fit(x, y, {
      epochs: settings.epochs,
      batchSize: settings.batchSize,
      shuffle: false,
      verbose: 0,
    });
    const accuracy = history.history.acc;
    return Number(accuracy[accuracy.length - 1]);
  } finally {
    x.dispose();
    y.dispose();
  }
}
