/**
 * Deterministic access to the bundled handwritten-digit images.
 *
 * The `mnist` package ships roughly a thousand 28x28 grayscale samples per
 * digit as plain arrays. Samples are taken in index order, so the same job
 * always sees the same pixels.
 */

import mnist from 'mnist';

export const IMAGE_PIXELS = 28 * 28;

export const BUNDLED_DATASET = 'mnist:bundled';

export interface DigitBatch {
  /** Stable per-image ids like digit3-0017. */
  ids: string[];
  /** The digit value of each image. */
  labels: Int32Array;
  /** Row-major n x 784 pixel intensities in [0, 1]. */
  pixels: Float32Array;
  /** Names indexed by label value, digit-0 through digit-9. */
  categoryNames: string[];
}

export function availablePerDigit(): number {
  let smallest = Infinity;
  for (let digit = 0; digit <= 9; digit++) {
    smallest = Math.min(smallest, mnist[digit].length);
  }
  return smallest;
}

/**
 * Load the first `perCategory` samples of each requested digit.
 *
 * Rows are grouped by digit in the order given; ids carry the digit value
 * and the sample index so reruns are reproducible.
 */
export function loadDigits(categories: number[], perCategory: number,
                           datasetPath: string = BUNDLED_DATASET): DigitBatch {
  if (datasetPath !== BUNDLED_DATASET) {
    throw new Error(
      `dataset ${datasetPath} not found; only ${BUNDLED_DATASET} is supported`);
  }
  if (categories.length === 0) {
    throw new Error('at least one digit category is required');
  }
  for (const digit of categories) {
    if (!Number.isInteger(digit) || digit < 0 || digit > 9) {
      throw new Error(`digit categories must be integers 0..9, got ${digit}`);
    }
    if (mnist[digit].length < perCategory) {
      throw new Error(
        `digit ${digit} has ${mnist[digit].length} samples, ` +
        `fewer than the ${perCategory} requested`);
    }
  }
  const seen = new Set(categories);
  if (seen.size !== categories.length) {
    throw new Error('digit categories must be unique');
  }

  const n = categories.length * perCategory;
  const ids: string[] = [];
  const labels = new Int32Array(n);
  const pixels = new Float32Array(n * IMAGE_PIXELS);
  let row = 0;
  for (const digit of categories) {
    for (let index = 0; index < perCategory; index++, row++) {
      ids.push(`digit${digit}-${String(index).padStart(4, '0')}`);
      labels[row] = digit;
      pixels.set(mnist[digit].get(index), row * IMAGE_PIXELS);
    }
  }
  const categoryNames = Array.from({ length: 10 }, (_, d) => `digit-${d}`);
  return { ids, labels, pixels, categoryNames };
}
