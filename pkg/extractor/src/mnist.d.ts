declare module 'mnist' {
  interface DigitSet {
    length: number;
    /** The sample at `index` as 784 floats in [0, 1]; random if omitted. */
    get(index?: number): number[];
  }

  const mnist: Record<number, DigitSet> & {
    set(training: number, test: number): unknown;
  };
  export default mnist;
}
