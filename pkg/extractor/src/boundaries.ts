import { RgbImage } from './image.js'

export interface BoundaryMap {
  width: number
  height: number
  data: Float32Array // [0, 1], row-major
}

/**
 * Fallback boundary detector: color-gradient magnitude, normalized by the
 * map maximum so values land in [0, 1]. Central differences inside, one-
 * sided at the borders.
 */
export function colorGradientBoundary(img: RgbImage): BoundaryMap {
  const { width, height, data } = img
  const out = new Float32Array(width * height)
  let peak = 0
  for (let y = 0; y < height; y++) {
    const yUp = Math.max(y - 1, 0)
    const yDown = Math.min(y + 1, height - 1)
    for (let x = 0; x < width; x++) {
      const xLeft = Math.max(x - 1, 0)
      const xRight = Math.min(x + 1, width - 1)
      let mag = 0
      for (let c = 0; c < 3; c++) {
        const dx = data[3 * (y * width + xRight) + c] - data[3 * (y * width + xLeft) + c]
        const dy = data[3 * (yDown * width + x) + c] - data[3 * (yUp * width + x) + c]
        mag += dx * dx + dy * dy
      }
      const v = Math.sqrt(mag)
      out[y * width + x] = v
      if (v > peak) peak = v
    }
  }
  if (peak > 0) {
    for (let i = 0; i < out.length; i++) {
      out[i] = Math.min(out[i] / peak, 1)
    }
  }
  return { width, height, data: out }
}
