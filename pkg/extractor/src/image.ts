import * as fs from 'fs'
import * as path from 'path'
import * as jpeg from 'jpeg-js'
import { PNG } from 'pngjs'

/** RGB image as float channels in [0, 1], row-major, interleaved. */
export interface RgbImage {
  width: number
  height: number
  data: Float32Array // length = width * height * 3
}

function fromRgba(width: number, height: number, rgba: Uint8Array): RgbImage {
  const data = new Float32Array(width * height * 3)
  for (let p = 0; p < width * height; p++) {
    data[3 * p] = rgba[4 * p] / 255
    data[3 * p + 1] = rgba[4 * p + 1] / 255
    data[3 * p + 2] = rgba[4 * p + 2] / 255
  }
  return { width, height, data }
}

export function decodeImage(filePath: string): RgbImage {
  const buf = fs.readFileSync(filePath)
  const ext = path.extname(filePath).toLowerCase()
  if (ext === '.png') {
    const png = PNG.sync.read(buf)
    return fromRgba(png.width, png.height, png.data)
  }
  if (ext === '.jpg' || ext === '.jpeg') {
    const img = jpeg.decode(buf, { useTArray: true, maxMemoryUsageInMB: 1024 })
    return fromRgba(img.width, img.height, img.data)
  }
  throw new Error(`unsupported image format: ${filePath}`)
}

export function encodePng(img: RgbImage): Buffer {
  const png = new PNG({ width: img.width, height: img.height })
  for (let p = 0; p < img.width * img.height; p++) {
    png.data[4 * p] = Math.round(img.data[3 * p] * 255)
    png.data[4 * p + 1] = Math.round(img.data[3 * p + 1] * 255)
    png.data[4 * p + 2] = Math.round(img.data[3 * p + 2] * 255)
    png.data[4 * p + 3] = 255
  }
  return PNG.sync.write(png)
}

/** Bilinear resize with the align-corners-false pixel model. */
export function resizeBilinear(img: RgbImage, outWidth: number, outHeight: number): RgbImage {
  const { width, height, data } = img
  const out = new Float32Array(outWidth * outHeight * 3)
  for (let oy = 0; oy < outHeight; oy++) {
    let sy = (oy + 0.5) * (height / outHeight) - 0.5
    sy = Math.min(Math.max(sy, 0), height - 1)
    const y0 = Math.floor(sy)
    const y1 = Math.min(y0 + 1, height - 1)
    const ty = sy - y0
    for (let ox = 0; ox < outWidth; ox++) {
      let sx = (ox + 0.5) * (width / outWidth) - 0.5
      sx = Math.min(Math.max(sx, 0), width - 1)
      const x0 = Math.floor(sx)
      const x1 = Math.min(x0 + 1, width - 1)
      const tx = sx - x0
      for (let c = 0; c < 3; c++) {
        const g00 = data[3 * (y0 * width + x0) + c]
        const g01 = data[3 * (y0 * width + x1) + c]
        const g10 = data[3 * (y1 * width + x0) + c]
        const g11 = data[3 * (y1 * width + x1) + c]
        const top = g00 + tx * (g01 - g00)
        const bottom = g10 + tx * (g11 - g10)
        out[3 * (oy * outWidth + ox) + c] = top + ty * (bottom - top)
      }
    }
  }
  return { width: outWidth, height: outHeight, data: out }
}
