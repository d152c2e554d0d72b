import * as fs from 'fs'

/**
 * Binary tensor container shared with the engine: ASCII magic "CCFT",
 * version byte (1), dtype byte (1 = float32 little-endian), ndim byte, one
 * zero pad byte, ndim u32 little-endian extents, row-major payload.
 */

export interface Tensor {
  dims: number[]
  data: Float32Array
}

const MAGIC = 'CCFT'
const VERSION = 1
const DTYPE_FLOAT32 = 1

const HOST_IS_LE = new Uint8Array(new Uint32Array([1]).buffer)[0] === 1

export function encodeTensor(dims: number[], data: Float32Array): Buffer {
  if (dims.length === 0 || dims.length > 255) {
    throw new Error(`bad ndim ${dims.length}`)
  }
  const count = dims.reduce((a, b) => a * b, 1)
  if (dims.some((d) => d < 1 || d > 0xffffffff)) {
    throw new Error(`bad extents ${dims}`)
  }
  if (count !== data.length) {
    throw new Error(`payload ${data.length} != product of dims ${count}`)
  }
  for (const v of data) {
    if (!Number.isFinite(v)) throw new Error('tensor holds NaN or Inf')
  }
  const header = Buffer.alloc(8 + 4 * dims.length)
  header.write(MAGIC, 0, 'ascii')
  header.writeUInt8(VERSION, 4)
  header.writeUInt8(DTYPE_FLOAT32, 5)
  header.writeUInt8(dims.length, 6)
  header.writeUInt8(0, 7)
  dims.forEach((d, i) => header.writeUInt32LE(d, 8 + 4 * i))

  let payload: Buffer
  if (HOST_IS_LE) {
    payload = Buffer.from(data.buffer, data.byteOffset, data.byteLength)
  } else {
    payload = Buffer.alloc(4 * data.length)
    const view = new DataView(payload.buffer, payload.byteOffset)
    data.forEach((v, i) => view.setFloat32(4 * i, v, true))
  }
  return Buffer.concat([header, payload])
}

export function decodeTensor(buf: Buffer): Tensor {
  if (buf.length < 8 || buf.toString('ascii', 0, 4) !== MAGIC) {
    throw new Error('not a CCFT tensor')
  }
  if (buf.readUInt8(4) !== VERSION) throw new Error('unsupported version')
  if (buf.readUInt8(5) !== DTYPE_FLOAT32) throw new Error('unsupported dtype')
  if (buf.readUInt8(7) !== 0) throw new Error('corrupt header padding')
  const ndim = buf.readUInt8(6)
  if (ndim === 0) throw new Error('tensor declares zero dims')
  if (buf.length < 8 + 4 * ndim) throw new Error('truncated extents')
  const dims: number[] = []
  for (let i = 0; i < ndim; i++) dims.push(buf.readUInt32LE(8 + 4 * i))
  if (dims.some((d) => d === 0)) throw new Error(`zero extent in ${dims}`)
  const count = dims.reduce((a, b) => a * b, 1)
  const offset = 8 + 4 * ndim
  if (buf.length - offset !== 4 * count) {
    throw new Error(`payload size ${buf.length - offset} != ${4 * count}`)
  }
  const data = new Float32Array(count)
  const view = new DataView(buf.buffer, buf.byteOffset + offset, 4 * count)
  for (let i = 0; i < count; i++) {
    const v = view.getFloat32(4 * i, true)
    if (!Number.isFinite(v)) throw new Error('tensor holds NaN or Inf')
    data[i] = v
  }
  return { dims, data }
}

export function saveTensor(path: string, dims: number[], data: Float32Array): void {
  fs.writeFileSync(path, encodeTensor(dims, data))
}

export function loadTensor(path: string): Tensor {
  return decodeTensor(fs.readFileSync(path))
}
