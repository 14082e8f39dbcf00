/** Reader and writer for the simulator's binary snapshot format.
 *
 * This is an independent implementation working purely from the layout
 * (all integers and floats little-endian):
 *
 *     magic   4 bytes ASCII "ENPP"
 *     version u16, currently 1
 *     n       u32 grid points per side
 *     time    f64
 *     count   u16 number of fields
 *     then per field:
 *         name_len u8, ASCII name, n*n f64 values row-major
 *
 * Row-major means values[i*n + j] is the node at x1 = i*h, x2 = j*h.
 * The reader is strict in the same places the producer's reader is:
 * wrong magic or version, truncation, non-ASCII or duplicate field
 * names, and trailing bytes are all format errors.
 */

import * as fs from "node:fs";

import { FormatError, InputError } from "./errors.js";

export const MAGIC = "ENPP";
export const VERSION = 1;

const HEADER_BYTES = 4 + 2 + 4 + 8 + 2;

export interface Snapshot {
  time: number;
  nPoints: number;
  /** Field name -> row-major values, in file order. */
  fields: Map<string, Float64Array>;
}

class Cursor {
  pos = 0;
  readonly view: DataView;

  constructor(readonly raw: Uint8Array) {
    this.view = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
  }

  need(count: number, what: string): number {
    if (this.pos + count > this.raw.length) {
      throw new FormatError(
        `truncated snapshot: needed ${count} bytes for ${what}, ` +
          `had ${this.raw.length - this.pos}`,
      );
    }
    const at = this.pos;
    this.pos += count;
    return at;
  }

  u8(what: string): number {
    return this.view.getUint8(this.need(1, what));
  }

  u16(what: string): number {
    return this.view.getUint16(this.need(2, what), true);
  }

  u32(what: string): number {
    return this.view.getUint32(this.need(4, what), true);
  }

  f64(what: string): number {
    return this.view.getFloat64(this.need(8, what), true);
  }

  ascii(count: number, what: string): string {
    const at = this.need(count, what);
    let out = "";
    for (let i = 0; i < count; i++) {
      const byte = this.raw[at + i];
      if (byte > 0x7f) {
        throw new FormatError(`${what} is not ASCII`);
      }
      out += String.fromCharCode(byte);
    }
    return out;
  }
}

export function decodeSnapshot(raw: Uint8Array): Snapshot {
  const cur = new Cursor(raw);
  const magic = cur.ascii(4, "magic");
  if (magic !== MAGIC) {
    throw new FormatError(`bad magic ${JSON.stringify(magic)}, expected "${MAGIC}"`);
  }
  const version = cur.u16("version");
  if (version !== VERSION) {
    throw new FormatError(`unsupported snapshot version ${version}`);
  }
  const nPoints = cur.u32("grid size");
  const time = cur.f64("time");
  const count = cur.u16("field count");
  const valuesPerField = nPoints * nPoints;

  const fields = new Map<string, Float64Array>();
  for (let index = 0; index < count; index++) {
    const nameLen = cur.u8(`name length of field ${index}`);
    const name = cur.ascii(nameLen, `name of field ${index}`);
    if (fields.has(name)) {
      throw new FormatError(`duplicate field name "${name}"`);
    }
    const at = cur.need(8 * valuesPerField, `values of field "${name}"`);
    const values = new Float64Array(valuesPerField);
    for (let i = 0; i < valuesPerField; i++) {
      values[i] = cur.view.getFloat64(at + 8 * i, true);
    }
    fields.set(name, values);
  }
  if (cur.pos !== raw.length) {
    throw new FormatError(`${raw.length - cur.pos} trailing bytes after last field`);
  }
  return { time, nPoints, fields };
}

export function encodeSnapshot(snap: Snapshot): Buffer {
  let total = HEADER_BYTES;
  for (const [name, values] of snap.fields) {
    if (name.length < 1 || name.length > 255 || !/^[\x00-\x7f]+$/.test(name)) {
      throw new FormatError(`field name ${JSON.stringify(name)} does not fit the format`);
    }
    if (values.length !== snap.nPoints * snap.nPoints) {
      throw new FormatError(
        `field "${name}" has ${values.length} values, expected ` +
          `${snap.nPoints * snap.nPoints}`,
      );
    }
    total += 1 + name.length + 8 * values.length;
  }

  const out = Buffer.alloc(total);
  out.write(MAGIC, 0, "ascii");
  out.writeUInt16LE(VERSION, 4);
  out.writeUInt32LE(snap.nPoints, 6);
  out.writeDoubleLE(snap.time, 10);
  out.writeUInt16LE(snap.fields.size, 18);
  let pos = HEADER_BYTES;
  for (const [name, values] of snap.fields) {
    out.writeUInt8(name.length, pos);
    pos += 1;
    out.write(name, pos, "ascii");
    pos += name.length;
    for (let i = 0; i < values.length; i++) {
      out.writeDoubleLE(values[i], pos);
      pos += 8;
    }
  }
  return out;
}

export function readSnapshotFile(path: string): Snapshot {
  let raw: Buffer;
  try {
    raw = fs.readFileSync(path);
  } catch (err) {
    throw new InputError(`cannot read snapshot ${path}: ${(err as Error).message}`);
  }
  return decodeSnapshot(raw);
}

/** Names plus shape, for error messages and CLI listings. */
export function describeSnapshot(snap: Snapshot): string {
  const names = [...snap.fields.keys()].join(", ");
  return `t = ${snap.time}, ${snap.nPoints}x${snap.nPoints}, fields: ${names}`;
}
