/** Error taxonomy shared by the library and both CLIs.
 *
 * Exit codes mirror the simulator's convention: 2 for anything the
 * caller asked for that does not exist or does not parse (columns,
 * fields, colormaps, flags), 3 for malformed input files, 4 for files
 * that cannot be read at all.
 */

export class ViewerError extends Error {
  readonly exitCode: number = 1;
}

/** Bad request: unknown column, field, colormap, or malformed flags. */
export class UsageError extends ViewerError {
  override readonly exitCode = 2;
}

/** Structurally invalid snapshot or CSV contents. */
export class FormatError extends ViewerError {
  override readonly exitCode = 3;
}

/** The file could not be read from disk. */
export class InputError extends ViewerError {
  override readonly exitCode = 4;
}
