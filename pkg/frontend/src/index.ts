export { COLORMAPS, colormapStops, sampleColormap, type Rgb } from "./colormap.js";
export {
  CSV_COLUMNS,
  columnValues,
  parseDiagnostics,
  readDiagnosticsFile,
  type DiagnosticsTable,
} from "./diagnostics.js";
export { FormatError, InputError, UsageError, ViewerError } from "./errors.js";
export {
  autoScale,
  fieldImage,
  renderSnapshotField,
  type HeatmapOptions,
} from "./heatmap.js";
export { findIncreases, lineChartSvg, type LineChart, type LineChartOptions } from "./linechart.js";
export { crc32, encodePng, type RgbImage } from "./png.js";
export {
  plotDiagnostics,
  renderSnapshotToFile,
  runPlots,
  type PlotOutcome,
  type PlotSpec,
} from "./plots.js";
export {
  MAGIC,
  VERSION,
  decodeSnapshot,
  describeSnapshot,
  encodeSnapshot,
  readSnapshotFile,
  type Snapshot,
} from "./snapshot.js";
