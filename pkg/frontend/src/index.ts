export { parseCsv, requireHeader } from "./csv.js";
export {
  RIDGE_SHIFT_HEADER,
  SCATTER_HEADER,
  SWEEP_HEADER,
  render,
  renderScatter,
  renderShiftCurves,
  renderSweepPanels,
  renderText,
} from "./figures.js";
export type { FigureKind, FigureSpec } from "./figures.js";
