export { parseCsv, requireColumns, CsvContractError } from "./csv";
export { renderFig2, parseMinima, FIG2_COLUMNS } from "./fig2";
export { renderSeries, SERIES_COLUMNS } from "./series";
export { run } from "./cli";
