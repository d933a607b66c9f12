/** Column orders of the simulator's headerless txt outputs. */

export const GENERAL_COLUMNS = [
  "month",
  "price_index",
  "gdp_index",
  "unemployment",
  "average_workers",
  "families_wealth",
  "families_savings",
  "firms_wealth",
  "firms_profit",
  "gini_index",
  "average_utility",
] as const;

export const REGIONAL_COLUMNS = [
  "month",
  "region_id",
  "commuting",
  "pop",
  "gdp_region",
  "regional_gini",
  "regional_unemployment",
  "qli_index",
  "gdp_percapta",
  "treasure",
] as const;

/** Measures plotted from the general file (everything but the month). */
export const GENERAL_MEASURES = GENERAL_COLUMNS.slice(1);

/** Measures plotted per region from the regional file. */
export const REGIONAL_MEASURES = REGIONAL_COLUMNS.filter(
  (c) => c !== "month" && c !== "region_id",
);

export type GeneralMeasure = (typeof GENERAL_MEASURES)[number];
export type RegionalMeasure = (typeof REGIONAL_MEASURES)[number];
