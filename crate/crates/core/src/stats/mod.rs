//! Descriptive market statistics: rolling volume series, price percentiles,
//! power-law tail fits and primary/secondary sale dynamics.

mod percentiles;
mod powerlaw;
mod rolling;
mod timelines;

pub use percentiles::{price_percentiles, quantile_lower, PercentileRow, REPORTED_PERCENTILES};
pub use powerlaw::{fit_power_law, hurwitz_zeta, FitOptions, PowerLawFit, TailKind, MIN_TAIL};
pub use rolling::{rolling_series, DailyRow, RollingOptions, TimeSeriesReport, TOTAL_GROUP};
pub use timelines::{
    resale_fraction_curve, sale_timelines, summarize_timelines, Cohort, ResalePoint, Sale, SaleTimeline,
    TimelineSummary, YearBelowPrimary,
};
