#pragma once

#include <set>
#include <string>
#include <vector>

#include "dfp/core.hpp"

namespace dfp {

struct HourStamp {
  Date date;
  int hour = 0;  // 0..23
  auto operator<=>(const HourStamp&) const = default;
};

long hours_from_epoch(const HourStamp& h);
HourStamp stamp_from_hours(long hours);
/// "YYYY-MM-DDTHH:00"
std::string to_string(const HourStamp& h);
HourStamp parse_hour_stamp(const std::string& text);

struct HourRow {
  HourStamp stamp;
  double price = 0.0;        // $/MWh
  double load = 0.0;         // MW
  double temperature = 0.0;  // degrees C
};

/// Hourly series with strictly increasing timestamps. Gaps are allowed until
/// clean_series has run.
struct RawHourlySeries {
  std::vector<HourRow> rows;
};

/// Ordered feature blocks for one prediction day d:
///   past-day price (24, optional), past-day load (24),
///   past-day temperature (24), past-day temperature^2 (24),
///   prediction-day temperature (24), prediction-day temperature^2 (24),
///   is_weekend (1), is_holiday (1), day_of_year/366 (1).
struct FeatureLayout {
  bool include_past_price = true;
  int dim() const { return include_past_price ? 147 : 123; }
};

/// CSV schema: header `timestamp,price_usd_mwh,load_mw,temperature_c`,
/// ISO-8601 hour stamps, decimal point, LF line endings.
RawHourlySeries load_hourly_csv(const std::string& path);
RawHourlySeries parse_hourly_csv(const std::string& content);
std::string hourly_csv_string(const RawHourlySeries& series);
void write_hourly_csv(const RawHourlySeries& series, const std::string& path);

/// Fills gaps up to max_gap hours by per-column linear interpolation and
/// replaces price outliers (|z| > 5 on log price within a rolling 30-day
/// window; nonpositive prices count as outliers since the pipeline models
/// log price). Longer gaps raise DataError.
RawHourlySeries clean_series(const RawHourlySeries& raw, int max_gap);

/// One sample per day from the second day on (the first day is history
/// only). Emitted features are raw; standardization happens downstream.
std::vector<DaySample> build_day_samples(const RawHourlySeries& series,
                                         const FeatureLayout& layout,
                                         const std::set<Date>& holidays);

struct Standardizer {
  Vec mean;
  Vec stddev;  // floored at 1e-8
  Vec apply(const Vec& raw) const;
};

/// Per-feature mean and stddev over the given samples only. Call it on the
/// training split; validation and test must reuse those statistics.
Standardizer fit_standardizer(const std::vector<DaySample>& train_samples);

std::vector<DaySample> apply_standardizer(const std::vector<DaySample>& samples,
                                          const Standardizer& s);

enum class NoiseProfile { uniform, afternoon_heavy };

/// Seeded synthetic stand-in for a real price/load/temperature feed. Load
/// and temperature follow smooth seasonal and daily harmonics plus AR(1)
/// noise; log price is affine in (previous-day load, temperature^2) plus
/// AR(1) noise, so with noise_scale == 0 the day-ahead target is exactly
/// linear in the feature blocks. The afternoon_heavy profile triples the
/// price-noise stddev during hours 12..16. Starts at 2021-01-01.
RawHourlySeries generate_synthetic(int days, std::uint64_t seed,
                                   NoiseProfile profile,
                                   double noise_scale = 1.0);

std::set<Date> load_holiday_file(const std::string& path);

}  // namespace dfp
