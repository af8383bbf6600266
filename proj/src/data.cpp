#include "dfp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dfp/json_io.hpp"
#include "dfp/rng.hpp"

namespace dfp {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr char kCsvHeader[] = "timestamp,price_usd_mwh,load_mw,temperature_c";
}  // namespace

long hours_from_epoch(const HourStamp& h) {
  return days_from_civil(h.date) * 24 + h.hour;
}

HourStamp stamp_from_hours(long hours) {
  long d = hours / 24;
  int h = static_cast<int>(hours % 24);
  if (h < 0) {
    h += 24;
    --d;
  }
  return HourStamp{civil_from_days(d), h};
}

std::string to_string(const HourStamp& h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00", h.date.year,
                h.date.month, h.date.day, h.hour);
  return buf;
}

HourStamp parse_hour_stamp(const std::string& text) {
  int y, mo, d, h, mi;
  char t;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d", &y, &mo, &d, &t, &h,
                  &mi) != 6 ||
      t != 'T' || mi != 0 || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 ||
      h > 23)
    throw DataError("bad hour stamp: '" + text + "'");
  return HourStamp{Date{y, mo, d}, h};
}

RawHourlySeries parse_hourly_csv(const std::string& content) {
  RawHourlySeries out;
  std::size_t pos = 0;
  long line_no = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= content.size()) return false;
    const std::size_t nl = content.find('\n', pos);
    line = content.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? content.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no;
    return true;
  };

  std::string line;
  if (!next_line(line) || line != kCsvHeader)
    throw DataError(std::string("expected CSV header '") + kCsvHeader + "'");

  auto parse_number = [&](const std::string& field) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size() || field.empty() ||
        !std::isfinite(v))
      throw DataError("line " + std::to_string(line_no) + ": bad number '" +
                      field + "'");
    return v;
  };

  while (next_line(line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 4)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 4 fields, got " +
                      std::to_string(fields.size()));
    HourRow row;
    try {
      row.stamp = parse_hour_stamp(fields[0]);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    row.price = parse_number(fields[1]);
    row.load = parse_number(fields[2]);
    row.temperature = parse_number(fields[3]);
    if (!out.rows.empty()) {
      const auto& prev = out.rows.back().stamp;
      if (row.stamp == prev)
        throw DataError("duplicate timestamp " + to_string(row.stamp));
      if (row.stamp < prev)
        throw DataError("non-monotone timestamp " + to_string(row.stamp) +
                        " at line " + std::to_string(line_no));
    }
    out.rows.push_back(row);
  }
  if (out.rows.empty()) throw DataError("no data rows");
  return out;
}

RawHourlySeries load_hourly_csv(const std::string& path) {
  return parse_hourly_csv(read_text_file(path));
}

std::string hourly_csv_string(const RawHourlySeries& series) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : series.rows) {
    out += to_string(r.stamp);
    out += ',';
    out += format_double(r.price);
    out += ',';
    out += format_double(r.load);
    out += ',';
    out += format_double(r.temperature);
    out += '\n';
  }
  return out;
}

void write_hourly_csv(const RawHourlySeries& series, const std::string& path) {
  write_text_file(path, hourly_csv_string(series));
}

RawHourlySeries clean_series(const RawHourlySeries& raw, int max_gap) {
  if (raw.rows.empty()) throw DataError("clean_series: empty series");

  // Gap filling.
  RawHourlySeries filled;
  filled.rows.push_back(raw.rows.front());
  for (std::size_t i = 1; i < raw.rows.size(); ++i) {
    const HourRow& prev = raw.rows[i - 1];
    const HourRow& cur = raw.rows[i];
    const long diff = hours_from_epoch(cur.stamp) - hours_from_epoch(prev.stamp);
    if (diff <= 0)
      throw DataError("clean_series: timestamps not strictly increasing at " +
                      to_string(cur.stamp));
    if (diff - 1 > max_gap)
      throw DataError("gap of " + std::to_string(diff - 1) + " hours before " +
                      to_string(cur.stamp) + " exceeds max_gap " +
                      std::to_string(max_gap));
    for (long k = 1; k < diff; ++k) {
      const double w = static_cast<double>(k) / static_cast<double>(diff);
      HourRow r;
      r.stamp = stamp_from_hours(hours_from_epoch(prev.stamp) + k);
      r.price = prev.price + w * (cur.price - prev.price);
      r.load = prev.load + w * (cur.load - prev.load);
      r.temperature =
          prev.temperature + w * (cur.temperature - prev.temperature);
      filled.rows.push_back(r);
    }
    filled.rows.push_back(cur);
  }

  // Price outliers: |z| > 5 on log price within a centered 30-day window.
  // Nonpositive prices cannot enter the log-domain pipeline and are treated
  // as outliers outright.
  const long n = static_cast<long>(filled.rows.size());
  const long half_window = 15 * 24;
  std::vector<char> usable(n);
  std::vector<double> lp(n, 0.0);
  std::vector<double> pfx(n + 1, 0.0), pfx2(n + 1, 0.0), pfxn(n + 1, 0.0);
  for (long i = 0; i < n; ++i) {
    usable[i] = filled.rows[i].price > 0.0;
    if (usable[i]) lp[i] = std::log(filled.rows[i].price);
    pfx[i + 1] = pfx[i] + (usable[i] ? lp[i] : 0.0);
    pfx2[i + 1] = pfx2[i] + (usable[i] ? lp[i] * lp[i] : 0.0);
    pfxn[i + 1] = pfxn[i] + (usable[i] ? 1.0 : 0.0);
  }
  std::vector<char> outlier(n, 0);
  for (long i = 0; i < n; ++i) {
    if (!usable[i]) {
      outlier[i] = 1;
      continue;
    }
    const long lo = std::max<long>(0, i - half_window);
    const long hi = std::min<long>(n - 1, i + half_window);
    const double cnt = pfxn[hi + 1] - pfxn[lo];
    if (cnt < 2) continue;
    const double mean = (pfx[hi + 1] - pfx[lo]) / cnt;
    const double var = (pfx2[hi + 1] - pfx2[lo]) / cnt - mean * mean;
    const double sd = std::sqrt(std::max(0.0, var));
    if (sd < 1e-9) continue;
    if (std::abs(lp[i] - mean) / sd > 5.0) outlier[i] = 1;
  }

  RawHourlySeries out = filled;
  long i = 0;
  while (i < n) {
    if (!outlier[i]) {
      ++i;
      continue;
    }
    long j = i;
    while (j < n && outlier[j]) ++j;
    const long left = i - 1;
    const long right = j;
    if (left < 0 && right >= n)
      throw DataError("clean_series: every price is an outlier");
    for (long k = i; k < j; ++k) {
      if (left < 0)
        out.rows[k].price = filled.rows[right].price;
      else if (right >= n)
        out.rows[k].price = filled.rows[left].price;
      else {
        const double w =
            static_cast<double>(k - left) / static_cast<double>(right - left);
        out.rows[k].price =
            filled.rows[left].price +
            w * (filled.rows[right].price - filled.rows[left].price);
      }
    }
    i = j;
  }
  return out;
}

std::vector<DaySample> build_day_samples(const RawHourlySeries& series,
                                         const FeatureLayout& layout,
                                         const std::set<Date>& holidays) {
  const long n = static_cast<long>(series.rows.size());
  if (n < 48) throw DataError("build_day_samples: need at least 2 full days");
  for (long i = 1; i < n; ++i)
    if (hours_from_epoch(series.rows[i].stamp) !=
        hours_from_epoch(series.rows[i - 1].stamp) + 1)
      throw DataError("build_day_samples: series is not hourly-contiguous at " +
                      to_string(series.rows[i].stamp));
  if (series.rows.front().stamp.hour != 0 || n % 24 != 0)
    throw DataError("build_day_samples: day with != 24 hours");

  const long n_days = n / 24;
  std::vector<DaySample> out;
  out.reserve(n_days - 1);
  for (long d = 1; d < n_days; ++d) {
    const HourRow* past = &series.rows[(d - 1) * 24];
    const HourRow* cur = &series.rows[d * 24];
    const Date date = cur[0].stamp.date;

    DaySample s;
    s.date = date;
    s.features.resize(layout.dim());
    Eigen::Index k = 0;
    if (layout.include_past_price)
      for (int h = 0; h < 24; ++h) s.features[k++] = past[h].price;
    for (int h = 0; h < 24; ++h) s.features[k++] = past[h].load;
    for (int h = 0; h < 24; ++h) s.features[k++] = past[h].temperature;
    for (int h = 0; h < 24; ++h)
      s.features[k++] = past[h].temperature * past[h].temperature;
    for (int h = 0; h < 24; ++h) s.features[k++] = cur[h].temperature;
    for (int h = 0; h < 24; ++h)
      s.features[k++] = cur[h].temperature * cur[h].temperature;
    s.features[k++] = is_weekend(date) ? 1.0 : 0.0;
    s.features[k++] = holidays.count(date) ? 1.0 : 0.0;
    s.features[k++] = static_cast<double>(day_of_year(date)) / 366.0;

    s.price.resize(24);
    s.log_price.resize(24);
    for (int h = 0; h < 24; ++h) {
      if (cur[h].price <= 0.0)
        throw DataError("build_day_samples: nonpositive price at " +
                        to_string(cur[h].stamp));
      s.price[h] = cur[h].price;
      s.log_price[h] = std::log(cur[h].price);
    }
    out.push_back(std::move(s));
  }
  return out;
}

Vec Standardizer::apply(const Vec& raw) const {
  if (raw.size() != mean.size())
    throw DataError("standardizer: feature length mismatch");
  return (raw - mean).array() / stddev.array();
}

Standardizer fit_standardizer(const std::vector<DaySample>& train_samples) {
  if (train_samples.size() < 2)
    throw DataError("fit_standardizer: need at least 2 training samples");
  const Eigen::Index dim = train_samples.front().features.size();
  Vec mean = Vec::Zero(dim);
  for (const auto& s : train_samples) {
    if (s.features.size() != dim)
      throw DataError("fit_standardizer: inconsistent feature lengths");
    mean += s.features;
  }
  mean /= static_cast<double>(train_samples.size());
  Vec var = Vec::Zero(dim);
  for (const auto& s : train_samples) {
    const Vec d = s.features - mean;
    var += d.cwiseProduct(d);
  }
  var /= static_cast<double>(train_samples.size());
  Standardizer out;
  out.mean = std::move(mean);
  out.stddev = var.cwiseSqrt().cwiseMax(1e-8);
  return out;
}

std::vector<DaySample> apply_standardizer(const std::vector<DaySample>& samples,
                                          const Standardizer& s) {
  std::vector<DaySample> out = samples;
  for (auto& d : out) d.features = s.apply(d.features);
  return out;
}

RawHourlySeries generate_synthetic(int days, std::uint64_t seed,
                                   NoiseProfile profile, double noise_scale) {
  if (days < 5)
    throw std::invalid_argument("generate_synthetic: need days >= 5");
  const long n = static_cast<long>(days) * 24;
  const HourStamp start{Date{2021, 1, 1}, 0};
  const long start_hours = hours_from_epoch(start);

  Rng load_rng(mix_seed(seed, 1));
  Rng temp_rng(mix_seed(seed, 2));
  Rng price_rng(mix_seed(seed, 3));

  std::vector<double> load(n), temp(n), logp(n);
  double ar_load = 0.0, ar_temp = 0.0, ar_price = 0.0;
  for (long i = 0; i < n; ++i) {
    const HourStamp st = stamp_from_hours(start_hours + i);
    const double doy = static_cast<double>(day_of_year(st.date)) / 365.0;
    const double h = static_cast<double>(st.hour);

    ar_load = 0.8 * ar_load + 30.0 * normal_unit(load_rng);
    load[i] = 1000.0 + 150.0 * std::sin(2.0 * kPi * (doy - 0.05)) +
              250.0 * std::cos(2.0 * kPi * (h - 18.0) / 24.0) + ar_load;

    ar_temp = 0.8 * ar_temp + 1.5 * normal_unit(temp_rng);
    temp[i] = 12.0 + 10.0 * std::sin(2.0 * kPi * (doy - 0.22)) +
              6.0 * std::cos(2.0 * kPi * (h - 14.0) / 24.0) + ar_temp;

    const bool afternoon = st.hour >= 12 && st.hour <= 16;
    const double sigma =
        0.10 * noise_scale *
        (profile == NoiseProfile::afternoon_heavy && afternoon ? 3.0 : 1.0);
    ar_price = 0.1 * ar_price + sigma * normal_unit(price_rng);

    // Day-ahead structure: today's price is driven by yesterday's load and
    // today's temperature, both of which are feature blocks downstream.
    const double lagged_load = i >= 24 ? load[i - 24] : load[i];
    const double t10 = temp[i] / 10.0;
    logp[i] = std::log(40.0) + 0.2 * (lagged_load - 1000.0) / 250.0 +
              0.1 * t10 * t10 + ar_price;
  }

  RawHourlySeries out;
  out.rows.resize(n);
  for (long i = 0; i < n; ++i) {
    out.rows[i].stamp = stamp_from_hours(start_hours + i);
    out.rows[i].price = std::exp(logp[i]);
    out.rows[i].load = load[i];
    out.rows[i].temperature = temp[i];
  }
  return out;
}

std::set<Date> load_holiday_file(const std::string& path) {
  const std::string content = read_text_file(path);
  std::set<Date> out;
  std::size_t pos = 0;
  long line_no = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    std::string line =
        content.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? content.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int y, m, d;
    if (std::sscanf(line.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3)
      throw DataError("holiday file line " + std::to_string(line_no) +
                      ": bad date '" + line + "'");
    out.insert(Date{y, m, d});
  }
  return out;
}

}  // namespace dfp
