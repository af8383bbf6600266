#include "dfp/core.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dfp {

// Howard Hinnant's civil-date algorithms.
long days_from_civil(const Date& d) {
  int y = d.year;
  const int m = d.month;
  const int dd = d.day;
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + dd - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

Date civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned dd = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(dd)};
}

Date next_day(const Date& d) { return civil_from_days(days_from_civil(d) + 1); }

int day_of_week(const Date& d) {
  const long z = days_from_civil(d);
  return static_cast<int>(((z % 7) + 7 + 3) % 7);  // 1970-01-01 was a Thursday
}

bool is_weekend(const Date& d) { return day_of_week(d) >= 5; }

int day_of_year(const Date& d) {
  return static_cast<int>(days_from_civil(d) -
                          days_from_civil(Date{d.year, 1, 1})) +
         1;
}

std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

Schedule Schedule::idle(const EssParams& p) {
  Schedule s;
  const int t = p.t_periods;
  s.p_ch = Vec::Zero(t);
  s.p_dis = Vec::Zero(t);
  s.p_net = Vec::Zero(t);
  s.energy = Vec::Constant(t, p.e_init);
  s.mu_ch = BoolArray::Constant(t, false);
  s.mu_dis = BoolArray::Constant(t, false);
  return s;
}

std::vector<Violation> validate_ess_params(const EssParams& p) {
  std::vector<Violation> out;
  auto bad = [&out](const std::string& field, const std::string& msg,
                    double v) { out.push_back({field, msg, v}); };

  if (p.t_periods < 1) bad("t_periods", "t_periods >= 1", p.t_periods);
  if (!(p.delta_t > 0.0)) bad("delta_t", "delta_t > 0", p.delta_t);
  if (!(p.e_min >= 0.0)) bad("e_min", "e_min >= 0", p.e_min);
  if (!(p.e_min < p.e_max)) bad("e_min", "e_min < e_max", p.e_min);
  if (!(p.e_max <= 1.0)) bad("e_max", "e_max <= 1 (capacity-normalized)", p.e_max);
  if (!(p.e_init >= p.e_min && p.e_init <= p.e_max))
    bad("e_init", "e_min <= e_init <= e_max", p.e_init);
  if (!(p.eta_ch > 0.0 && p.eta_ch <= 1.0))
    bad("eta_ch", "eta_ch in (0,1]", p.eta_ch);
  if (!(p.eta_dis > 0.0 && p.eta_dis <= 1.0))
    bad("eta_dis", "eta_dis in (0,1]", p.eta_dis);
  if (!(p.p_ch_max > 0.0)) bad("p_ch_max", "p_ch_max > 0", p.p_ch_max);
  if (!(p.p_dis_max > 0.0)) bad("p_dis_max", "p_dis_max > 0", p.p_dis_max);
  if (!(p.big_m >= std::max(p.p_ch_max, p.p_dis_max)))
    bad("big_m", "big_m >= max(p_ch_max, p_dis_max)", p.big_m);
  return out;
}

Vec energy_trajectory(const Vec& p_ch, const Vec& p_dis, const EssParams& p) {
  if (p_ch.size() != p.t_periods || p_dis.size() != p.t_periods)
    throw std::invalid_argument("energy_trajectory: length mismatch");
  Vec e(p.t_periods);
  double prev = p.e_init;
  for (int t = 0; t < p.t_periods; ++t) {
    prev += p.eta_ch * p_ch[t] * p.delta_t - p_dis[t] / p.eta_dis * p.delta_t;
    e[t] = prev;
  }
  return e;
}

Schedule make_schedule(const Vec& p_ch, const Vec& p_dis, const EssParams& p) {
  Schedule s;
  s.p_ch = p_ch;
  s.p_dis = p_dis;
  s.p_net = p_dis - p_ch;
  s.energy = energy_trajectory(p_ch, p_dis, p);
  s.mu_ch = (p_ch.array() > 0.0);
  s.mu_dis = (p_dis.array() > 0.0);
  return s;
}

std::vector<Violation> validate_schedule(const Schedule& s, const EssParams& p,
                                         double tol) {
  const int t_n = p.t_periods;
  if (s.p_ch.size() != t_n || s.p_dis.size() != t_n || s.p_net.size() != t_n ||
      s.energy.size() != t_n || s.mu_ch.size() != t_n || s.mu_dis.size() != t_n)
    throw std::invalid_argument("validate_schedule: length mismatch");

  std::vector<Violation> out;
  auto bad = [&out](const std::string& field, const std::string& msg,
                    double v) { out.push_back({field, msg, v}); };

  const Vec energy = energy_trajectory(s.p_ch, s.p_dis, p);
  for (int t = 0; t < t_n; ++t) {
    const std::string at = " at t=" + std::to_string(t);
    if (std::abs(s.p_net[t] - (s.p_dis[t] - s.p_ch[t])) > tol)
      bad("p_net", "p_net = p_dis - p_ch" + at, s.p_net[t]);
    if (std::abs(s.energy[t] - energy[t]) > tol)
      bad("energy", "energy recursion" + at, s.energy[t]);
    if (s.energy[t] < p.e_min - tol)
      bad("energy", "energy below e_min" + at, s.energy[t]);
    if (s.energy[t] > p.e_max + tol)
      bad("energy", "energy above e_max" + at, s.energy[t]);
    if (s.p_ch[t] < -tol || s.p_ch[t] > p.p_ch_max + tol)
      bad("p_ch", "p_ch outside [0, p_ch_max]" + at, s.p_ch[t]);
    if (s.p_dis[t] < -tol || s.p_dis[t] > p.p_dis_max + tol)
      bad("p_dis", "p_dis outside [0, p_dis_max]" + at, s.p_dis[t]);
    if (s.mu_ch[t] && s.mu_dis[t])
      bad("mu", "simultaneous charge/discharge" + at, 1.0);
    if (s.p_ch[t] > tol && !s.mu_ch[t])
      bad("mu_ch", "p_ch > 0 without charge indicator" + at, s.p_ch[t]);
    if (s.p_dis[t] > tol && !s.mu_dis[t])
      bad("mu_dis", "p_dis > 0 without discharge indicator" + at, s.p_dis[t]);
  }
  return out;
}

}  // namespace dfp
