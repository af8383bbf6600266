#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dfp/core.hpp"
#include "dfp/json_io.hpp"
#include "dfp/rng.hpp"

using namespace dfp;

namespace {
bool has_violation(const std::vector<Violation>& v, const std::string& field,
                   const std::string& fragment) {
  for (const auto& x : v)
    if (x.field == field && x.message.find(fragment) != std::string::npos)
      return true;
  return false;
}
}  // namespace

TEST_CASE("default storage parameters are valid") {
  EssParams p;
  CHECK(validate_ess_params(p).empty());
  CHECK(p.e_min == 0.2);
  CHECK(p.e_max == 0.95);
  CHECK(p.eta_ch == 0.90);
  CHECK(p.eta_dis == 0.92);
  CHECK(p.p_ch_max == 0.5);
  CHECK(p.p_dis_max == 0.5);
  CHECK(p.delta_t == 1.0);
}

TEST_CASE("parameter violations are itemized") {
  EssParams p;
  p.e_min = 0.95;
  p.e_max = 0.2;
  auto v = validate_ess_params(p);
  CHECK(has_violation(v, "e_min", "e_min < e_max"));

  EssParams q;
  q.eta_ch = 1.2;
  v = validate_ess_params(q);
  REQUIRE(v.size() == 1);
  CHECK(has_violation(v, "eta_ch", "eta_ch in (0,1]"));
  CHECK(v.front().value == 1.2);

  EssParams r;
  r.big_m = 0.4;
  CHECK(has_violation(validate_ess_params(r), "big_m", "big_m >= max"));
}

TEST_CASE("idle schedule is always feasible") {
  EssParams p;
  CHECK(validate_schedule(Schedule::idle(p), p, 1e-9).empty());
}

TEST_CASE("schedule violations carry the time index") {
  EssParams p;
  p.t_periods = 3;
  Schedule s = Schedule::idle(p);

  SUBCASE("simultaneous charge and discharge") {
    s.p_ch[1] = 0.1;
    s.p_dis[1] = 0.1;
    s.mu_ch[1] = true;
    s.mu_dis[1] = true;
    s.energy = energy_trajectory(s.p_ch, s.p_dis, p);
    auto v = validate_schedule(s, p, 1e-7);
    CHECK(has_violation(v, "mu", "simultaneous charge/discharge at t=1"));
  }

  SUBCASE("energy below the floor") {
    s.energy[2] = 0.1;
    auto v = validate_schedule(s, p, 1e-7);
    CHECK(has_violation(v, "energy", "below e_min at t=2"));
  }

  SUBCASE("indicator missing for a positive power") {
    s.p_dis[0] = 0.1;
    s.p_net[0] = 0.1;
    s.energy = energy_trajectory(s.p_ch, s.p_dis, p);
    auto v = validate_schedule(s, p, 1e-7);
    CHECK(has_violation(v, "mu_dis", "without discharge indicator at t=0"));
  }
}

TEST_CASE("schedule length mismatch is a hard error") {
  EssParams p;
  Schedule s = Schedule::idle(p);
  p.t_periods = 23;
  CHECK_THROWS_AS(validate_schedule(s, p, 1e-7), std::invalid_argument);
}

TEST_CASE("energy recursion matches a hand-rolled trajectory") {
  EssParams p;
  p.t_periods = 2;
  Vec p_ch(2), p_dis(2);
  p_ch << 0.3, 0.0;
  p_dis << 0.0, 0.4;
  const Vec e = energy_trajectory(p_ch, p_dis, p);
  CHECK(e[0] == doctest::Approx(0.5 + 0.9 * 0.3).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(e[0] - 0.4 / 0.92).epsilon(1e-12));
}

TEST_CASE("EssParams round-trips bit for bit") {
  EssParams p;
  p.e_init = 0.3141592653589793;
  p.eta_dis = 0.9200000000000017;
  const EssParams q = ess_params_from_json(to_json(p));
  CHECK(q.t_periods == p.t_periods);
  CHECK(q.delta_t == p.delta_t);
  CHECK(q.e_min == p.e_min);
  CHECK(q.e_max == p.e_max);
  CHECK(q.e_init == p.e_init);
  CHECK(q.eta_ch == p.eta_ch);
  CHECK(q.eta_dis == p.eta_dis);
  CHECK(q.p_ch_max == p.p_ch_max);
  CHECK(q.p_dis_max == p.p_dis_max);
  CHECK(q.big_m == p.big_m);
}

TEST_CASE("Schedule round-trips bit for bit") {
  EssParams p;
  p.t_periods = 4;
  Rng rng(42);
  Vec p_ch(4), p_dis(4);
  for (int t = 0; t < 4; ++t) {
    p_ch[t] = uniform_unit(rng) * 0.25;
    p_dis[t] = 0.0;
  }
  const Schedule s = make_schedule(p_ch, p_dis, p);
  const Schedule q = schedule_from_json(to_json(s));
  CHECK(q.p_ch == s.p_ch);
  CHECK(q.p_dis == s.p_dis);
  CHECK(q.p_net == s.p_net);
  CHECK(q.energy == s.energy);
  CHECK((q.mu_ch == s.mu_ch).all());
  CHECK((q.mu_dis == s.mu_dis).all());
}

TEST_CASE("calendar helpers") {
  CHECK(day_of_week(Date{1970, 1, 1}) == 3);  // Thursday
  CHECK(day_of_week(Date{2021, 1, 1}) == 4);  // Friday
  CHECK(is_weekend(Date{2021, 1, 2}));        // Saturday
  CHECK(is_weekend(Date{2021, 1, 3}));        // Sunday
  CHECK(!is_weekend(Date{2021, 1, 6}));       // Wednesday
  CHECK(day_of_year(Date{2021, 1, 1}) == 1);
  CHECK(day_of_year(Date{2020, 12, 31}) == 366);  // leap year
  CHECK(next_day(Date{2021, 2, 28}) == Date{2021, 3, 1});
  CHECK(next_day(Date{2020, 2, 28}) == Date{2020, 2, 29});

  for (long d = 17000; d < 20000; d += 37)
    CHECK(days_from_civil(civil_from_days(d)) == d);
}

TEST_CASE("17-significant-digit doubles survive the round trip") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double x = (uniform_unit(rng) - 0.5) * std::pow(10.0, (i % 17) - 8);
    const double y = std::strtod(format_double(x).c_str(), nullptr);
    CHECK(x == y);
  }
}
