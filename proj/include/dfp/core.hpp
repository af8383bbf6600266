#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dfp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Day-ahead price curve, $/MWh per period. Negative entries are legal:
/// the decision losses evaluate curves of the form lambda - 2*lambda_hat.
using PriceCurve = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Calendar
// ---------------------------------------------------------------------------

struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  auto operator<=>(const Date&) const = default;
};

/// Days since 1970-01-01 (proleptic Gregorian).
long days_from_civil(const Date& d);
Date civil_from_days(long days);
Date next_day(const Date& d);
/// 0 = Monday .. 6 = Sunday.
int day_of_week(const Date& d);
bool is_weekend(const Date& d);
/// 1-based ordinal day within the year.
int day_of_year(const Date& d);
std::string to_string(const Date& d);

// ---------------------------------------------------------------------------
// Storage description
// ---------------------------------------------------------------------------

/// Physical/technical storage parameters. Energy capacity is normalized to
/// 1 MWh, so e_min/e_max/e_init are fractions of capacity and the power
/// limits equal the daily depths of charge/discharge in MW. Defaults follow
/// the reference configuration used throughout the test suites.
struct EssParams {
  int t_periods = 24;
  double delta_t = 1.0;  // hours
  double e_min = 0.2;
  double e_max = 0.95;
  double e_init = 0.5;
  double eta_ch = 0.90;
  double eta_dis = 0.92;
  double p_ch_max = 0.5;   // MW
  double p_dis_max = 0.5;  // MW
  double big_m = 0.5;      // MW, must cover both power limits
};

/// Charge/discharge plan over t_periods hours.
/// Invariants (checked by validate_schedule):
///   p_net = p_dis - p_ch
///   energy follows the stored-energy recursion from e_init
///   e_min <= energy_t <= e_max, powers within their caps
///   never simultaneously charging and discharging
struct Schedule {
  Vec p_ch;
  Vec p_dis;
  Vec p_net;
  Vec energy;
  BoolArray mu_ch;
  BoolArray mu_dis;

  static Schedule idle(const EssParams& p);
};

/// One training example: a day's feature vector and its price curve.
/// `features` holds raw values as produced by the feature builder; the
/// training pipeline standardizes them with statistics fitted on the
/// training split only.
struct DaySample {
  Date date;
  Vec features;
  Vec log_price;  // natural log of price, one entry per hour
  PriceCurve price;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  std::string field;
  std::string message;
  double value = 0.0;
};

/// Empty result means the parameters satisfy every invariant.
std::vector<Violation> validate_ess_params(const EssParams& p);

/// Checks every Schedule invariant within tol, one entry per violated
/// constraint (with the offending time index in the message).
/// Throws std::invalid_argument on length mismatch.
std::vector<Violation> validate_schedule(const Schedule& s, const EssParams& p,
                                         double tol);

/// Stored-energy trajectory implied by the charge/discharge powers.
Vec energy_trajectory(const Vec& p_ch, const Vec& p_dis, const EssParams& p);

/// Builds a fully consistent Schedule from power vectors: derives p_net,
/// the energy trajectory, and the state indicators.
Schedule make_schedule(const Vec& p_ch, const Vec& p_dis, const EssParams& p);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Malformed or inconsistent input data (files, schemas, shapes).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure inside the arbitrage solver.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what, long node = -1)
      : std::runtime_error(what), node_id(node) {}
  long node_id;  // branch-and-bound node at which the failure occurred
};

}  // namespace dfp
