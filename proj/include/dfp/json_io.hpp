#pragma once

#include <map>
#include <string>
#include <vector>

#include "dfp/core.hpp"

namespace dfp {

// Canonical text serialization. Parsing goes through nlohmann::json; writing
// goes through JsonWriter so that every number is emitted with 17 significant
// digits (exact double round-trip, byte-stable across runs).

class JsonWriter {
 public:
  std::string take() { return std::move(out_); }

  void begin_object();
  void end_object();
  void begin_array();
  void end_array();
  void key(const std::string& k);
  void value(double v);
  void value(long v);
  void value(int v) { value(static_cast<long>(v)); }
  void value(bool v);
  void value(const std::string& v);
  void value(const char* v) { value(std::string(v)); }
  void value(const Vec& v);
  void value(const BoolArray& v);

  template <typename T>
  void field(const std::string& k, const T& v) {
    key(k);
    value(v);
  }

 private:
  void separator();
  std::string out_;
  std::vector<bool> needs_comma_;
  bool pending_key_ = false;
};

std::string format_double(double v);  // %.17g

std::string to_json(const EssParams& p);
EssParams ess_params_from_json(const std::string& text);

std::string to_json(const Schedule& s);
Schedule schedule_from_json(const std::string& text);

std::string to_json(const PriceCurve& c);
PriceCurve price_curve_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dfp
