#include "dfp/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dfp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void JsonWriter::separator() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (!needs_comma_.empty()) {
    if (needs_comma_.back()) out_ += ',';
    needs_comma_.back() = true;
  }
}

void JsonWriter::begin_object() {
  separator();
  out_ += '{';
  needs_comma_.push_back(false);
}

void JsonWriter::end_object() {
  out_ += '}';
  needs_comma_.pop_back();
}

void JsonWriter::begin_array() {
  separator();
  out_ += '[';
  needs_comma_.push_back(false);
}

void JsonWriter::end_array() {
  out_ += ']';
  needs_comma_.pop_back();
}

void JsonWriter::key(const std::string& k) {
  separator();
  out_ += '"';
  out_ += k;
  out_ += "\":";
  pending_key_ = true;
}

void JsonWriter::value(double v) {
  separator();
  out_ += format_double(v);
}

void JsonWriter::value(long v) {
  separator();
  out_ += std::to_string(v);
}

void JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
}

void JsonWriter::value(const std::string& v) {
  separator();
  out_ += '"';
  for (char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      case '\r': out_ += "\\r"; break;
      default: out_ += c;
    }
  }
  out_ += '"';
}

void JsonWriter::value(const Vec& v) {
  begin_array();
  for (Eigen::Index i = 0; i < v.size(); ++i) value(v[i]);
  end_array();
}

void JsonWriter::value(const BoolArray& v) {
  begin_array();
  for (Eigen::Index i = 0; i < v.size(); ++i) value(static_cast<bool>(v[i]));
  end_array();
}

namespace {

nlohmann::json parse(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw DataError("malformed JSON document");
  return j;
}

Vec vec_from(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("expected JSON array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

BoolArray bools_from(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("expected JSON array of booleans");
  BoolArray v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<bool>();
  return v;
}

}  // namespace

std::string to_json(const EssParams& p) {
  JsonWriter w;
  w.begin_object();
  w.field("t_periods", p.t_periods);
  w.field("delta_t", p.delta_t);
  w.field("e_min", p.e_min);
  w.field("e_max", p.e_max);
  w.field("e_init", p.e_init);
  w.field("eta_ch", p.eta_ch);
  w.field("eta_dis", p.eta_dis);
  w.field("p_ch_max", p.p_ch_max);
  w.field("p_dis_max", p.p_dis_max);
  w.field("big_m", p.big_m);
  w.end_object();
  return w.take();
}

EssParams ess_params_from_json(const std::string& text) {
  const auto j = parse(text);
  EssParams p;
  p.t_periods = j.value("t_periods", p.t_periods);
  p.delta_t = j.value("delta_t", p.delta_t);
  p.e_min = j.value("e_min", p.e_min);
  p.e_max = j.value("e_max", p.e_max);
  p.e_init = j.value("e_init", p.e_init);
  p.eta_ch = j.value("eta_ch", p.eta_ch);
  p.eta_dis = j.value("eta_dis", p.eta_dis);
  p.p_ch_max = j.value("p_ch_max", p.p_ch_max);
  p.p_dis_max = j.value("p_dis_max", p.p_dis_max);
  p.big_m = j.value("big_m", std::max(p.p_ch_max, p.p_dis_max));
  return p;
}

std::string to_json(const Schedule& s) {
  JsonWriter w;
  w.begin_object();
  w.field("p_ch", s.p_ch);
  w.field("p_dis", s.p_dis);
  w.field("p_net", s.p_net);
  w.field("energy", s.energy);
  w.field("mu_ch", s.mu_ch);
  w.field("mu_dis", s.mu_dis);
  w.end_object();
  return w.take();
}

Schedule schedule_from_json(const std::string& text) {
  const auto j = parse(text);
  Schedule s;
  s.p_ch = vec_from(j.at("p_ch"));
  s.p_dis = vec_from(j.at("p_dis"));
  s.p_net = vec_from(j.at("p_net"));
  s.energy = vec_from(j.at("energy"));
  s.mu_ch = bools_from(j.at("mu_ch"));
  s.mu_dis = bools_from(j.at("mu_dis"));
  return s;
}

std::string to_json(const PriceCurve& c) {
  JsonWriter w;
  w.begin_object();
  w.key("values");
  w.value(c);
  w.end_object();
  return w.take();
}

PriceCurve price_curve_from_json(const std::string& text) {
  const auto j = parse(text);
  if (j.is_array()) return vec_from(j);  // bare array form is accepted
  return vec_from(j.at("values"));
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + path);
  f << content;
  if (!f) throw DataError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace dfp
