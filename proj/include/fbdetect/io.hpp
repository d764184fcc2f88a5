#ifndef FBDETECT_IO_HPP
#define FBDETECT_IO_HPP

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbdetect/architectures.hpp"
#include "fbdetect/evaluator.hpp"
#include "fbdetect/exponents.hpp"

namespace fbdetect::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSignificantDigits = 12;

/// Shortest decimal text of x at 12 significant digits; "inf", "-inf", "nan".
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
  return buf;
}

/// JSON number rounded to 12 significant digits; non-finite values become null.
inline Json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(format_number(x));
}

inline Json quantizer_json(const Quantizer& q) { return Json(q.map); }

/// Compact text form: "001" when every label is a single digit, "0,10,3" otherwise.
inline std::string format_quantizer(const Quantizer& q) {
  const bool digits = q.message_alphabet_size <= 10;
  std::string out;
  for (std::size_t i = 0; i < q.map.size(); ++i) {
    if (!digits && i > 0) out += ',';
    out += std::to_string(q.map[i]);
  }
  return out;
}

/// Inverse of format_quantizer. The alphabet size is d, or one more than the
/// largest label when d is zero.
inline Quantizer parse_quantizer(const std::string& text, int d = 0) {
  std::vector<int> map;
  if (text.find(',') != std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        map.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw Error(ErrorKind::InvalidArgument, "bad quantizer label '" + item + "'");
      }
    }
  } else {
    for (char c : text) {
      if (c < '0' || c > '9') throw Error(ErrorKind::InvalidArgument, "bad quantizer '" + text + "'");
      map.push_back(c - '0');
    }
  }
  if (map.empty()) throw Error(ErrorKind::InvalidArgument, "empty quantizer");
  int top = 0;
  for (int v : map) top = std::max(top, v);
  return make_quantizer(std::move(map), d > 0 ? d : top + 1);
}

template <typename T, typename F>
Json optional_json(const std::optional<T>& v, F&& f) {
  return v ? Json(f(*v)) : Json(nullptr);
}

inline Json to_json(const DecayRateVector& e) {
  Json j;
  j["e01"] = number(e.e01);
  j["e10"] = number(e.e10);
  j["e00"] = number(e.e00);
  j["e11"] = number(e.e11);
  return j;
}

inline Json to_json(const ExponentReport& r) {
  Json j;
  j["architecture"] = std::string(to_string(r.architecture));
  j["formulation"] = std::string(to_string(r.formulation));
  j["r"] = optional_json(r.r, number);
  j["exponent"] = number(r.exponent);
  Json strategy;
  strategy["gamma"] = optional_json(r.gamma, quantizer_json);
  strategy["delta0"] = optional_json(r.delta0, quantizer_json);
  strategy["delta1"] = optional_json(r.delta1, quantizer_json);
  strategy["t"] = optional_json(r.t, number);
  j["strategy"] = strategy;
  j["decay_rates"] = r.decay_rates ? to_json(*r.decay_rates) : Json(nullptr);
  Json branches = Json::array();
  for (double b : r.branch_values) branches.push_back(number(b));
  j["branch_values"] = branches;
  j["s_star"] = optional_json(r.s_star, number);
  j["t_at_boundary"] = r.t_at_boundary;
  j["note"] = r.note;
  return j;
}

inline Json to_json(const ErrorEstimate& e) {
  Json j;
  j["n"] = e.n;
  j["p_e0"] = number(e.p_e0);
  j["p_e1"] = number(e.p_e1);
  j["p_e"] = number(e.p_e);
  j["log_pe_over_n"] = number(e.log_pe_over_n());
  j["method"] = std::string(to_string(e.method));
  j["ci_halfwidth"] = number(e.ci_halfwidth);
  j["seed"] = e.seed ? Json(*e.seed) : Json(nullptr);
  j["samples"] = e.samples ? Json(*e.samples) : Json(nullptr);
  return j;
}

inline Json to_json(const FitReport& f) {
  Json j;
  Json points = Json::array();
  for (const auto& p : f.points) points.push_back(to_json(p.estimate));
  j["points"] = points;
  j["last_log_pe_over_n"] = number(f.last_log_pe_over_n);
  j["slope"] = number(f.slope);
  return j;
}

inline const char* kEstimateCsvHeader = "n,p_e0,p_e1,p_e,log_pe_over_n,method,ci";

inline std::string csv_row(const ErrorEstimate& e) {
  return std::to_string(e.n) + ',' + format_number(e.p_e0) + ',' + format_number(e.p_e1) + ',' +
         format_number(e.p_e) + ',' + format_number(e.log_pe_over_n()) + ',' + std::string(to_string(e.method)) +
         ',' + format_number(e.ci_halfwidth);
}

inline const char* kCurveCsvHeader = "t,rate_h0,rate_h1";

/// Rate functions of both hypotheses on `points` evenly spaced t values.
inline std::string curve_csv(const InducedModel& im, double t_min, double t_max, int points) {
  if (points < 2 || !(t_min < t_max)) {
    throw Error(ErrorKind::InvalidArgument, "curve grid needs t_min < t_max and at least 2 points");
  }
  std::string out = std::string(kCurveCsvHeader) + '\n';
  for (int i = 0; i < points; ++i) {
    const double t = i + 1 == points ? t_max : t_min + (t_max - t_min) * i / (points - 1);
    out += format_number(t) + ',' + format_number(rate_function(im, Hypothesis::H0, t).value) + ',' +
           format_number(rate_function(im, Hypothesis::H1, t).value) + '\n';
  }
  return out;
}

}  // namespace fbdetect::io

#endif  // FBDETECT_IO_HPP
