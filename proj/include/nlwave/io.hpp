#ifndef NLWAVE_IO_HPP
#define NLWAVE_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "nlwave/analysis.hpp"
#include "nlwave/config.hpp"

namespace nlwave {

using json = nlohmann::ordered_json;

// JSON has no infinities; unset extrema become null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const ConditionVerdict& c) {
  return {{"name", c.name}, {"pass", c.pass}, {"worst", num(c.worst)}, {"u", c.u}, {"v", c.v}};
}

inline json to_json(const AssumptionReport& r) {
  json j{{"name", r.name}, {"pass", r.passed()}, {"samples", r.samples}, {"resolution_sensitive", r.resolution_sensitive}};
  j["conditions"] = json::array();
  for (const auto& c : r.conditions) j["conditions"].push_back(to_json(c));
  return j;
}

inline json to_json(const GapReport& g) {
  return {{"pass", g.passed()},
          {"gap_holds", g.gap_holds},
          {"gap_margin", g.gap_margin},
          {"ordering_holds", g.ordering_holds},
          {"ordering_margin", g.ordering_margin}};
}

inline json to_json(const WaveProfile& w) {
  const auto [l, r] = w.boundary_gap();
  return {{"c", w.c},
          {"K", w.K},
          {"K2", w.K2},
          {"scheme", to_string(w.scheme)},
          {"grid", {{"xi_min", w.grid.x_min()}, {"xi_max", w.grid.x_max()}, {"n", w.grid.size()}, {"h", w.grid.spacing()}}},
          {"residual", {w.residual.first, w.residual.second}},
          {"iterations", w.iterations},
          {"last_change", w.last_change},
          {"normalization_shift", w.shift},
          {"tail_rate", w.tail_rate},
          {"far_field",
           {{"phi1_at_xi_min_minus_h", w.closure1.left(w.grid.x_min() - w.grid.spacing())},
            {"phi2_at_xi_min_minus_h", w.closure2.left(w.grid.x_min() - w.grid.spacing())},
            {"rate", w.closure1.left.rate}}},
          {"boundary_gap", {{"left", l}, {"right", r}}},
          {"min_increment", w.min_increment()}};
}

inline json to_json(const Extremum& e) { return {{"value", num(e.value)}, {"xi", e.xi}}; }

inline json to_json(const StabilityCertificate& s) {
  json j{{"valid", s.valid},
         {"c", s.c},
         {"beta", s.beta},
         {"beta_sup", s.beta_sup},
         {"xi0", s.xi0},
         {"xi0_gap", s.xi0_gap},
         {"c_star_assumed", s.threshold.c_star},
         {"threshold_terms", {s.threshold.c_star, s.threshold.term2, s.threshold.term3}},
         {"c_threshold", s.threshold.c_threshold},
         {"C11", s.C.C11},
         {"C12", s.C.C12},
         {"C1", s.C.C1},
         {"C21", s.C.C21},
         {"C22", s.C.C22},
         {"C2", s.C.C2},
         {"C3", s.C3},
         {"C4", s.C4},
         {"mu1", s.mu1},
         {"mu2", s.mu2},
         {"mu_max", s.mu_max},
         {"mu", s.mu},
         {"mu_fraction", s.mu_fraction},
         {"min_B1", to_json(s.min_B1)},
         {"min_B2", to_json(s.min_B2)},
         {"min_A1", to_json(s.min_A1)},
         {"min_A2", to_json(s.min_A2)},
         {"kink", {{"B1_left", s.kink_B1_left}, {"B1_right", s.kink_B1_right}, {"B2_left", s.kink_B2_left},
                   {"B2_right", s.kink_B2_right}}}};
  j["mu_scan"] = json::array();
  for (const auto& e : s.mu_scan)
    j["mu_scan"].push_back({{"mu", e.mu}, {"C3", e.C3}, {"C4", e.C4}, {"min_A1", e.min_A1}, {"min_A2", e.min_A2}});
  j["failures"] = s.failures;
  return j;
}

inline json to_json(const OrderVerdict& v) {
  return {{"pass", v.pass}, {"worst", num(v.worst)}, {"t", v.t}, {"x", v.x}, {"component", v.component}};
}

inline json to_json(const QReport& q) {
  return {{"pass", q.pass}, {"max_Q", num(q.max_Q)}, {"xi", q.xi_at_max}, {"max_identity_error", q.max_identity_error}};
}

inline json to_json(const TheoremVerdict& v) {
  json j{{"status", to_string(v.status)}, {"mu", v.mu}, {"window", {v.window_start, v.window_end}}};
  j["components"] = json::array();
  for (const auto& c : v.component)
    j["components"].push_back({{"amplification", num(c.amplification)},
                               {"mu_fit_H1w", c.mu_fit},
                               {"r2", c.r2},
                               {"mu_fit_sup", c.mu_sup},
                               {"a", c.a},
                               {"b", c.b},
                               {"c", c.c},
                               {"note", c.note}});
  j["reasons"] = v.reasons;
  j["warnings"] = v.warnings;
  return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + p.string());
  out << s;
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string profile_text(const WaveProfile& w) {
  std::string s = "# front profile\n";
  s += "# c = " + fmt_double(w.c) + "\n# K = " + fmt_double(w.K) + "\n# K2 = " + fmt_double(w.K2) + "\n";
  s += "# residual = " + fmt_double(w.residual.first) + " " + fmt_double(w.residual.second) + "\n";
  s += "# scheme = " + std::string(to_string(w.scheme)) + "\n# xi phi1 phi2\n";
  for (std::size_t j = 0; j < w.phi1.size(); ++j)
    s += fmt_double(w.grid.node(j)) + " " + fmt_double(w.phi1[j]) + " " + fmt_double(w.phi2[j]) + "\n";
  return s;
}

inline std::string series_csv(const PerturbationSeries& s) {
  std::string out = "t,L2w_v1,H1w_v1,sup_v1,L2w_v2,H1w_v2,sup_v2\n";
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    out += fmt_double(s.t[i]);
    for (int c = 0; c < 2; ++c)
      out += "," + fmt_double(s.L2w[c][i]) + "," + fmt_double(s.H1w[c][i]) + "," + fmt_double(s.sup[c][i]);
    out += "\n";
  }
  return out;
}

inline std::string field_dump(const Grid& g, double t, const Field& u1, const Field& u2) {
  std::string s = "# t = " + fmt_double(t) + "\n# x u1 u2\n";
  for (std::size_t j = 0; j < u1.size(); ++j)
    s += fmt_double(g.node(j)) + " " + fmt_double(u1[j]) + " " + fmt_double(u2[j]) + "\n";
  return s;
}

}  // namespace nlwave

#endif
