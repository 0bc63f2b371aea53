#include "schrodinger/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace schrodinger {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::vector<double> expand(std::span<const double> v, const std::vector<std::size_t>& index,
                           std::size_t size) {
  std::vector<double> out(size, 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) out[index[k]] = v[k];
  return out;
}

}  // namespace

json ext_json(ExtReal v) { return v.is_inf() ? json("inf") : json(v.to_double()); }

json ext_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

json to_json(const FixedPointResult& r, bool with_trace) {
  json j = {{"status", to_string(r.status)},
            {"iterations", r.iterations},
            {"residual", ext_json(r.residual)},
            {"limit_residual", ext_json(r.limit_residual)},
            {"early_exit_index", optional_json(r.early_exit_index)},
            {"u_star", r.u_star}};
  if (with_trace) {
    json rows = json::array();
    for (const auto& t : r.trace)
      rows.push_back({{"n", t.n},
                      {"min_u", t.min_u},
                      {"max_u", t.max_u},
                      {"residual", ext_json(t.residual)},
                      {"min_phi", t.min_phi},
                      {"normalization", ext_json(t.normalization)}});
    j["trace"] = rows;
  }
  return j;
}

json to_json(const SchrodingerSolution& s, const ReducedProblem& pb) {
  const std::size_t full_x = pb.original_nx();
  const std::size_t full_y = pb.original_ny();
  json pi = json::array();
  std::vector<double> row(full_y);
  std::size_t k = 0;
  for (std::size_t i = 0; i < full_x; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    if (k < pb.nx() && pb.x_index()[k] == i) {
      for (std::size_t q = 0; q < pb.ny(); ++q) row[pb.y_index()[q]] = s.pi(k, q);
      ++k;
    }
    pi.push_back(row);
  }
  return {{"a", expand(s.a, pb.x_index(), full_x)},
          {"b", expand(s.b, pb.y_index(), full_y)},
          {"u", expand(s.u, pb.x_index(), full_x)},
          {"pi", pi},
          {"marginal_err_x", s.marginal_err_x},
          {"marginal_err_y", s.marginal_err_y},
          {"rel_entropy", ext_json(s.rel_entropy)}};
}

json to_json(const SumVerdict& v) {
  return {{"finite", v.finite},
          {"status", to_string(v.status)},
          {"value", ext_json(v.value)},
          {"log_value", ext_json(v.log_value)},
          {"violating_index", optional_json(v.violating_index)}};
}

json to_json(const CriteriaReport& r) {
  json j;
  j["positivity"] = r.positivity;
  j["boundedness"] = r.boundedness;
  j["reciprocal_xy"] = to_json(r.reciprocal.xy);
  j["reciprocal_yx"] = to_json(r.reciprocal.yx);
  if (r.domination) {
    const auto& h = *r.domination;
    j["domination"] = {{"holds", h.holds},
                       {"witness",
                        {{"K_indices", h.witness.k_indices},
                         {"x_j_indices", h.witness.anchor_indices},
                         {"c_j", h.witness.coefficients}}},
                       {"violating_index", optional_json(h.violating_y)},
                       {"log_margin", ext_json(h.log_margin)},
                       {"continuity", to_string(h.continuity)}};
  } else {
    j["domination"] = nullptr;
  }
  json h3 = {{"U_used", r.ratio_moment_ceiling}};
  if (r.ratio_moment) {
    const auto& h = *r.ratio_moment;
    h3["holds"] = h.holds;
    h3["status"] = to_string(h.status);
    h3["r"] = h.r;
    h3["x_o"] = h.x_o;
    h3["c"] = ext_json(h.c);
    h3["log_c"] = ext_json(h.log_c);
    h3["argmax"] = optional_json(h.argmax);
    h3["violating_index"] = optional_json(h.violating_index);
  } else {
    h3["holds"] = false;
    h3["precondition_failed"] = r.ratio_moment_precondition.value_or("");
  }
  j["ratio_moment"] = h3;
  if (r.radial)
    j["radial"] = {{"holds", r.radial->holds},
                   {"L_found", optional_json(r.radial->l_found)},
                   {"violating_sample", optional_json(r.radial->violating_sample)}};
  else
    j["radial"] = nullptr;
  if (r.matrix)
    j["gaussian_matrix"] = {{"xy_holds", r.matrix->xy_holds},
                            {"yx_holds", r.matrix->yx_holds},
                            {"xy_min_eig", r.matrix->xy_min_eig},
                            {"yx_min_eig", r.matrix->yx_min_eig}};
  else
    j["gaussian_matrix"] = nullptr;
  j["sufficient"] = r.sufficient;
  j["existence_certified"] = r.existence_certified();
  return j;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << kTraceHeader << '\n';
  for (const auto& t : trace)
    out << t.n << ',' << fmt(t.min_u) << ',' << fmt(t.max_u) << ',' << fmt(t.residual) << ','
        << fmt(t.min_phi) << ',' << fmt(t.normalization) << '\n';
}

std::string criteria_table(const CriteriaReport& r) {
  std::ostringstream os;
  auto row = [&os](const std::string& name, const std::string& verdict, const std::string& detail) {
    os << name;
    for (std::size_t k = name.size(); k < 18; ++k) os << ' ';
    os << verdict;
    for (std::size_t k = verdict.size(); k < 10; ++k) os << ' ';
    os << detail << '\n';
  };
  auto sum_detail = [](const SumVerdict& v) {
    std::string d = to_string(v.status) + ", value " + (v.value.is_inf() ? "inf" : fmt(v.value.to_double()));
    if (v.violating_index) d += ", index " + std::to_string(*v.violating_index);
    return d;
  };
  row("criterion", "verdict", "detail");
  row("positivity", r.positivity ? "pass" : "fail", "");
  row("boundedness", r.boundedness ? "pass" : "fail", "");
  row("reciprocal x->y", r.reciprocal.xy.finite ? "pass" : "fail", sum_detail(r.reciprocal.xy));
  row("reciprocal y->x", r.reciprocal.yx.finite ? "pass" : "fail", sum_detail(r.reciprocal.yx));
  if (r.domination) {
    const auto& h = *r.domination;
    row("domination", h.holds ? "pass" : "fail",
        h.holds ? std::to_string(h.witness.anchor_indices.size()) + " anchors"
                : "violated at y index " + std::to_string(*h.violating_y));
  } else {
    row("domination", "skipped", "no witness supplied");
  }
  if (r.ratio_moment) {
    const auto& h = *r.ratio_moment;
    std::string d = to_string(h.status) + ", r " + fmt(h.r) + ", c " +
                    (h.c.is_inf() ? "inf" : fmt(h.c.to_double()));
    if (h.violating_index) d += ", index " + std::to_string(*h.violating_index);
    row("ratio_moment", h.holds ? "pass" : "fail", d);
  } else {
    row("ratio_moment", "fail", "precondition " + r.ratio_moment_precondition.value_or(""));
  }
  if (r.radial)
    row("radial", r.radial->holds ? "pass" : "fail",
        r.radial->l_found ? "L = " + fmt(*r.radial->l_found) : "no candidate L");
  if (r.matrix)
    row("gaussian matrix", (r.matrix->xy_holds || r.matrix->yx_holds) ? "pass" : "fail",
        std::string("xy ") + (r.matrix->xy_holds ? "holds" : "fails") + ", yx " +
            (r.matrix->yx_holds ? "holds" : "fails"));
  os << "existence " << (r.existence_certified() ? "certified" : "not certified") << '\n';
  return os.str();
}

}  // namespace schrodinger
