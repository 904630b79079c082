#include "sstlab/report.hpp"

#include <cmath>
#include <cstdio>

namespace sstlab {

std::string artifact_name(const std::string& experiment, std::uint64_t seed,
                          const std::string& ext) {
  return experiment + "-seed" + std::to_string(seed) + "." + ext;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// JSON has no infinities; large or infinite values are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

Json check(const AssumptionCheck& c) {
  Json j;
  j["verdict"] = verdict_name(c.verdict);
  j["evidence"] = Json::array();
  for (const SeriesEvidence& e : c.evidence) j["evidence"].push_back(to_json(e));
  return j;
}

}  // namespace

Json to_json(const SeriesEvidence& e) {
  Json j;
  j["verdict"] = verdict_name(e.verdict);
  j["terms"] = e.terms;
  j["partial_sum"] = number(e.partial_sum());
  j["last_term"] = number(e.last_term());
  j["last_ratio"] = number(e.last_ratio);
  j["tail_estimate"] = number(e.tail_estimate);
  j["reason"] = e.reason;
  return j;
}

Json to_json(const AssumptionReport& r) {
  Json j;
  j["positive_recurrent"] = check(r.positive_recurrent);
  j["nonexplosive"] = check(r.nonexplosive);
  j["diag_integrable"] = check(r.diag_integrable);
  return j;
}

Json to_json(const CriterionReport& r) {
  Json j;
  j["verdict"] = verdict_name(r.verdict);
  j["flagged"] = r.flagged;
  j["sides"] = Json::array();
  for (const CriterionSide& s : r.sides) {
    Json side{{"label", s.label}};
    side.update(to_json(s.evidence));
    j["sides"].push_back(side);
  }
  j["assumptions"] = to_json(r.assumptions);
  return j;
}

Json to_json(const ResidualReport& r) {
  Json j;
  j["max_interior"] = number(static_cast<double>(r.max_interior));
  j["max_boundary"] = number(static_cast<double>(r.max_boundary));
  j["interior_rows"] = r.interior_rows;
  j["boundary_rows"] = r.boundary_rows;
  j["worst"] = r.worst;
  return j;
}

Json to_json(const ChiSquare& c) {
  Json j;
  j["statistic"] = number(c.statistic);
  j["dof"] = c.dof;
  j["bins"] = c.bins;
  j["samples"] = c.samples;
  j["p_value"] = number(c.p_value);
  return j;
}

Json to_json(const AbsorptionStats& s) {
  Json j;
  j["trials"] = s.trials;
  j["absorbed"] = s.absorbed;
  j["non_absorbed"] = s.non_absorbed();
  j["undetected"] = s.undetected;
  j["ci_sigma"] = s.ci_sigma;
  if (!s.times.empty()) {
    double sum = 0;
    for (double t : s.times) sum += t;
    j["mean_absorption_time"] = number(sum / static_cast<double>(s.times.size()));
    j["median_absorption_time"] = number(s.times[s.times.size() / 2]);
  }
  return j;
}

void write_csv_header(std::ostream& os, const std::string& kind, const std::string& columns) {
  os << "# sstlab " << kind << " v1\n" << columns << '\n';
}

void write_separation_csv(std::ostream& os, const SeparationCurve& c) {
  write_csv_header(os, "separation", "t,separation");
  for (const SeparationPoint& p : c.points) {
    os << format_double(p.t) << ',' << format_double(p.separation) << '\n';
  }
  os << "# window " << c.window << " tail_mass " << format_double(c.tail_mass) << '\n';
}

void write_bound_csv(std::ostream& os, const std::vector<BoundRow>& rows) {
  write_csv_header(os, "sst", "t,separation,survival,ci,bound_ok,sharp_ok");
  for (const BoundRow& r : rows) {
    os << format_double(r.t) << ',' << format_double(r.separation) << ','
       << format_double(r.survival) << ',' << format_double(r.ci) << ',' << (r.bound_ok ? 1 : 0)
       << ',' << (r.sharp_ok ? 1 : 0) << '\n';
  }
}

void write_survival_csv(std::ostream& os, const AbsorptionStats& s) {
  write_csv_header(os, "survival", "t,survival,ci");
  for (const SurvivalPoint& p : s.grid) {
    os << format_double(p.t) << ',' << format_double(p.survival) << ',' << format_double(p.ci)
       << '\n';
  }
}

void write_criterion_csv(std::ostream& os, const CriterionReport& r) {
  write_csv_header(os, "criterion", "side,i,term,partial_sum");
  for (const CriterionSide& s : r.sides) {
    for (size_t i = 0; i < s.terms.size(); ++i) {
      os << s.label << ',' << i + 1 << ',' << format_double(s.terms[i]) << ','
         << format_double(s.partial_sums[i]) << '\n';
    }
  }
}

}  // namespace sstlab
