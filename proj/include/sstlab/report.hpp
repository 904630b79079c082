#pragma once

#include <ostream>
#include <string>

#include "json.hpp"
#include "sstlab/analysis.hpp"

namespace sstlab {

using Json = nlohmann::ordered_json;

// Artifact file name from (experiment, seed), e.g. "sst-seed42.csv".
std::string artifact_name(const std::string& experiment, std::uint64_t seed,
                          const std::string& ext);

// Doubles are written with %.17g so reruns compare byte for byte.
std::string format_double(double v);

Json to_json(const SeriesEvidence& e);
Json to_json(const AssumptionReport& r);
Json to_json(const CriterionReport& r);
Json to_json(const ResidualReport& r);
Json to_json(const ChiSquare& c);
Json to_json(const AbsorptionStats& s);  // summary without the raw times

// Header "# sstlab <kind> v1" followed by the column line.
void write_csv_header(std::ostream& os, const std::string& kind, const std::string& columns);

// t, separation
void write_separation_csv(std::ostream& os, const SeparationCurve& c);
// t, separation, survival, ci, bound_ok, sharp_ok
void write_bound_csv(std::ostream& os, const std::vector<BoundRow>& rows);
// t, survival, ci (when no separation curve is available)
void write_survival_csv(std::ostream& os, const AbsorptionStats& s);
// i, term, partial_sum per criterion side
void write_criterion_csv(std::ostream& os, const CriterionReport& r);

}  // namespace sstlab
