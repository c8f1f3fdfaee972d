#pragma once

#include "json.hpp"

namespace tablemaster {

// Area-unit cost of one run. k: peek rows, n: table columns, e: columns added
// by re-construction, a x b: focus table.
double predicted_cost(double k, double n, double e, double a, double b);
inline double predicted_cost(double k, double n, double a, double b) { return predicted_cost(k, n, 1.5, a, b); }

struct CostParameters {
  double k = 0;
  double n = 0;
  double e = 0;
  double a = 0;
  double b = 0;
};

struct CostTally {
  double structure_extraction = 0;  // k·n
  double row_lookup = 0;            // k·n
  double column_lookup = 0;         // n
  double reconstruction = 0;        // e·a·b
  double verbalization = 0;         // a·b
  double reasoning = 0;             // 1.5·a·b
  // Processed but outside the closed form, so excluded from total().
  double assessment_area = 0;       // a·b seen by strategy assessment
  double fallback_area = 0;         // full-table retry

  double total() const;
};

CostTally tally_cost(const CostParameters& p, double fallback_area = 0);

nlohmann::json to_json(const CostParameters& p);
nlohmann::json to_json(const CostTally& t);

}  // namespace tablemaster
