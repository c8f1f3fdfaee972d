#include "tablemaster/cost.hpp"

namespace tablemaster {

double predicted_cost(double k, double n, double e, double a, double b) {
  return (2 * k + 1) * n + (e + 2.5) * (a * b);
}

double CostTally::total() const {
  return structure_extraction + row_lookup + column_lookup + reconstruction + verbalization + reasoning;
}

CostTally tally_cost(const CostParameters& p, double fallback_area) {
  const double area = p.a * p.b;
  CostTally t;
  t.structure_extraction = p.k * p.n;
  t.row_lookup = p.k * p.n;
  t.column_lookup = p.n;
  t.reconstruction = p.e * area;
  t.verbalization = area;
  t.assessment_area = area;
  t.reasoning = 1.5 * area;
  t.fallback_area = fallback_area;
  return t;
}

nlohmann::json to_json(const CostParameters& p) {
  return {{"k", p.k}, {"n", p.n}, {"e", p.e}, {"a", p.a}, {"b", p.b}};
}

nlohmann::json to_json(const CostTally& t) {
  return {{"structure_extraction", t.structure_extraction},
          {"row_lookup", t.row_lookup},
          {"column_lookup", t.column_lookup},
          {"reconstruction", t.reconstruction},
          {"verbalization", t.verbalization},
          {"reasoning", t.reasoning},
          {"total", t.total()},
          {"assessment_area", t.assessment_area},
          {"fallback_area", t.fallback_area}};
}

}  // namespace tablemaster
