#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "npfb/barriers.hpp"
#include "npfb/fb_analysis.hpp"
#include "npfb/solver.hpp"

namespace npfb {

using Json = nlohmann::json;

/// Report skeleton: {check, params, per_point[], summary{min_margin, slope,
/// delta_hat, C_hats}, witnesses[], passed}. Summary fields a check does not
/// produce stay null.
Json make_report(const std::string& check, Json params);

Json to_json(const GridIndex& idx, const SpaceTimeGrid& grid);
Json to_json(const NodeIndex& node, const SpaceTimeGrid& grid);
Json to_json(const SolveReport& r);
Json to_json(const Barrier& b);

Json nondegeneracy_json(const NondegeneracyReport& r, const SpaceTimeGrid& grid, int k);
Json growth_json(const GrowthStats& g, const SpaceTimeGrid& grid, double mu0_value);
Json porosity_json(const PorosityReport& r, const SpaceTimeGrid& grid);
Json doubling_json(const std::vector<std::pair<GridIndex, DoublingReport>>& reports,
                   const SpaceTimeGrid& grid);
Json growth_constant_json(const GrowthConstantReport& r, const SpaceTimeGrid& grid);
Json lip_json(const LipEstimate& r, const SpaceTimeGrid& grid);
Json time_holder_json(const TimeHolderReport& r, const SpaceTimeGrid& grid);
Json gradient_json(const GradientBands& bands, double L_bar, const GradientEnvelopeCheck& c,
                   const SpaceTimeGrid& grid);

/// center (node indices), r, sup rows per growth center.
void write_growth_csv(const GrowthStats& g, const SpaceTimeGrid& grid, const std::string& path);
/// center, j, radius, S rows per doubling center.
void write_doubling_csv(const std::vector<std::pair<GridIndex, DoublingReport>>& reports,
                        const SpaceTimeGrid& grid, const std::string& path);

void write_json(const Json& j, const std::string& path);

}  // namespace npfb
