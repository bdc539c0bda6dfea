#pragma once

#include "optdes/design.hpp"
#include "optdes/efficiency.hpp"
#include "optdes/equivalence.hpp"
#include "optdes/glmm.hpp"

#include <json.hpp>

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>

namespace optdes {

using Json = nlohmann::ordered_json;

// Shortest form up to 17 significant digits, locale independent.
std::string format_number(double v);
double parse_number(std::string_view text);

void write_design_csv(std::ostream& out, const ContinuousDesign& design);
ContinuousDesign read_design_csv(std::istream& in);

void write_exact_design_csv(std::ostream& out, const ExactDesign& design);
ExactDesign read_exact_design_csv(std::istream& in);

// x_1..x_k,psi over the scanned grid.
void write_sensitivity_csv(std::ostream& out, const EquivalenceReport& report);

// draw,theta_1..theta_p,efficiency
void write_ecdf_csv(std::ostream& out, const EfficiencyDistribution& dist);

// block_id,point_index,x_1..x_k,block_weight (ids and indices from 1)
void write_block_design_csv(std::ostream& out, const BlockDesign& design);
BlockDesign read_block_design_csv(std::istream& in);

// Throws ValidationError naming `where` if `obj` is not an object or has a
// key outside `allowed`.
void require_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where);

Json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const Json& j);
std::string model_fingerprint(const ModelSpec& model);

Json region_to_json(const DesignRegion& region);
DesignRegion region_from_json(const Json& j);

Json design_to_json(const ContinuousDesign& design, const ModelSpec& model);
ContinuousDesign design_from_json(const Json& j);
Json exact_design_to_json(const ExactDesign& design, const ModelSpec& model);
Json block_design_to_json(const BlockDesign& design, const ModelSpec& model);
BlockDesign block_design_from_json(const Json& j);

Json report_to_json(const EquivalenceReport& report);
Json ecdf_summary_to_json(const EfficiencyDistribution& dist);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& where);

}  // namespace optdes
