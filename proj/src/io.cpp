#include "optdes/io.hpp"

#include "optdes/errors.hpp"
#include "optdes/rng.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace optdes {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> read_csv(std::istream& in, std::vector<std::string>& header) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("CSV input is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  header = split_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ValidationError("CSV row " + std::to_string(rows.size() + 1) + " has " + std::to_string(cells.size()) +
                            " cells; the header has " + std::to_string(header.size()));
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::size_t count_x_columns(const std::vector<std::string>& header, std::size_t offset) {
  std::size_t k = 0;
  while (offset + k < header.size() && header[offset + k] == "x_" + std::to_string(k + 1)) ++k;
  if (k == 0) throw ValidationError("CSV header has no x_1 column");
  return k;
}

void write_x_header(std::ostream& out, std::size_t k) {
  for (std::size_t j = 0; j < k; ++j) out << (j ? "," : "") << "x_" << j + 1;
}

void write_point(std::ostream& out, const Point& x) {
  for (Eigen::Index j = 0; j < x.size(); ++j) out << (j ? "," : "") << format_number(x[j]);
}

Point parse_point(const std::vector<std::string>& cells, std::size_t offset, std::size_t k) {
  Point x(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) x[static_cast<Eigen::Index>(j)] = parse_number(cells[offset + j]);
  return x;
}

const char* family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::normal: return "normal";
    case FamilyKind::binomial: return "binomial";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::gamma: return "gamma";
  }
  return "";
}

FamilyKind parse_family(const std::string& s) {
  if (s == "normal") return FamilyKind::normal;
  if (s == "binomial") return FamilyKind::binomial;
  if (s == "poisson") return FamilyKind::poisson;
  if (s == "gamma") return FamilyKind::gamma;
  throw ValidationError("unknown family '" + s + "'");
}

LinkFunction parse_link(const std::string& s, const Json& shape) {
  const bool needs_shape = s == "boxcox" || s == "power";
  if (needs_shape && !shape.is_number()) throw ValidationError("link '" + s + "' needs a numeric link_shape");
  if (!needs_shape && !shape.is_null()) throw ValidationError("link '" + s + "' takes no link_shape");
  if (s == "identity") return LinkFunction::identity();
  if (s == "logistic") return LinkFunction::logistic();
  if (s == "probit") return LinkFunction::probit();
  if (s == "cloglog") return LinkFunction::cloglog();
  if (s == "loglog") return LinkFunction::loglog();
  if (s == "log") return LinkFunction::log();
  if (s == "boxcox") return LinkFunction::boxcox(shape.get<double>());
  if (s == "power") return LinkFunction::power(shape.get<double>());
  throw ValidationError("unknown link '" + s + "'");
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + " must be a number");
  return j.get<double>();
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError("'" + std::string(text) + "' is not a number");
  return v;
}

void write_design_csv(std::ostream& out, const ContinuousDesign& design) {
  write_x_header(out, design.k());
  out << ",weight\n";
  for (std::size_t i = 0; i < design.size(); ++i) {
    write_point(out, design.points[i]);
    out << ',' << format_number(design.weights[i]) << '\n';
  }
}

ContinuousDesign read_design_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_csv(in, header);
  const std::size_t k = count_x_columns(header, 0);
  if (header.size() != k + 1 || header[k] != "weight") throw ValidationError("design CSV must end with a weight column");
  ContinuousDesign d;
  for (const auto& r : rows) {
    d.points.push_back(parse_point(r, 0, k));
    d.weights.push_back(parse_number(r[k]));
  }
  return d;
}

void write_exact_design_csv(std::ostream& out, const ExactDesign& design) {
  write_x_header(out, design.points.empty() ? 0 : static_cast<std::size_t>(design.points.front().size()));
  out << ",reps\n";
  for (std::size_t i = 0; i < design.size(); ++i) {
    write_point(out, design.points[i]);
    out << ',' << design.reps[i] << '\n';
  }
}

ExactDesign read_exact_design_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_csv(in, header);
  const std::size_t k = count_x_columns(header, 0);
  if (header.size() != k + 1 || header[k] != "reps") throw ValidationError("exact design CSV must end with a reps column");
  ExactDesign d;
  for (const auto& r : rows) {
    d.points.push_back(parse_point(r, 0, k));
    const double reps = parse_number(r[k]);
    if (reps != std::floor(reps)) throw ValidationError("replication counts must be integers");
    d.reps.push_back(static_cast<int>(reps));
  }
  return d;
}

void write_sensitivity_csv(std::ostream& out, const EquivalenceReport& report) {
  const std::size_t k = report.grid.empty() ? static_cast<std::size_t>(report.argmin.size())
                                            : static_cast<std::size_t>(report.grid.front().size());
  write_x_header(out, k);
  out << ",psi\n";
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    write_point(out, report.grid[i]);
    out << ',' << format_number(report.psi[i]) << '\n';
  }
}

void write_ecdf_csv(std::ostream& out, const EfficiencyDistribution& dist) {
  const std::size_t p = dist.draws.empty() ? 0 : static_cast<std::size_t>(dist.draws.front().size());
  out << "draw";
  for (std::size_t j = 0; j < p; ++j) out << ",theta_" << j;
  out << ",efficiency\n";
  for (std::size_t i = 0; i < dist.draws.size(); ++i) {
    out << i + 1;
    for (std::size_t j = 0; j < p; ++j) out << ',' << format_number(dist.draws[i][static_cast<Eigen::Index>(j)]);
    out << ',' << format_number(dist.efficiencies[i]) << '\n';
  }
}

void write_block_design_csv(std::ostream& out, const BlockDesign& design) {
  const std::size_t k = design.blocks.empty() || design.blocks.front().empty()
                            ? 0
                            : static_cast<std::size_t>(design.blocks.front().front().size());
  out << "block_id,point_index,";
  write_x_header(out, k);
  out << ",block_weight\n";
  for (std::size_t l = 0; l < design.size(); ++l)
    for (std::size_t j = 0; j < design.blocks[l].size(); ++j) {
      out << l + 1 << ',' << j + 1 << ',';
      write_point(out, design.blocks[l][j]);
      out << ',' << format_number(design.weights[l]) << '\n';
    }
}

BlockDesign read_block_design_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_csv(in, header);
  if (header.size() < 4 || header[0] != "block_id" || header[1] != "point_index")
    throw ValidationError("block CSV must start with block_id,point_index");
  const std::size_t k = count_x_columns(header, 2);
  if (header.size() != k + 3 || header.back() != "block_weight")
    throw ValidationError("block CSV must end with a block_weight column");
  BlockDesign d;
  for (const auto& r : rows) {
    const auto id = static_cast<std::size_t>(parse_number(r[0]));
    if (id < 1 || id > d.blocks.size() + 1) throw ValidationError("block ids must be consecutive from 1");
    if (id == d.blocks.size() + 1) {
      d.blocks.emplace_back();
      d.weights.push_back(parse_number(r.back()));
    }
    d.blocks[id - 1].push_back(parse_point(r, 2, k));
  }
  return d;
}

void require_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + " must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = get_number(j[i], where);
  return v;
}

Json region_to_json(const DesignRegion& region) {
  Json j;
  Json bounds = Json::array();
  for (std::size_t a = 0; a < region.dimension(); ++a) {
    if (region.is_unbounded(a))
      bounds.push_back(nullptr);
    else
      bounds.push_back({region.bound(a).lower, region.bound(a).upper});
  }
  j["bounds"] = bounds;
  if (region.unbounded_axis()) j["unbounded_axis"] = *region.unbounded_axis() + 1;
  return j;
}

DesignRegion region_from_json(const Json& j) {
  require_keys(j, {"bounds", "unbounded_axis"}, "region");
  if (!j.contains("bounds") || !j["bounds"].is_array() || j["bounds"].empty())
    throw ValidationError("region.bounds must be a non-empty array");
  std::optional<std::size_t> axis;
  if (j.contains("unbounded_axis") && !j["unbounded_axis"].is_null()) {
    if (!j["unbounded_axis"].is_number_integer() || j["unbounded_axis"].get<long long>() < 1)
      throw ValidationError("region.unbounded_axis must be a positive integer (1-based)");
    axis = static_cast<std::size_t>(j["unbounded_axis"].get<long long>() - 1);
  }
  std::vector<Interval> bounds;
  for (std::size_t a = 0; a < j["bounds"].size(); ++a) {
    const Json& b = j["bounds"][a];
    if (axis && *axis == a && b.is_null()) {
      bounds.push_back({});
      continue;
    }
    if (!b.is_array() || b.size() != 2)
      throw ValidationError("region.bounds[" + std::to_string(a) + "] must be [lower, upper]");
    bounds.push_back({get_number(b[0], "region bound"), get_number(b[1], "region bound")});
  }
  return DesignRegion(std::move(bounds), axis);
}

Json model_to_json(const ModelSpec& model) {
  Json j;
  j["family"] = family_name(model.family.kind);
  j["dispersion"] = model.family.dispersion;
  j["link"] = model.link.name();
  if (model.link.kind() == LinkKind::boxcox || model.link.kind() == LinkKind::power)
    j["link_shape"] = model.link.shape();
  if (model.basis == ModelBasis::first_order(model.k())) {
    j["basis"] = "first_order";
  } else if (model.basis == ModelBasis::second_order(model.k())) {
    j["basis"] = "second_order";
  } else {
    Json terms = Json::array();
    for (const auto& t : model.basis.terms()) terms.push_back(t.exponents);
    j["basis"] = terms;
  }
  j["region"] = region_to_json(model.region);
  return j;
}

ModelSpec model_from_json(const Json& j) {
  require_keys(j, {"family", "dispersion", "link", "link_shape", "basis", "region"}, "model");
  for (const char* key : {"family", "link", "basis", "region"})
    if (!j.contains(key)) throw ValidationError(std::string("model.") + key + " is required");
  if (!j["family"].is_string() || !j["link"].is_string()) throw ValidationError("model.family and model.link must be strings");
  Family fam{parse_family(j["family"].get<std::string>()), 1.0};
  if (j.contains("dispersion")) {
    fam.dispersion = get_number(j["dispersion"], "model.dispersion");
    if (!(fam.dispersion > 0.0)) throw ValidationError("model.dispersion must be positive");
  }
  const LinkFunction link = parse_link(j["link"].get<std::string>(), j.contains("link_shape") ? j["link_shape"] : Json());
  DesignRegion region = region_from_json(j["region"]);
  const std::size_t k = region.dimension();
  ModelBasis basis;
  const Json& b = j["basis"];
  if (b == "first_order") {
    basis = ModelBasis::first_order(k);
  } else if (b == "second_order") {
    basis = ModelBasis::second_order(k);
  } else if (b.is_array()) {
    std::vector<Term> terms;
    for (const auto& t : b) {
      if (!t.is_array() || t.size() != k) throw ValidationError("each basis term needs k exponents");
      Term term;
      for (const auto& e : t) {
        if (!e.is_number_integer()) throw ValidationError("basis exponents must be integers");
        term.exponents.push_back(e.get<int>());
      }
      terms.push_back(std::move(term));
    }
    basis = ModelBasis(k, std::move(terms));
  } else {
    throw ValidationError("model.basis must be \"first_order\", \"second_order\" or a list of exponent vectors");
  }
  ModelSpec model{fam, link, std::move(basis), std::move(region)};
  model.validate();
  return model;
}

std::string model_fingerprint(const ModelSpec& model) {
  const std::string text = model_to_json(model).dump();
  char buf[17];
  const std::uint64_t h = hash_name(text);
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = digits[(h >> (60 - 4 * i)) & 0xF];
  buf[16] = '\0';
  return model.family.name() + "-" + model.link.name() + "-p" + std::to_string(model.p()) + "-" + buf;
}

Json design_to_json(const ContinuousDesign& design, const ModelSpec& model) {
  Json j;
  Json pts = Json::array();
  for (const auto& x : design.points) pts.push_back(vector_to_json(x));
  j["points"] = pts;
  j["weights"] = design.weights;
  j["region"] = region_to_json(model.region);
  j["model"] = model_fingerprint(model);
  return j;
}

ContinuousDesign design_from_json(const Json& j) {
  require_keys(j, {"points", "weights", "region", "model"}, "design");
  if (!j.contains("points") || !j.contains("weights")) throw ValidationError("design needs points and weights");
  ContinuousDesign d;
  for (const auto& x : j["points"]) d.points.push_back(vector_from_json(x, "design point"));
  const Vector w = vector_from_json(j["weights"], "design weights");
  d.weights.assign(w.data(), w.data() + w.size());
  if (d.points.size() != d.weights.size()) throw ValidationError("design needs one weight per point");
  return d;
}

Json exact_design_to_json(const ExactDesign& design, const ModelSpec& model) {
  Json j;
  Json pts = Json::array();
  for (const auto& x : design.points) pts.push_back(vector_to_json(x));
  j["points"] = pts;
  j["reps"] = design.reps;
  j["n"] = design.n();
  j["region"] = region_to_json(model.region);
  j["model"] = model_fingerprint(model);
  return j;
}

Json block_design_to_json(const BlockDesign& design, const ModelSpec& model) {
  Json j;
  Json blocks = Json::array();
  for (const auto& b : design.blocks) {
    Json pts = Json::array();
    for (const auto& x : b) pts.push_back(vector_to_json(x));
    blocks.push_back(pts);
  }
  j["blocks"] = blocks;
  j["weights"] = design.weights;
  j["region"] = region_to_json(model.region);
  j["model"] = model_fingerprint(model);
  return j;
}

BlockDesign block_design_from_json(const Json& j) {
  require_keys(j, {"blocks", "weights", "region", "model"}, "block design");
  if (!j.contains("blocks") || !j.contains("weights")) throw ValidationError("block design needs blocks and weights");
  BlockDesign d;
  for (const auto& b : j["blocks"]) {
    Block block;
    for (const auto& x : b) block.push_back(vector_from_json(x, "block point"));
    d.blocks.push_back(std::move(block));
  }
  const Vector w = vector_from_json(j["weights"], "block weights");
  d.weights.assign(w.data(), w.data() + w.size());
  if (d.blocks.size() != d.weights.size()) throw ValidationError("block design needs one weight per block");
  return d;
}

Json report_to_json(const EquivalenceReport& report) {
  Json j;
  j["min_psi"] = report.min_psi;
  j["argmin"] = vector_to_json(report.argmin);
  j["tolerance"] = report.tolerance;
  j["is_optimal"] = report.is_optimal;
  j["grid_points"] = report.grid.size();
  return j;
}

Json ecdf_summary_to_json(const EfficiencyDistribution& dist) {
  Json j;
  j["n"] = dist.efficiencies.size();
  j["min"] = dist.min;
  j["q25"] = dist.q25;
  j["median"] = dist.median;
  j["q75"] = dist.q75;
  j["max"] = dist.max;
  j["rejected"] = dist.rejected;
  return j;
}

}  // namespace optdes
