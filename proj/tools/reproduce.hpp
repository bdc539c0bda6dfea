#pragma once

#include "optdes/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace optdes {

enum class Comparison { within, at_most, at_least };

// One computed quantity next to its tabulated value.
struct Cell {
  std::string label;
  double computed = 0.0;
  double golden = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::within;

  bool pass() const;
};

struct Reproduction {
  std::string id;
  std::string title;
  std::vector<Cell> cells;
  // Designs and intermediate quantities behind the cells.
  Json details;

  bool pass() const;
};

std::vector<std::string> reproduction_ids();

// Throws ValidationError for an unknown id.
Reproduction reproduce(const std::string& id, std::uint64_t seed = 1);

// label,computed,golden,tolerance,comparison,pass
void write_cells_csv(std::ostream& out, const Reproduction& r);
Json reproduction_to_json(const Reproduction& r);
// Aligned text table for terminals.
void print_reproduction(std::ostream& out, const Reproduction& r);

}  // namespace optdes
