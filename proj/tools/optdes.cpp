#include "optdes/errors.hpp"
#include "optdes/parallel.hpp"
#include "reproduce.hpp"
#include "run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

constexpr const char* kVersion = "1.0.0";

std::size_t default_threads() {
  const char* env = std::getenv("OPTDES_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const unsigned long n = std::strtoul(env, &end, 10);
  if (*end != '\0') {
    std::cerr << "ignoring OPTDES_THREADS='" << env << "': not a number\n";
    return 0;
  }
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"D-optimal designs for generalized linear (mixed) models"};
  app.require_subcommand(1);
  std::size_t threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (0 = all cores; env OPTDES_THREADS)");

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Execute a JSON run configuration");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("--set", overrides, "Override a leaf, e.g. --set options.multistarts=4");

  std::string table_id;
  std::string out_dir;
  std::uint64_t seed = 1;
  bool list = false;
  auto* repro = app.add_subcommand("reproduce", "Recompute a published table and diff it against the stored values");
  repro->add_option("table_id", table_id, "Table identifier");
  repro->add_option("--out", out_dir, "Directory for <id>.csv and <id>.json");
  repro->add_option("--seed", seed, "Seed for stochastic steps");
  repro->add_flag("--list", list, "List table identifiers");

  app.add_subcommand("schema", "Print the configuration JSON schema");
  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : optdes::kExitValidation;
  }
  optdes::set_thread_count(threads);

  try {
    if (app.got_subcommand("version")) {
      std::cout << "optdes " << kVersion << "\n";
    } else if (app.got_subcommand("schema")) {
      std::cout << optdes::config_schema().dump(2) << "\n";
    } else if (app.got_subcommand("run")) {
      std::ifstream in(config_path);
      if (!in) throw optdes::ValidationError("cannot read " + config_path);
      optdes::Json cfg = optdes::Json::parse(in);
      for (const auto& o : overrides) optdes::apply_override(cfg, o);
      const optdes::RunOutcome out = optdes::run_config(cfg);
      std::cout << out.summary << "\n";
      for (const auto& f : out.files) std::cout << "wrote " << f.string() << "\n";
    } else {
      if (list || table_id.empty()) {
        for (const auto& id : optdes::reproduction_ids()) std::cout << id << "\n";
        if (!list) return optdes::kExitValidation;
        return optdes::kExitOk;
      }
      const optdes::Reproduction r = optdes::reproduce(table_id, seed);
      optdes::print_reproduction(std::cout, r);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(std::filesystem::path(out_dir) / (r.id + ".csv"), std::ios::binary);
        optdes::write_cells_csv(csv, r);
        std::ofstream js(std::filesystem::path(out_dir) / (r.id + ".json"), std::ios::binary);
        js << optdes::reproduction_to_json(r).dump(2) << "\n";
      }
    }
  } catch (...) {
    return optdes::exit_code_for_current_exception(std::cerr);
  }
  return optdes::kExitOk;
}
