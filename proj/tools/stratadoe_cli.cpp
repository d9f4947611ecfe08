// Command-line front end: builds the scenario presets (or a user scenario
// from a JSON config), emits run tables, alias and stratum reports, screens
// effect estimates against PSE(50) thresholds, fits the mixed model, and
// simulates response data.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "stratadoe/csv.hpp"
#include "stratadoe/scenarios.hpp"
#include "stratadoe/screening.hpp"

namespace fs = std::filesystem;
using namespace stratadoe;

namespace {

struct CommonOpts {
  std::string preset = "paper";
  std::string config;
  std::string out;
};

fs::path out_dir(const CommonOpts& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("STRATADOE_OUT")) return env;
  return ".";
}

PresetArtifacts load_scenario(const CommonOpts& c) {
  if (!c.config.empty())
    return build_scenario_from_config(read_file(c.config));
  return build_preset(c.preset);
}

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--preset", c.preset, "Built-in scenario id")
      ->check(CLI::IsMember(preset_ids()));
  cmd->add_option("--config", c.config, "JSON scenario description (overrides --preset)");
  cmd->add_option("--out", c.out, "Output directory (default: $STRATADOE_OUT or .)");
}

std::string emit_alias_report(const PresetArtifacts& pa) {
  std::ostringstream os;
  os << "class_rep,truncated_members\n";
  for (const auto& ac : pa.design.alias_classes())
    os << word_label(ac.rep) << ",\"" << ac.truncated_label() << "\"\n";
  return os.str();
}

std::string emit_blocking_report(const PresetArtifacts& pa) {
  std::ostringstream os;
  os << "pseudo,word,confounded_class\n";
  for (std::size_t i = 0; i < pa.column_pseudos.size(); ++i) {
    Word w = pa.column_pseudos[i];
    os << 'p' << i + 1 << ',' << word_label(w) << ",\""
       << pa.design.class_of(w).truncated_label() << "\"\n";
  }
  return os.str();
}

std::string emit_extension_report(const PresetArtifacts& pa) {
  std::ostringstream os;
  os << "option,word1,word2,word3,class_size\n";
  auto exts = enumerate_four_level_extensions(pa.base, pa.blocking.subgroup);
  int opt = 1;
  for (const auto& e : exts) {
    os << opt++;
    for (Word w : e.triple)
      os << ",\"" << pa.base.class_of_image(w).truncated_label() << "\"";
    os << ',' << e.n_class_members << '\n';
  }
  return os.str();
}

// Chip responses arranged per run-table row for the screening module.
std::vector<std::vector<std::optional<double>>> values_by_run(
    const ChipDataset& ds, const RunTable& rt) {
  std::map<std::tuple<int, int, int>, std::size_t> run_of;
  for (std::size_t i = 0; i < rt.rows.size(); ++i) {
    const auto& r = rt.rows[i];
    run_of[{r.week, r.plate, r.column}] = i;
  }
  std::vector<std::vector<std::optional<double>>> values(
      rt.rows.size(), std::vector<std::optional<double>>(kRowsPerPlate));
  for (const auto& c : ds.chips) {
    auto it = run_of.find({c.week, c.plate, c.column});
    if (it == run_of.end() || c.row < 1 || c.row > kRowsPerPlate)
      throw ValidationError("UnknownChip",
                            "chip does not match any run-table position");
    values[it->second][static_cast<std::size_t>(c.row - 1)] = c.response;
  }
  return values;
}

std::vector<int> parse_rows(const std::string& rows) {
  std::vector<int> out;
  std::stringstream ss(rows);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto dash = tok.find('-');
    if (dash == std::string::npos) {
      out.push_back(std::stoi(tok));
    } else {
      int lo = std::stoi(tok.substr(0, dash)), hi = std::stoi(tok.substr(dash + 1));
      for (int r = lo; r <= hi; ++r) out.push_back(r);
    }
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Blocked split-strip-plot two-level design construction and analysis"};
  app.require_subcommand(1);

  CommonOpts construct_o, alias_o, strata_o, screen_o, fit_o, sim_o;
  std::string screen_data, fit_data, screen_rows = "1-8";
  double screen_alpha = 0.10, fit_alpha = 0.10;
  std::uint64_t screen_seed = 987654321, sim_seed = 20260826;
  int sim_missing = 0;

  auto* construct = app.add_subcommand("construct",
      "Build a design and write run_table.csv, alias_report.csv, stratum_report.csv");
  add_common(construct, construct_o);

  auto* alias = app.add_subcommand("alias",
      "Print the alias classes, blocking pseudo-factors and four-level options");
  add_common(alias, alias_o);

  auto* strata = app.add_subcommand("strata",
      "Print the effect-to-stratum allocation with df counts");
  add_common(strata, strata_o);

  auto* screen = app.add_subcommand("screen",
      "Estimate effects per stratum and flag them against PSE(50) limits");
  add_common(screen, screen_o);
  screen->add_option("--data", screen_data, "Chip response CSV")->required();
  screen->add_option("--rows", screen_rows, "Plate rows to average, e.g. 1-8 or 2,3,6");
  screen->add_option("--alpha", screen_alpha, "Significance level");
  screen->add_option("--seed", screen_seed, "Monte-Carlo seed for the critical value");

  auto* fit = app.add_subcommand("fit",
      "REML mixed-model fit: variance components, F-tests, group means");
  add_common(fit, fit_o);
  fit->add_option("--data", fit_data, "Chip response CSV")->required();
  fit->add_option("--alpha", fit_alpha, "Level for the LSD intervals");

  auto* sim = app.add_subcommand("simulate",
      "Draw a synthetic chip response CSV for the chosen scenario");
  add_common(sim, sim_o);
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--missing", sim_missing, "Number of chips to blank out");

  auto* scenario = app.add_subcommand("scenario", "Scenario utilities");
  auto* scenario_list = scenario->add_subcommand("list", "List built-in presets");

  CLI11_PARSE(app, argc, argv);

  if (construct->parsed()) {
    auto pa = load_scenario(construct_o);
    fs::path dir = out_dir(construct_o);
    write_file(dir / "run_table.csv", emit_run_table(pa.run_table));
    write_file(dir / "alias_report.csv", emit_alias_report(pa));
    write_file(dir / "stratum_report.csv", emit_stratum_report_csv(pa.strata));
    std::cout << emit_stratum_report_text(pa.strata);
    std::cout << "wrote run_table.csv, alias_report.csv, stratum_report.csv to "
              << dir.string() << "\n";
  } else if (alias->parsed()) {
    auto pa = load_scenario(alias_o);
    std::cout << emit_alias_report(pa) << '\n'
              << emit_blocking_report(pa) << '\n'
              << emit_extension_report(pa);
  } else if (strata->parsed()) {
    auto pa = load_scenario(strata_o);
    std::cout << emit_stratum_report_text(pa.strata);
  } else if (screen->parsed()) {
    auto pa = load_scenario(screen_o);
    auto ds = parse_chip_csv(read_file(screen_data));
    auto values = values_by_run(ds, pa.run_table);
    auto means = row_average(values, parse_rows(screen_rows));
    ScreeningConfig cfg;
    cfg.alpha = screen_alpha;
    cfg.seed = screen_seed;
    auto sets = estimate_effects(means, pa.run_table, pa.strata, cfg);
    std::string report = emit_screening_report(sets);
    write_file(out_dir(screen_o) / "screening_report.csv", report);
    std::cout << report;
  } else if (fit->parsed()) {
    auto pa = load_scenario(fit_o);
    auto ds = parse_chip_csv(read_file(fit_data));
    auto model = FittedModel::fit(ds, preset_model_spec(pa));
    fs::path dir = out_dir(fit_o);
    write_file(dir / "variance_components.csv", model.emit_variance_csv());
    write_file(dir / "f_tests.csv", model.emit_ftest_csv());
    std::ostringstream means_csv;
    for (const char* term : {"gh", "cd", "column", "row"}) {
      auto mt = model.means(term, fit_alpha);
      means_csv << FittedModel::emit_means_csv(mt);
    }
    write_file(dir / "means.csv", means_csv.str());
    std::cout << model.emit_variance_csv() << '\n' << model.emit_ftest_csv();
    std::cout << "wrote variance_components.csv, f_tests.csv, means.csv to "
              << dir.string() << "\n";
  } else if (sim->parsed()) {
    auto pa = load_scenario(sim_o);
    // Effect sizes and variance components in the ballpark of the case
    // study, on the regression (half-effect) scale.
    std::map<Word, double> beta{
        {parse_word("cd", pa.design.n_factors()), -2.7},
        {parse_word("a", pa.design.n_factors()), -2.4},
        {parse_word("d", pa.design.n_factors()), -2.3},
        {parse_word("ah", pa.design.n_factors()), -1.5},
        {parse_word("c", pa.design.n_factors()), 1.1},
    };
    VarianceComponents vc;
    vc.tube = 2.5;
    vc.column = 6.2;
    vc.row = 1.9;
    vc.error = 179.8;
    auto ds = simulate_response(pa.run_table, beta, 329.0, vc, sim_seed);
    if (sim_missing > 0) inject_missing(ds, sim_missing, sim_seed + 1);
    std::string csv = emit_chip_csv(ds);
    write_file(out_dir(sim_o) / "simulated_chips.csv", csv);
    std::cout << "wrote simulated_chips.csv ("
              << ds.chips.size() - static_cast<std::size_t>(sim_missing)
              << " observed chips) to " << out_dir(sim_o).string() << "\n";
  } else if (scenario->parsed()) {
    if (scenario_list->parsed()) {
      for (const auto& id : preset_ids()) std::cout << id << '\n';
    } else {
      std::cerr << "scenario: expected a subcommand (list)\n";
      return 2;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "error (" << e.name() << "): " << e.what() << '\n';
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "error (" << e.name() << "): " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error (" << e.name() << "): " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
