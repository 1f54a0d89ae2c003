// samred command-line tool: discretize, reduce, certify, campaign, generate.
//
// Exit codes: 0 ok, 2 parse error, 3 validation error, 4 infeasible request,
// 5 certificate refuted, 6 stability hypothesis violated (plant not
// Hurwitz), 1 internal numerical error.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "samred/samred.hpp"

namespace {

using namespace samred;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitParse = 2;
constexpr int kExitValidate = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitRefuted = 5;
constexpr int kExitHypothesis = 6;

std::vector<double> parse_grid_spec(const std::string& spec) {
  std::vector<double> intervals;
  std::size_t begin = 0;
  while (begin <= spec.size()) {
    const std::size_t comma = spec.find(',', begin);
    const std::string token =
        spec.substr(begin, comma == std::string::npos ? comma : comma - begin);
    if (!token.empty()) {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) {
        throw InputError("grid: cannot parse interval '" + token + "'");
      }
      intervals.push_back(v);
    }
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (intervals.empty()) throw InputError("grid: no intervals given");
  return intervals;
}

// Spectrum tokens: "-3", "-0.5+2i", "-0.5-2i" (comma separated).
std::vector<std::complex<double>> parse_spectrum_spec(const std::string& spec) {
  std::vector<std::complex<double>> out;
  std::size_t begin = 0;
  while (begin <= spec.size()) {
    const std::size_t comma = spec.find(',', begin);
    std::string token =
        spec.substr(begin, comma == std::string::npos ? comma : comma - begin);
    if (!token.empty()) {
      double re = 0, im = 0;
      std::size_t used = 0;
      re = std::stod(token, &used);
      std::string rest = token.substr(used);
      if (!rest.empty()) {
        if (rest.back() != 'i') {
          throw InputError("spectrum: cannot parse '" + token + "'");
        }
        rest.pop_back();
        if (rest == "+" || rest.empty()) {
          im = 1;
        } else if (rest == "-") {
          im = -1;
        } else {
          im = std::stod(rest, &used);
          if (used != rest.size()) {
            throw InputError("spectrum: cannot parse '" + token + "'");
          }
        }
      }
      out.emplace_back(re, im);
    }
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (out.empty()) throw InputError("spectrum: no eigenvalues given");
  return out;
}

struct PlantWithGrid {
  ContinuousLtid plant;
  SamplingGridd grid;
};

PlantWithGrid load_plant_and_grid(const std::string& path,
                                  const std::string& grid_flag) {
  const SystemFile file = load_system_file(path);
  if (file.kind != SystemFile::Kind::lti) {
    throw InputError(path + ": expected an \"lti\" system file");
  }
  PlantWithGrid out;
  out.plant = *file.lti;
  if (!grid_flag.empty()) {
    out.grid = SamplingGridd(parse_grid_spec(grid_flag));
  } else if (file.grid) {
    out.grid = *file.grid;
  } else {
    throw InputError(path +
                     ": no sampling grid; supply --grid or an \"H\" field");
  }
  require_valid(SampledDataSystemd{out.plant, out.grid},
                "load_plant_and_grid");
  return out;
}

ReductionRequest request_from_flags(int order, int moments) {
  if (order >= 0 && moments >= 0) {
    throw InputError("give either --order or --moments, not both");
  }
  if (order >= 0) return ReductionRequest::order(order);
  if (moments >= 0) return ReductionRequest::moments(moments);
  throw InputError("one of --order or --moments is required");
}

int cmd_discretize(const std::string& input, const std::string& grid_flag,
                   const std::string& output) {
  const auto loaded = load_plant_and_grid(input, grid_flag);
  const SampledDataSystemd sd{loaded.plant, loaded.grid};
  const SwitchedLineard ls = build_switched_model(sd);
  const double residual = discretization_self_check(sd);

  SystemFile out;
  out.kind = SystemFile::Kind::ls;
  out.ls = ls;
  out.grid = loaded.grid;
  out.meta = {{"source", std::filesystem::path(input).filename().string()}};
  atomic_write_file(output, serialize_system_file(out));

  std::cout << "wrote " << output << ": " << ls.mode_count() << " modes, order "
            << ls.order() << ", inputs " << ls.inputs() << ", outputs "
            << ls.outputs() << "\n"
            << "exponential identity residual: " << std::scientific
            << std::setprecision(3) << residual << "\n";
  return kExitOk;
}

int cmd_reduce(const std::string& input, const std::string& grid_flag,
               int approach, int order, int moments,
               std::optional<bool> stable_inverse, const std::string& output,
               const std::string& report_path,
               const std::string& plant_output) {
  const auto loaded = load_plant_and_grid(input, grid_flag);
  const SampledDataSystemd sd{loaded.plant, loaded.grid};
  const ReductionRequest request = request_from_flags(order, moments);

  PipelineOptions<double> opts;
  opts.use_stable_inverse = stable_inverse;
  const PipelineResult<double> result =
      approach == 1 ? approach_one(sd, request, opts)
                    : approach_two(sd, request, opts);

  SystemFile out;
  out.kind = SystemFile::Kind::ls;
  out.ls = result.reduced_ls;
  out.grid = loaded.grid;
  out.meta = {{"approach", approach},
              {"n", result.report.n},
              {"r", result.report.r},
              {"N", result.report.N}};
  atomic_write_file(output, serialize_system_file(out));
  if (!plant_output.empty() && result.reduced_plant) {
    SystemFile plant_file;
    plant_file.kind = SystemFile::Kind::lti;
    plant_file.lti = *result.reduced_plant;
    plant_file.grid = loaded.grid;
    atomic_write_file(plant_output, serialize_system_file(plant_file));
  }
  if (!report_path.empty()) {
    atomic_write_file(
        report_path,
        reduction_report_to_json(result.report, true).dump(2) + "\n");
  }

  std::cout << "approach " << approach << ": n = " << result.report.n
            << " -> r = " << result.report.r << " at N = " << result.report.N
            << "\n";
  if (result.report.certificate_present) {
    std::cout << "certificate: all " << result.report.certificate.margins.size()
              << " reduced margins negative\n";
  } else {
    std::cout << result.report.stability_note << "\n";
  }
  return kExitOk;
}

int cmd_certify(const std::string& system_path, const std::string& plant_path,
                const std::string& p_path) {
  const SystemFile file = load_system_file(system_path);
  if (file.kind != SystemFile::Kind::ls) {
    throw InputError(system_path + ": expected an \"ls\" system file");
  }
  MatrixX<double> P;
  if (!plant_path.empty()) {
    const SystemFile plant_file = load_system_file(plant_path);
    if (plant_file.kind != SystemFile::Kind::lti) {
      throw InputError(plant_path + ": expected an \"lti\" system file");
    }
    if (plant_file.lti->order() != file.ls->order()) {
      throw InputError(
          "plant order " + std::to_string(plant_file.lti->order()) +
          " does not match the switched model order " +
          std::to_string(file.ls->order()) +
          "; a reduced model carries its own certificate (see the reduction "
          "report) or pass it explicitly with --p-file");
    }
    P = lyapunov_from_plant(*plant_file.lti);
  } else if (!p_path.empty()) {
    nlohmann::json j;
    const std::string text = read_file(p_path);
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(p_path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("P")) {
      throw ParseError(p_path + ": expected an object with a \"P\" matrix");
    }
    P = io_detail::matrix_from_json(j["P"], "P");
  } else {
    throw InputError("certify: provide --plant or --p-file");
  }

  const auto cert = check_quadratic_stability(*file.ls, P);
  std::cout << "lambda_min(P) = " << std::scientific << std::setprecision(6)
            << cert.p_min_eigenvalue << "\n";
  for (std::size_t i = 0; i < cert.margins.size(); ++i) {
    std::cout << "mode " << i << " margin = " << cert.margins[i] << "\n";
  }
  if (!cert.certified) {
    std::cout << "REFUTED";
    if (cert.failing_mode >= 0) {
      std::cout << " at mode " << cert.failing_mode;
    }
    std::cout << "\n";
    return kExitRefuted;
  }
  std::cout << "CERTIFIED\n";
  return kExitOk;
}

int cmd_campaign(const std::string& input, const std::string& grid_flag,
                 int order, int moments, int count, std::uint64_t seed,
                 double horizon, const std::string& out_dir) {
  const auto loaded = load_plant_and_grid(input, grid_flag);
  const SampledDataSystemd sd{loaded.plant, loaded.grid};
  const ReductionRequest request = request_from_flags(order, moments);

  const auto run = run_comparison_campaign<double>(sd, request, count, seed,
                                                   horizon);
  const auto& rep = run.report;

  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  atomic_write_file(dir / "summary.json", render_campaign_summary(rep));
  for (int c = 0; c < 2; ++c) {
    const auto& stats = rep.comparison.models[static_cast<std::size_t>(c)];
    const auto traces = replay_campaign_trial(
        run.original_ls, run.reduced_one, run.reduced_two, loaded.grid, seed,
        horizon, stats.representative_trial);
    const std::string stem = "representative_approach" + std::to_string(c + 1);
    atomic_write_file(dir / (stem + ".csv"), render_trial_csv(traces));
    atomic_write_file(dir / (stem + ".dat"), render_trial_gnuplot(traces));
  }

  std::cout << std::fixed << std::setprecision(4);
  for (int c = 0; c < 2; ++c) {
    const auto& stats = rep.comparison.models[static_cast<std::size_t>(c)];
    const auto& r = c == 0 ? rep.approach_one_report : rep.approach_two_report;
    std::cout << "approach " << (c + 1) << " (r = " << r.r << ", N = " << r.N
              << "): mean BFR " << stats.mean_bfr << "%, best "
              << stats.best_bfr << "%, worst " << stats.worst_bfr << "%\n";
  }
  std::cout << "horizon guarantee (approach 2, k <= "
            << rep.approach_two_report.N << "): max deviation "
            << std::scientific << rep.approach2_horizon_max_dev
            << (rep.approach2_horizon_ok ? " ok" : " VIOLATED") << "\n";
  const auto& t1 = rep.approach_one_report.timings;
  const auto& t2 = rep.approach_two_report.timings;
  std::cout << "timings (s): approach1 reduce " << t1.reduce_seconds
            << ", discretize " << t1.discretize_seconds << ", certify "
            << t1.certify_seconds << "; approach2 discretize "
            << t2.discretize_seconds << ", reduce " << t2.reduce_seconds
            << ", certify " << t2.certify_seconds << "\n";
  std::cout << "wrote " << (dir / "summary.json").string()
            << " and representative traces\n";
  return kExitOk;
}

int cmd_generate(int states, int inputs, int outputs,
                 const std::string& spectrum_flag, bool unstable,
                 std::uint64_t seed, const std::string& grid_flag,
                 const std::string& output) {
  CampaignRng rng(seed);
  ContinuousLtid plant;
  if (!spectrum_flag.empty()) {
    const auto spectrum = parse_spectrum_spec(spectrum_flag);
    if (static_cast<int>(spectrum.size()) != states) {
      throw InputError("spectrum size " + std::to_string(spectrum.size()) +
                       " does not match --states " + std::to_string(states));
    }
    plant = plant_from_spectrum<double>(spectrum, inputs, outputs, rng);
  } else if (unstable) {
    plant = random_unstable_plant<double>(states, inputs, outputs, rng);
  } else {
    plant = random_stable_plant<double>(states, inputs, outputs, rng);
  }

  SystemFile out;
  out.kind = SystemFile::Kind::lti;
  out.lti = plant;
  if (!grid_flag.empty()) {
    out.grid = SamplingGridd(parse_grid_spec(grid_flag));
  }
  out.meta = {{"generator", "real Schur blocks + random orthogonal similarity"},
              {"seed", seed}};
  atomic_write_file(output, serialize_system_file(out));

  const auto hw = is_hurwitz(plant);
  std::cout << "wrote " << output << ": order " << states
            << ", spectral abscissa " << std::setprecision(6) << hw.abscissa
            << (hw.hurwitz ? " (Hurwitz)" : " (not Hurwitz)") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moment-matching model reduction for aperiodically sampled "
               "LTI systems"};
  app.require_subcommand(1);

  // discretize
  auto* disc = app.add_subcommand(
      "discretize", "build the switched model of a sampled plant");
  std::string disc_input, disc_grid, disc_output;
  disc->add_option("input", disc_input, "plant system file (kind lti)")
      ->required();
  disc->add_option("-o,--output", disc_output, "switched model output file")
      ->required();
  disc->add_option("--grid", disc_grid,
                   "comma-separated sampling intervals (overrides \"H\")");

  // reduce
  auto* red = app.add_subcommand("reduce", "reduce a sampled plant");
  std::string red_input, red_grid, red_output, red_report, red_plant_out;
  int red_approach = 2, red_order = -1, red_moments = -1;
  bool red_stable = false, red_no_stable = false;
  red->add_option("input", red_input, "plant system file (kind lti)")
      ->required();
  red->add_option("-o,--output", red_output, "reduced switched model file")
      ->required();
  red->add_option("--approach", red_approach, "1 or 2")
      ->check(CLI::IsMember({1, 2}));
  red->add_option("--order", red_order, "order budget r_max");
  red->add_option("--moments", red_moments, "moment horizon N");
  red->add_option("--grid", red_grid, "comma-separated sampling intervals");
  red->add_option("--report", red_report, "reduction report JSON path");
  red->add_option("--plant-out", red_plant_out,
                  "reduced continuous plant output (approach 1)");
  red->add_flag("--stable-inverse", red_stable,
                "force the stability-preserving left inverse");
  red->add_flag("--no-stable-inverse", red_no_stable,
                "force the plain pseudoinverse");

  // certify
  auto* cert = app.add_subcommand(
      "certify", "check quadratic stability of a switched model");
  std::string cert_system, cert_plant, cert_p;
  cert->add_option("system", cert_system, "switched system file (kind ls)")
      ->required();
  cert->add_option("--plant", cert_plant,
                   "Hurwitz plant file; P is its Lyapunov solution");
  cert->add_option("--p-file", cert_p, "JSON file with an explicit {\"P\": ..}");

  // campaign
  auto* camp = app.add_subcommand(
      "campaign", "Monte-Carlo comparison of both reduction approaches");
  std::string camp_input, camp_grid, camp_out = "campaign_out";
  int camp_order = -1, camp_moments = -1, camp_count = 200;
  std::uint64_t camp_seed = 1;
  double camp_horizon = 50.0;
  camp->add_option("input", camp_input, "plant system file (kind lti)")
      ->required();
  camp->add_option("--grid", camp_grid, "comma-separated sampling intervals");
  camp->add_option("--order", camp_order, "order budget r_max");
  camp->add_option("--moments", camp_moments, "moment horizon N");
  camp->add_option("--count", camp_count, "number of simulations");
  camp->add_option("--seed", camp_seed, "campaign seed");
  camp->add_option("--horizon", camp_horizon, "total time horizon");
  camp->add_option("--out-dir", camp_out, "output directory");

  // generate
  auto* gen = app.add_subcommand("generate", "generate a random plant file");
  std::string gen_spectrum, gen_grid, gen_output;
  int gen_states = 10, gen_inputs = 1, gen_outputs = 1;
  std::uint64_t gen_seed = 1;
  bool gen_unstable = false;
  gen->add_option("-o,--output", gen_output, "plant output file")->required();
  gen->add_option("--states", gen_states, "state dimension n");
  gen->add_option("--inputs", gen_inputs, "input dimension m");
  gen->add_option("--outputs", gen_outputs, "output dimension p");
  gen->add_option("--spectrum", gen_spectrum,
                  "comma-separated eigenvalues, e.g. \"-0.5+2i,-0.5-2i,-3\"");
  gen->add_flag("--unstable", gen_unstable,
                "draw a spectrum with an unstable eigenvalue");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--grid", gen_grid, "embed a sampling grid (\"H\" field)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(disc)) {
      return cmd_discretize(disc_input, disc_grid, disc_output);
    }
    if (app.got_subcommand(red)) {
      std::optional<bool> stable;
      if (red_stable && red_no_stable) {
        throw InputError("--stable-inverse conflicts with --no-stable-inverse");
      }
      if (red_stable) stable = true;
      if (red_no_stable) stable = false;
      return cmd_reduce(red_input, red_grid, red_approach, red_order,
                        red_moments, stable, red_output, red_report,
                        red_plant_out);
    }
    if (app.got_subcommand(cert)) {
      return cmd_certify(cert_system, cert_plant, cert_p);
    }
    if (app.got_subcommand(camp)) {
      return cmd_campaign(camp_input, camp_grid, camp_order, camp_moments,
                          camp_count, camp_seed, camp_horizon, camp_out);
    }
    if (app.got_subcommand(gen)) {
      return cmd_generate(gen_states, gen_inputs, gen_outputs, gen_spectrum,
                          gen_unstable, gen_seed, gen_grid, gen_output);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const NotHurwitzError& e) {
    std::cerr << "stability hypothesis violated: " << e.what() << "\n";
    return kExitHypothesis;
  } catch (const SpanError& e) {
    std::cerr << "infeasible request: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const BudgetError& e) {
    std::cerr << "infeasible request: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InputError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidate;
  } catch (const DimensionError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidate;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
