#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "samred/campaign.hpp"
#include "samred/pipelines.hpp"
#include "samred/stability.hpp"
#include "samred/systems.hpp"

namespace samred {

/// JSON text could not be decoded into a system file. Line/column are
/// 1-based and 0 when unknown (structural rather than syntactic errors).
struct ParseError : Error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& what, int line_ = 0, int column_ = 0)
      : Error(what), line(line_), column(column_) {}
};

/// In-memory form of the on-disk system format:
///   {"kind": "lti", "A": [[..]], "B": [[..]], "C": [[..]], "H": [..]}
///   {"kind": "ls", "A_i": [[[..]],..], "B_i": [..], "C": [[..]], "H": [..]}
/// "H" and "meta" are optional everywhere.
struct SystemFile {
  enum class Kind { lti, ls };
  Kind kind = Kind::lti;
  std::optional<ContinuousLtid> lti;
  std::optional<SwitchedLineard> ls;
  std::optional<SamplingGridd> grid;
  nlohmann::json meta;
};

namespace io_detail {

inline std::pair<int, int> offset_to_line_column(const std::string& text,
                                                 std::size_t offset) {
  int line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

inline MatrixX<double> matrix_from_json(const nlohmann::json& j,
                                        const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(name + ": expected a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  if (!j[0].is_array()) throw ParseError(name + ": rows must be arrays");
  cols = j[0].size();
  MatrixX<double> m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(name + ": row " + std::to_string(i) +
                       " has inconsistent length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) {
        throw ParseError(name + ": entry (" + std::to_string(i) + ", " +
                         std::to_string(c) + ") is not a number");
      }
      m(static_cast<Index>(i), static_cast<Index>(c)) = j[i][c].get<double>();
    }
  }
  return m;
}

inline nlohmann::json matrix_to_json(const MatrixX<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace io_detail

inline SystemFile parse_system_file(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = io_detail::offset_to_line_column(
        text, e.byte > 0 ? static_cast<std::size_t>(e.byte - 1) : 0);
    throw ParseError("JSON syntax error at line " + std::to_string(line) +
                         ", column " + std::to_string(column) + ": " + e.what(),
                     line, column);
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ParseError("system file must be an object with a \"kind\" string");
  }
  SystemFile file;
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "lti") {
    file.kind = SystemFile::Kind::lti;
    for (const char* field : {"A", "B", "C"}) {
      if (!j.contains(field)) {
        throw ParseError(std::string("lti system is missing \"") + field +
                         "\"");
      }
    }
    ContinuousLtid sys;
    sys.A = io_detail::matrix_from_json(j["A"], "A");
    sys.B = io_detail::matrix_from_json(j["B"], "B");
    sys.C = io_detail::matrix_from_json(j["C"], "C");
    file.lti = std::move(sys);
  } else if (kind == "ls") {
    file.kind = SystemFile::Kind::ls;
    for (const char* field : {"A_i", "B_i", "C"}) {
      if (!j.contains(field)) {
        throw ParseError(std::string("ls system is missing \"") + field +
                         "\"");
      }
    }
    if (!j["A_i"].is_array() || !j["B_i"].is_array() ||
        j["A_i"].size() != j["B_i"].size() || j["A_i"].empty()) {
      throw ParseError(
          "\"A_i\" and \"B_i\" must be non-empty arrays of equal length");
    }
    SwitchedLineard sys;
    for (std::size_t i = 0; i < j["A_i"].size(); ++i) {
      sys.A.push_back(io_detail::matrix_from_json(
          j["A_i"][i], "A_i[" + std::to_string(i) + "]"));
      sys.B.push_back(io_detail::matrix_from_json(
          j["B_i"][i], "B_i[" + std::to_string(i) + "]"));
    }
    sys.C = io_detail::matrix_from_json(j["C"], "C");
    file.ls = std::move(sys);
  } else {
    throw ParseError("unknown system kind \"" + kind + "\"");
  }
  if (j.contains("H")) {
    if (!j["H"].is_array()) throw ParseError("\"H\" must be an array");
    std::vector<double> intervals;
    for (const auto& v : j["H"]) {
      if (!v.is_number()) throw ParseError("\"H\" entries must be numbers");
      intervals.push_back(v.get<double>());
    }
    if (file.kind == SystemFile::Kind::ls &&
        intervals.size() != file.ls->A.size()) {
      throw ParseError("\"H\" length must equal the mode count");
    }
    file.grid = SamplingGridd(std::move(intervals));
  }
  if (j.contains("meta")) file.meta = j["meta"];
  return file;
}

inline std::string serialize_system_file(const SystemFile& file) {
  nlohmann::json j;
  if (file.kind == SystemFile::Kind::lti) {
    j["kind"] = "lti";
    j["A"] = io_detail::matrix_to_json(file.lti->A);
    j["B"] = io_detail::matrix_to_json(file.lti->B);
    j["C"] = io_detail::matrix_to_json(file.lti->C);
  } else {
    j["kind"] = "ls";
    nlohmann::json As = nlohmann::json::array();
    nlohmann::json Bs = nlohmann::json::array();
    for (const auto& Ai : file.ls->A) As.push_back(io_detail::matrix_to_json(Ai));
    for (const auto& Bi : file.ls->B) Bs.push_back(io_detail::matrix_to_json(Bi));
    j["A_i"] = std::move(As);
    j["B_i"] = std::move(Bs);
    j["C"] = io_detail::matrix_to_json(file.ls->C);
  }
  if (file.grid) {
    nlohmann::json h = nlohmann::json::array();
    for (double v : file.grid->intervals()) h.push_back(v);
    j["H"] = std::move(h);
  }
  if (!file.meta.is_null()) j["meta"] = file.meta;
  return j.dump(2) + "\n";
}

/// Write-temp-rename so readers never observe a partial file.
inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline SystemFile load_system_file(const std::filesystem::path& path) {
  return parse_system_file(read_file(path));
}

/// %.17g rendering used by every CSV/gnuplot emitter; 17 significant digits
/// round-trip doubles exactly.
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline nlohmann::json certificate_to_json(const StabilityCertificated& cert) {
  nlohmann::json j;
  j["certified"] = cert.certified;
  j["margins"] = cert.margins;
  j["p_min_eigenvalue"] = cert.p_min_eigenvalue;
  j["P"] = io_detail::matrix_to_json(cert.P);
  if (cert.failing_mode >= 0) j["failing_mode"] = cert.failing_mode;
  return j;
}

/// Reduction report as JSON. Timings are wall-clock and therefore only
/// included on request; campaign summaries must stay byte-reproducible.
inline nlohmann::json reduction_report_to_json(
    const ReductionReport<double>& rep, bool include_timings) {
  nlohmann::json j;
  j["approach"] = rep.approach == Approach::one ? 1 : 2;
  j["n"] = rep.n;
  j["r"] = rep.r;
  j["N"] = rep.N;
  j["D"] = rep.D;
  j["grid"] = rep.grid.intervals();
  j["left_inverse"] = rep.left_inverse_kind == LeftInverseKind::pseudoinverse
                          ? "pseudoinverse"
                          : "lyapunov_weighted";
  j["certificate_present"] = rep.certificate_present;
  if (rep.certificate_present) {
    j["certificate"] = certificate_to_json(rep.certificate);
  }
  if (!rep.stability_note.empty()) j["stability_note"] = rep.stability_note;
  nlohmann::json residuals = nlohmann::json::array();
  for (const auto& [len, res] : rep.markov_match_residuals) {
    residuals.push_back({len, res});
  }
  j["markov_match_residuals"] = std::move(residuals);
  j["verified_markov_depth"] = rep.verified_markov_depth;
  if (include_timings) {
    j["timings_seconds"] = {{"reduce", rep.timings.reduce_seconds},
                            {"discretize", rep.timings.discretize_seconds},
                            {"certify", rep.timings.certify_seconds}};
  }
  return j;
}

/// Campaign summary JSON: per-approach BFR statistics in the shape of the
/// comparison tables, the horizon guarantee, and the sampling decisions the
/// protocol leaves open. Deterministic for a fixed (inputs, seed).
inline std::string render_campaign_summary(
    const ComparisonCampaignReport<double>& rep) {
  nlohmann::json j;
  j["campaign"] = {
      {"count", rep.comparison.count},
      {"seed", rep.comparison.seed},
      {"horizon", rep.comparison.horizon},
      {"overflow_trials", rep.comparison.overflow_trials},
  };
  j["grid"] = rep.approach_one_report.grid.intervals();

  const std::array<const ReductionReport<double>*, 2> reports = {
      &rep.approach_one_report, &rep.approach_two_report};
  nlohmann::json approaches = nlohmann::json::array();
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& stats = rep.comparison.models[c];
    nlohmann::json a = reduction_report_to_json(*reports[c], false);
    a["bfr"] = {{"mean", stats.mean_bfr},
                {"best", stats.best_bfr},
                {"worst", stats.worst_bfr},
                {"representative_trial", stats.representative_trial}};
    approaches.push_back(std::move(a));
  }
  j["approaches"] = std::move(approaches);

  j["horizon_guarantee"] = {
      {"N", rep.approach_two_report.N},
      {"max_relative_deviation", rep.approach2_horizon_max_dev},
      {"tolerance", 1e-7},
      {"ok", rep.approach2_horizon_ok},
  };
  j["notes"] = {
      "switching sequence: i.i.d. uniform over the grid intervals",
      "trial length: derived per realization from the time horizon",
      "inputs: i.i.d. standard normal (Box-Muller over mt19937_64)",
  };
  return j.dump(2) + "\n";
}

/// Representative-trial CSV: header k,t,y_1..y_p,ybar1_1..,ybar2_1..;
/// one row per sampling instant, 17-significant-digit decimals.
inline std::string render_trial_csv(const TrialTraces<double>& traces) {
  const Index p = traces.original.outputs.front().size();
  std::ostringstream out;
  out << "k,t";
  for (Index c = 0; c < p; ++c) out << ",y_" << (c + 1);
  for (Index c = 0; c < p; ++c) out << ",ybar1_" << (c + 1);
  for (Index c = 0; c < p; ++c) out << ",ybar2_" << (c + 1);
  out << "\n";
  for (Index k = 0; k < traces.original.length(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    out << k << "," << format_g17(traces.original.instants[ks]);
    for (Index c = 0; c < p; ++c) {
      out << "," << format_g17(traces.original.outputs[ks](c));
    }
    for (const auto& cand : traces.candidates) {
      for (Index c = 0; c < p; ++c) out << "," << format_g17(cand.outputs[ks](c));
    }
    out << "\n";
  }
  return out.str();
}

/// Gnuplot-ready trace data: one block, whitespace separated, with a
/// comment header naming the columns.
inline std::string render_trial_gnuplot(const TrialTraces<double>& traces) {
  const Index p = traces.original.outputs.front().size();
  std::ostringstream out;
  out << "# t";
  for (Index c = 0; c < p; ++c) out << " y_" << (c + 1);
  for (Index c = 0; c < p; ++c) out << " ybar1_" << (c + 1);
  for (Index c = 0; c < p; ++c) out << " ybar2_" << (c + 1);
  out << "\n";
  for (Index k = 0; k < traces.original.length(); ++k) {
    const auto ks = static_cast<std::size_t>(k);
    out << format_g17(traces.original.instants[ks]);
    for (Index c = 0; c < p; ++c) {
      out << " " << format_g17(traces.original.outputs[ks](c));
    }
    for (const auto& cand : traces.candidates) {
      for (Index c = 0; c < p; ++c) {
        out << " " << format_g17(cand.outputs[ks](c));
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace samred
