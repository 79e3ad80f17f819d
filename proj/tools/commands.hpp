#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oneperc/cascades.hpp"
#include "oneperc/models.hpp"
#include "oneperc/montecarlo.hpp"

namespace oneperc::cli {

// Exit codes.
inline constexpr int kEstablished = 0;
inline constexpr int kOperationalFailure = 1;
inline constexpr int kNotEstablished = 2;

enum class Format { text, csv, json };
Format parse_format(const std::string& s);

struct CommandResult {
  std::string subcommand;
  nlohmann::json config;  // every flag that influenced the result
  nlohmann::json data;
  std::optional<std::string> csv;  // tabular view when the command has one
  std::string text;
  int exit_code = kEstablished;

  std::string render(Format f) const;
  std::string file_extension(Format f) const;
};

// Receives progress lines (one per computed row or phase).
using Progress = std::function<void(const std::string&)>;

struct Table1Options {
  double theta = 0.18;
  double start = 0.8457;
  double target = 0.8639;
  double handoff = 0.9;
  int max_depth = 64;
};
CommandResult cmd_table1(const Table1Options& o, const Progress& progress = {});

struct Table2Options {
  double theta = 0.18;
  double start = 0.8459;
  int last_row = 13;
};
CommandResult cmd_table2(const Table2Options& o, const Progress& progress = {});

struct Q6Options {
  double p = 0.5847;
  int p_second_decimals = 4;
};
CommandResult cmd_q6(const Q6Options& o, const Progress& progress = {});

struct LowerBoundOptions {
  double udlra_site = 0.592746;
  double dfh_site = 0.556;
};
CommandResult cmd_lower_bounds(const LowerBoundOptions& o);

struct VerifyModelsOptions {
  int width = 3;
  int height = 2;
  double tol = 1e-12;
  std::vector<ModelSpec> models = {
      {ModelKind::udlra, 0.592746}, {ModelKind::direction, 0.30134}, {ModelKind::signs, 0.5}};
};
CommandResult cmd_verify_models(const VerifyModelsOptions& o);

CommandResult cmd_simulate(const ExperimentConfig& cfg, const Progress& progress = {});

// Subset counts per class for Q2, Q3 and the 4x2 rectangle, plus the
// ten-pattern cover check.
CommandResult cmd_fixtures();

struct CertificateOptions {
  std::string graph = "q3";  // q2, q3 or rect
  double p = 0.5847;
};
// Dual certificate of the connectivity LP, re-verifiable without a solver.
CommandResult cmd_certificate(const CertificateOptions& o);

std::string hex64(std::uint64_t h);
std::uint64_t fnv1a(const std::string& bytes);

struct WrittenFiles {
  std::vector<std::filesystem::path> outputs;
  std::filesystem::path manifest;
};

// Writes `<subcommand>.<ext>` for the requested format (and the JSON view
// when that differs) plus `<subcommand>.manifest.json` into `dir`.
WrittenFiles write_outputs(const CommandResult& r, Format f, const std::filesystem::path& dir, double wall_seconds);

std::string tool_version();

}  // namespace oneperc::cli
