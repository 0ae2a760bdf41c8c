#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hybridcq/geometry.hpp"
#include "hybridcq/mappings.hpp"
#include "hybridcq/solvers.hpp"

namespace hybridcq {

//! Environment variable that overrides the output directory of every run.
inline constexpr const char* kOutputDirEnv = "HYBRIDCQ_OUTPUT_DIR";

//! Exact first line of every trace CSV.
inline constexpr const char* kTraceHeader = "n,x,phi_step,residual,dist_to_target,cn_slack_pref,qn_slack_pref";

struct ExperimentConfig {
    std::string name;
    SpaceGeometry geometry = SpaceGeometry::euclidean(1);
    MappingSpec mapping = MappingSpec::rotation(0.5);
    SolverConfig solver;
    std::uint64_t seed = 1;
    //! Random points of F(T) used, together with Pi_{F(T)} x0, for the slack columns.
    int probe_count = 4;
    //! Relative paths are resolved against the output directory.
    std::string trace_csv;
    std::string summary;
    //! Canonical text of (geometry, mapping, x0); equal keys mean the same instance.
    std::string instance_key;
};

struct Summary {
    bool converged = false;
    int iterations = 0;
    double final_distance_to_target = 0.0;
    double max_invariant_violation = 0.0;
    double wall_time_seconds = 0.0;
    Termination terminated_by = Termination::max_iter;
    std::string error;
};

//! Parses and validates a JSON config. Throws ValidationError listing every problem,
//! each prefixed by the offending field path (or line/column for syntax errors).
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

//! Largest breach of the per-trace invariants: negative reference slacks and
//! decrease of phi(x_n, x0). Zero for a clean trace and for Mann or Ishikawa traces.
double max_invariant_violation(const IterationTrace& trace, const SpaceGeometry& g, const Vector& x0);

struct ExperimentResult {
    IterationTrace trace;
    Summary summary;
    Vector reference;
};

//! Runs the configured scheme. Solver failures end up in the summary (converged = false).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

//! Output directory: $HYBRIDCQ_OUTPUT_DIR when set, otherwise fallback.
std::filesystem::path output_directory(const std::filesystem::path& fallback);

std::string format_double(double v);
std::string trace_csv(const IterationTrace& trace);
void write_trace_csv(const IterationTrace& trace, const std::filesystem::path& path);
std::string summary_text(const Summary& s);
void write_summary(const Summary& s, const std::filesystem::path& path);

//! Writes the trace and summary of a finished run under dir; returns the two paths.
std::pair<std::filesystem::path, std::filesystem::path> write_outputs(const ExperimentConfig& cfg,
                                                                     const ExperimentResult& r,
                                                                     const std::filesystem::path& dir);

struct ComparisonRow {
    Scheme scheme = Scheme::mann;
    std::string name;
    int iterations = 0;
    bool converged = false;
    double final_distance = 0.0;
    //! Position of the config in the input list.
    std::size_t config_index = 0;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::vector<ExperimentResult> results;
};

//! Runs every config concurrently; rows ordered by scheme id, then name.
//! Throws ConfigurationError when the configs do not share one instance.
Comparison compare_schemes(const std::vector<ExperimentConfig>& configs);
std::string comparison_table(const Comparison& c);

//! Every *.json file of dir, sorted by file name.
std::vector<ExperimentConfig> load_config_dir(const std::filesystem::path& dir);

struct SelftestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

//! Invariant suites over built-in instances.
std::vector<SelftestCheck> run_selftest(std::uint64_t seed = 7);

} // namespace hybridcq
