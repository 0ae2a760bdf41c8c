// Command line front end: run, validate, compare, selftest.
//
// Exit codes: 0 success, 1 validation error, 2 runtime or convergence failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hybridcq/errors.hpp"
#include "hybridcq/harness.hpp"

namespace fs = std::filesystem;
using namespace hybridcq;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

fs::path pick_output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    return output_directory(fs::current_path());
}

void print_validation(const ValidationError& e) {
    for (const auto& m : e.messages()) std::cerr << "error: " << m << "\n";
}

int cmd_validate(const std::string& path) {
    const auto cfg = load_config(path);
    std::cout << "ok: " << cfg.name << " (" << to_string(cfg.solver.scheme) << ", " << cfg.mapping.describe()
              << ")\n";
    return kOk;
}

int cmd_run(const std::string& path, const std::string& out_flag) {
    const auto cfg = load_config(path);
    const auto result = run_experiment(cfg);
    const auto [csv, sum] = write_outputs(cfg, result, pick_output_dir(out_flag));
    std::cout << summary_text(result.summary);
    std::cout << "trace: " << csv.string() << "\nsummary: " << sum.string() << "\n";
    if (!result.summary.converged) {
        std::cerr << (result.summary.terminated_by == Termination::error
                          ? "run failed: " + result.summary.error
                          : "did not converge within max_iter")
                  << "\n";
        return kRuntime;
    }
    return kOk;
}

int cmd_compare(const std::string& dir, const std::string& out_flag) {
    const auto configs = load_config_dir(dir);
    const auto cmp = compare_schemes(configs);
    const fs::path out = pick_output_dir(out_flag);
    int code = kOk;
    for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
        write_outputs(configs[cmp.rows[i].config_index], cmp.results[i], out);
        if (cmp.results[i].summary.terminated_by == Termination::error) {
            std::cerr << cmp.rows[i].name << ": " << cmp.results[i].summary.error << "\n";
            code = kRuntime;
        }
    }
    const std::string table = comparison_table(cmp);
    std::ofstream(out / "comparison.csv", std::ios::binary) << table;
    std::cout << table;
    return code;
}

int cmd_selftest() {
    int failed = 0;
    for (const auto& c : run_selftest()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
        if (!c.passed) ++failed;
    }
    return failed == 0 ? kOk : kRuntime;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid projection fixed-point solvers"};
    app.require_subcommand(1);

    std::string config, dir, out_dir;
    auto* run = app.add_subcommand("run", "run one experiment and write its trace and summary");
    run->add_option("config", config, "JSON config file")->required();
    run->add_option("-o,--output-dir", out_dir, "output directory (default: $HYBRIDCQ_OUTPUT_DIR or cwd)");

    auto* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config, "JSON config file")->required();

    auto* compare = app.add_subcommand("compare", "run every config of a directory on one instance");
    compare->add_option("config-dir", dir, "directory of JSON configs")->required();
    compare->add_option("-o,--output-dir", out_dir, "output directory (default: $HYBRIDCQ_OUTPUT_DIR or cwd)");

    auto* selftest = app.add_subcommand("selftest", "run the built-in invariant suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (run->parsed()) return cmd_run(config, out_dir);
        if (validate->parsed()) return cmd_validate(config);
        if (compare->parsed()) return cmd_compare(dir, out_dir);
        if (selftest->parsed()) return cmd_selftest();
    } catch (const ValidationError& e) {
        print_validation(e);
        return kInvalid;
    } catch (const ConfigurationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kInvalid;
}
