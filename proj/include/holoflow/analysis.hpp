#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "holoflow/separatrix.hpp"

namespace holoflow {

struct AnalyzeOptions {
    std::optional<Window> window;  // default: 4x the equilibria bounding box
    int nx = 240, ny = 200;
    double rtol = 1e-10;
    double escape_radius = 0;      // 0: auto, 1e3 * window diameter
    double extrap_radius = 1e8;
    double t_max = 1e6;
    double cell_t_max = 400;
    int max_seeds = 64;
    int threads = 0;
};

struct AnalysisResult {
    FieldExpr field;
    Window window;
    std::vector<Equilibrium> equilibria;
    std::vector<ConfigurationReport> reports;
    std::vector<std::string> diagnostics;
};

/// Full pipeline: equilibria, one report per basin, one per elliptic sector.
AnalysisResult analyze(const FieldExpr& f, const AnalyzeOptions& opt = {});

struct Census {
    int unique = 0;
    int positive = 0;
    int negative = 0;
    int double_sided = 0;
    int other = 0;
    std::vector<const SeparatrixRecord*> records;  // one per unique orbit
};

/// Deduplicated separatrix counts across every report of one analysis.
Census census(const AnalysisResult& res, double dedupe_tol = 1e-4);

nlohmann::json report_to_json(const ConfigurationReport& report);
nlohmann::json analysis_to_json(const AnalysisResult& res);

/// Textual parameter substitution: every standalone occurrence of `name`
/// becomes the parenthesized decimal value.
std::string substitute_parameter(const std::string& source, const std::string& name,
                                 double value);

/// Per-value analyses plus a summary of configuration changes.
nlohmann::json run_sweep(const std::string& source_template, const std::string& name,
                         std::span<const double> values, const AnalyzeOptions& opt,
                         std::vector<AnalysisResult>* keep_results = nullptr);

// --------------------------------------------------------------------------
// CLI front end
// --------------------------------------------------------------------------

enum class Subcommand { Equilibria, Portrait, Orbit, Transit, Separatrices, Verify, Sweep };

struct RunConfig {
    Subcommand subcommand = Subcommand::Equilibria;
    std::string field_source;
    AnalyzeOptions options;
    std::string json_path, svg_path, csv_path;
    // orbit
    Complex from{};
    std::string direction = "both";  // forward|backward|both
    // transit
    std::vector<Complex> polyline;
    double t1 = 0, t2 = 0;
    bool have_clock_interval = false;
    // sweep
    std::string param_name;
    std::vector<double> param_values;
    // verify
    bool strict = false;
};

/// Exit codes: 0 ok, 1 usage, 2 numerical failure, 3 verdict failure under
/// --strict.
int run(const RunConfig& config);

/// temp file + rename in the target directory
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace holoflow
