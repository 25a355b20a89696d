#ifndef RHODICH_SCENARIO_HPP
#define RHODICH_SCENARIO_HPP

#include <map>
#include <string>
#include <vector>

#include "rhodich/errors.hpp"
#include "rhodich/fixtures.hpp"

namespace rhodich {

// Flat key-value config with dotted section names:
//   fixture = diag2d
//   pipeline = validate,detect,adapt
//   detect.nodes = 201
// '#' starts a comment; whitespace around keys/values is trimmed.
struct ScenarioConfig {
    std::map<std::string, std::string> kv;
    std::string source_path;

    bool has(const std::string& key) const { return kv.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    size_t get_size(const std::string& key, size_t fallback) const;
};

ScenarioConfig parse_scenario_config(const std::string& path);

struct StageOutcome {
    std::string stage;
    bool pass = false;
    std::string detail;  // one-line verdict for the summary
};

struct ScenarioResult {
    int exit_status = 0;  // 0 ok, 1 stage assertion failed, 2 pre-flight error
    std::vector<StageOutcome> stages;
    std::vector<std::string> report_files;
    std::string output_dir;
};

// Bundled deterministic probe suites used by the probe stages (and the
// acceptance suite): decaying, bump and plateau inputs on [0, T_max].
std::vector<SampledFunction> bundled_suite_y1(int dim, double T_max);
std::vector<SampledFunction> bundled_suite_yinf(int dim, double T_max);

// Runs the configured pipeline, writing per-stage report files plus
// summary.txt into the output directory. Pre-flight validation (unknown
// stage/fixture, out-of-range knobs) happens before any computation and maps
// to exit status 2. Reports contain no timestamps, so identical configs give
// bitwise-identical files.
ScenarioResult run_scenario(const std::string& config_path,
                            const std::string& output_root_override = "");

}  // namespace rhodich

#endif
