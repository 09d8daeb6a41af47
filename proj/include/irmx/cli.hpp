#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "irmx/penalties.hpp"
#include "irmx/trainer.hpp"

namespace irmx::cli {

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kConfigError = 2, kAllSeedsDiverged = 3 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One training-environment set. `label` keeps the values as written in the
/// config (tokens joined by ','); it is what the CSV prints.
struct EnvSet {
    std::string label;
    std::vector<double> values;
    friend bool operator==(const EnvSet&, const EnvSet&) = default;
};

struct Method {
    std::string name;  // ERM, IRMv1, J-IRMv1, v-IRMv1, mm-IRMv1
    PenaltyKind kind = PenaltyKind::None;
};

/// Maps a method name to its penalty. Throws ConfigError for unknown names.
Method parse_method(std::string_view name);

struct RunConfig {
    std::string experiment;  // sem | cls | check | trace
    std::vector<EnvSet> envs;
    std::vector<double> test_envs;
    std::size_t d = 5;
    std::size_t n_per_env = 1000;
    std::vector<Method> methods;
    std::vector<double> lambda_grid;
    std::vector<double> alpha_min_grid;
    std::vector<double> gamma_grid;
    double lr = 1e-3;
    std::size_t iterations = 20000;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::size_t bins = 15;
    std::filesystem::path out_dir = "out";
    std::size_t log_stride = 1;

    OptimizerKind optimizer = OptimizerKind::GradientDescent;
    double init = 0.0;  // constant start for linear weights
    std::vector<std::size_t> hidden;  // empty: linear model
    std::size_t anneal_iters = 0;
    double label_noise = 0.25;
    double validation_fraction = 0.2;
    std::size_t tail = 50;
    std::size_t trials = 1000;
    std::size_t grad_trials = 100;
    std::string inject_bug;  // "" or "jensen"

    /// Throws ConfigError when the config cannot be run.
    void validate() const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Every key accepted in a config file or as a `--key value` flag.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped. Throws ConfigError naming the line on malformed input.
KeyValues parse_config_text(std::string_view text);
KeyValues read_config_file(const std::filesystem::path& path);

/// Defaults for one experiment kind (sem, cls, check, trace).
RunConfig default_config(std::string_view experiment);

/// Sets a single key. Throws ConfigError for unknown keys or bad values.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Layering: experiment defaults, then file values, then IRMX_OUT (when
/// non-null and nonempty) for out_dir, then flags. The experiment comes
/// from the flags if given there, else from the file.
RunConfig resolve_config(const KeyValues& file, const KeyValues& flags, const char* irmx_out);

/// The ObjectiveConfig every grid entry of `method` starts from.
ObjectiveConfig base_objective(const RunConfig& cfg, const Method& method);
/// The grid searched for `method`.
std::vector<ObjectiveConfig> method_grid(const RunConfig& cfg, const Method& method);

int cmd_sem(const RunConfig& cfg, std::ostream& log);
int cmd_cls(const RunConfig& cfg, std::ostream& log);
int cmd_check(const RunConfig& cfg, std::ostream& log);
int cmd_trace(const RunConfig& cfg, std::ostream& log);

/// Dispatches on cfg.experiment; maps ConfigError and I/O failures to exit 2.
int run(const RunConfig& cfg, std::ostream& log);

/// printf("%.17g").
std::string format_real(double x);

}  // namespace irmx::cli
