#include "irmx/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "irmx/checks.hpp"
#include "irmx/data.hpp"
#include "irmx/metrics.hpp"

namespace irmx::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        throw ConfigError("config: '" + key + "' expects a finite number, got '" + text + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!text.empty() && text.front() != '-') v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + text + "'");
    return v;
}

std::vector<double> parse_reals(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& tok : split(text, ',')) out.push_back(parse_real(key, tok));
    return out;
}

std::vector<std::uint64_t> parse_uints(const std::string& key, const std::string& text) {
    std::vector<std::uint64_t> out;
    for (const auto& tok : split(text, ',')) out.push_back(parse_uint(key, tok));
    return out;
}

std::vector<EnvSet> parse_env_sets(const std::string& text) {
    std::vector<EnvSet> out;
    for (const auto& group : split(text, ';')) {
        EnvSet set;
        const auto toks = split(group, ',');
        for (std::size_t i = 0; i < toks.size(); ++i) {
            set.values.push_back(parse_real("envs", toks[i]));
            set.label += (i ? "," : "") + toks[i];
        }
        out.push_back(std::move(set));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output helpers

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw IoError("write failed: " + path.string());
}

void prepare_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

struct MeanStd {
    double mean = NAN;
    double std = NAN;
};

// Population standard deviation over the finite entries.
MeanStd mean_std(const std::vector<double>& xs) {
    std::vector<double> ok;
    for (double x : xs)
        if (std::isfinite(x)) ok.push_back(x);
    if (ok.empty()) return {};
    double m = 0.0;
    for (double x : ok) m += x;
    m /= static_cast<double>(ok.size());
    double v = 0.0;
    for (double x : ok) v += (x - m) * (x - m);
    return {m, std::sqrt(v / static_cast<double>(ok.size()))};
}

ojson real_json(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson mean_std_json(const std::vector<double>& xs) {
    const MeanStd ms = mean_std(xs);
    return {{"mean", real_json(ms.mean)}, {"std", real_json(ms.std)}};
}

std::vector<EnvDataset> make_envs(const RunConfig& cfg, std::span<const double> values, bool sem, std::uint64_t seed,
                                  std::uint64_t first_stream) {
    std::vector<EnvDataset> envs;
    for (std::size_t e = 0; e < values.size(); ++e) {
        Rng data(seed, first_stream + e);
        const EnvSpec spec = sem ? EnvSpec::sem(values[e], cfg.n_per_env, cfg.d)
                                 : EnvSpec::cls(values[e], cfg.n_per_env, cfg.label_noise);
        envs.push_back(generate_env(spec, data));
    }
    return envs;
}

std::string describe(const ObjectiveConfig& c) {
    return "lambda=" + format_real(c.lambda) + " alpha_min=" + format_real(c.extrapolation.alpha_min) +
           " gamma=" + format_real(c.extrapolation.gamma);
}

// One classification training run per (method, seed) with selection on the
// training envs, shared by cls and trace.
struct ClsRun {
    bool diverged = false;
    GridSearchResult result;
};

ClsRun run_cls_method(const RunConfig& cfg, const Method& method, std::span<const EnvDataset> train,
                      std::uint64_t seed, std::ostream& log) {
    ClsRun run;
    const auto grid = method_grid(cfg, method);
    try {
        run.result = grid_search(train, grid, cfg.validation_fraction, Rng(seed, 0));
        log << "  " << method.name << " seed " << seed << ": " << describe(run.result.best) << '\n';
    } catch (const TrainingError& err) {
        run.diverged = true;
        log << "  " << method.name << " seed " << seed << ": diverged (" << err.what() << ")\n";
    }
    return run;
}

}  // namespace

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Method parse_method(std::string_view name) {
    static const std::map<std::string, PenaltyKind, std::less<>> table{
        {"ERM", PenaltyKind::None},     {"IRMv1", PenaltyKind::IrmV1},  {"J-IRMv1", PenaltyKind::JIrmV1},
        {"v-IRMv1", PenaltyKind::Cv},   {"mm-IRMv1", PenaltyKind::Cmm},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError("config: unknown method '" + std::string(name) + "'");
    return {it->first, it->second};
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "experiment", "envs",      "d",            "n_per_env",           "method",      "lambda_grid",
        "alpha_min_grid", "gamma_grid", "lr",       "iterations",          "seeds",       "bins",
        "out_dir",    "log_stride", "optimizer",    "init",                "hidden",      "anneal_iters",
        "label_noise", "validation_fraction", "test_envs", "tail",         "trials",      "grad_trials",
        "inject_bug",
    };
    return keys;
}

KeyValues parse_config_text(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        const std::string line = trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        ++line_no;
        if (!line.empty() && line.front() != '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
            std::string key = trim(std::string_view(line).substr(0, eq));
            std::string value = trim(std::string_view(line).substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            out.emplace_back(std::move(key), std::move(value));
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

KeyValues read_config_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

RunConfig default_config(std::string_view experiment) {
    RunConfig c;
    c.experiment = std::string(experiment);
    if (experiment == "sem") {
        c.envs = parse_env_sets("0.2,2;0.2,1;0.2,0.6");
        c.methods = {parse_method("ERM"), parse_method("IRMv1"), parse_method("v-IRMv1"), parse_method("mm-IRMv1")};
        c.lambda_grid = {1.0, 10.0};
        c.alpha_min_grid = {-1.0, -5.0, -10.0};
        c.gamma_grid = {1.0, 10.0, 100.0};
        c.optimizer = OptimizerKind::Adam;
        c.init = 1.0;
        c.log_stride = 100;
    } else if (experiment == "cls" || experiment == "trace") {
        c.envs = parse_env_sets("0.1,0.2");
        c.test_envs = {0.9};
        c.n_per_env = 2000;
        c.methods = {parse_method("IRMv1"), parse_method("v-IRMv1"), parse_method("mm-IRMv1")};
        if (experiment == "cls") c.methods.insert(c.methods.begin(), parse_method("ERM"));
        c.lambda_grid = {1e6};
        for (int k = 1; k <= 10; ++k) {
            c.alpha_min_grid.push_back(-0.1 * k);
            c.gamma_grid.push_back(0.1 * k);
        }
        c.lr = 5e-4;
        c.iterations = 500;
        c.anneal_iters = 100;
        c.hidden = {16, 16};
        c.optimizer = OptimizerKind::Adam;
        if (experiment == "trace") c.seeds = {0};
    } else if (experiment == "check") {
        c.seeds = {0};
    } else {
        throw ConfigError("config: unknown experiment '" + std::string(experiment) + "' (sem, cls, check, trace)");
    }
    return c;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& v) {
    if (key == "experiment") {
        if (v != c.experiment) throw ConfigError("config: experiment is fixed once defaults are chosen");
    } else if (key == "envs") {
        c.envs = parse_env_sets(v);
    } else if (key == "test_envs") {
        c.test_envs = parse_reals(key, v);
    } else if (key == "d") {
        c.d = parse_uint(key, v);
    } else if (key == "n_per_env") {
        c.n_per_env = parse_uint(key, v);
    } else if (key == "method") {
        c.methods.clear();
        for (const auto& tok : split(v, ',')) c.methods.push_back(parse_method(tok));
    } else if (key == "lambda_grid") {
        c.lambda_grid = parse_reals(key, v);
    } else if (key == "alpha_min_grid") {
        c.alpha_min_grid = parse_reals(key, v);
    } else if (key == "gamma_grid") {
        c.gamma_grid = parse_reals(key, v);
    } else if (key == "lr") {
        c.lr = parse_real(key, v);
    } else if (key == "iterations") {
        c.iterations = parse_uint(key, v);
    } else if (key == "seeds") {
        c.seeds = parse_uints(key, v);
    } else if (key == "bins") {
        c.bins = parse_uint(key, v);
    } else if (key == "out_dir") {
        c.out_dir = v;
    } else if (key == "log_stride") {
        c.log_stride = parse_uint(key, v);
    } else if (key == "optimizer") {
        if (v == "gd") c.optimizer = OptimizerKind::GradientDescent;
        else if (v == "adam") c.optimizer = OptimizerKind::Adam;
        else throw ConfigError("config: optimizer must be 'gd' or 'adam', got '" + v + "'");
    } else if (key == "init") {
        c.init = parse_real(key, v);
    } else if (key == "hidden") {
        c.hidden.clear();
        if (v != "none" && !v.empty())
            for (auto w : parse_uints(key, v)) c.hidden.push_back(w);
    } else if (key == "anneal_iters") {
        c.anneal_iters = parse_uint(key, v);
    } else if (key == "label_noise") {
        c.label_noise = parse_real(key, v);
    } else if (key == "validation_fraction") {
        c.validation_fraction = parse_real(key, v);
    } else if (key == "tail") {
        c.tail = parse_uint(key, v);
    } else if (key == "trials") {
        c.trials = parse_uint(key, v);
    } else if (key == "grad_trials") {
        c.grad_trials = parse_uint(key, v);
    } else if (key == "inject_bug") {
        if (v != "jensen" && v != "none" && !v.empty())
            throw ConfigError("config: inject_bug supports only 'jensen'");
        c.inject_bug = v == "none" ? "" : v;
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

void RunConfig::validate() const {
    if (seeds.empty()) throw ConfigError("config: at least one seed is required");
    if (experiment == "check") {
        if (trials == 0 || grad_trials == 0) throw ConfigError("config: trials must be >= 1");
        return;
    }
    if (envs.empty()) throw ConfigError("config: at least one training environment set is required");
    if (methods.empty()) throw ConfigError("config: at least one method is required");
    if (experiment != "sem" && envs.size() != 1)
        throw ConfigError("config: " + experiment + " takes exactly one training environment set");
    if (experiment != "sem" && test_envs.empty()) throw ConfigError("config: test_envs is empty");
    if (bins == 0) throw ConfigError("config: bins must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ConfigError("config: validation_fraction must lie in (0, 1)");
    if (experiment == "trace" && tail == 0) throw ConfigError("config: tail must be >= 1");
    try {
        for (const auto& set : envs) {
            for (double v : set.values) {
                const EnvSpec spec =
                    experiment == "sem" ? EnvSpec::sem(v, n_per_env, d) : EnvSpec::cls(v, n_per_env, label_noise);
                spec.validate();
            }
        }
        for (double v : test_envs) EnvSpec::cls(v, n_per_env, label_noise).validate();
        for (const auto& m : methods)
            for (const auto& set : envs)
                for (const auto& g : method_grid(*this, m)) g.validate(set.values.size());
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("config: ") + err.what());
    }
}

RunConfig resolve_config(const KeyValues& file, const KeyValues& flags, const char* irmx_out) {
    std::string experiment;
    for (const auto& [k, v] : file)
        if (k == "experiment") experiment = v;
    for (const auto& [k, v] : flags)
        if (k == "experiment") experiment = v;
    if (experiment.empty()) throw ConfigError("config: no experiment given (sem, cls, check, trace)");

    RunConfig cfg = default_config(experiment);
    for (const auto& [k, v] : file)
        if (k != "experiment") apply_key(cfg, k, v);
    if (irmx_out && *irmx_out) cfg.out_dir = irmx_out;
    for (const auto& [k, v] : flags)
        if (k != "experiment") apply_key(cfg, k, v);
    return cfg;
}

ObjectiveConfig base_objective(const RunConfig& cfg, const Method& method) {
    ObjectiveConfig c;
    c.penalty_kind = method.kind;
    c.loss = cfg.experiment == "sem" ? LossKind::SquaredError : LossKind::BinaryCrossEntropyWithLogit;
    c.optimizer = cfg.optimizer;
    c.learning_rate = cfg.lr;
    c.iterations = cfg.iterations;
    c.penalty_anneal_iters = cfg.anneal_iters;
    c.log_stride = cfg.log_stride;
    if (cfg.experiment == "trace") c.checkpoint_tail = cfg.tail;
    if (cfg.hidden.empty()) {
        c.model.kind = ModelSpec::Kind::Linear;
        c.model.linear_bias = cfg.experiment != "sem";
        c.model.linear_init = cfg.init;
    } else {
        c.model.kind = ModelSpec::Kind::Mlp;
        c.model.hidden = cfg.hidden;
    }
    return c;
}

std::vector<ObjectiveConfig> method_grid(const RunConfig& cfg, const Method& method) {
    return expand_grid(base_objective(cfg, method), cfg.lambda_grid, cfg.alpha_min_grid, cfg.gamma_grid);
}

int cmd_sem(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    prepare_out_dir(cfg.out_dir);

    std::ostringstream csv;
    csv << "method,env_set,seed,lambda,alpha_min,gamma,causal_err,noncausal_err\n";
    ojson summary = {{"experiment", "sem"}, {"d", cfg.d}, {"n_per_env", cfg.n_per_env}, {"seeds", cfg.seeds},
                     {"env_sets", ojson::array()}};
    bool any_group_lost = false;

    for (const auto& set : cfg.envs) {
        log << "env_set " << set.label << '\n';
        std::vector<std::vector<EnvDataset>> data;
        for (auto seed : cfg.seeds) data.push_back(make_envs(cfg, set.values, true, seed, 0));

        ojson methods = ojson::array();
        for (const auto& method : cfg.methods) {
            const auto grid = method_grid(cfg, method);
            std::vector<double> causal, noncausal;
            std::size_t diverged = 0;
            for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
                const std::uint64_t seed = cfg.seeds[s];
                double lam = NAN, alpha = NAN, gamma = NAN, ce = NAN, ne = NAN;
                try {
                    const GridSearchResult r = grid_search(data[s], grid, cfg.validation_fraction, Rng(seed, 0));
                    const auto& m = std::get<LinearModel>(r.report.model);
                    lam = r.best.lambda;
                    alpha = r.best.extrapolation.alpha_min;
                    gamma = r.best.extrapolation.gamma;
                    ce = causal_error(m, cfg.d);
                    ne = noncausal_error(m, cfg.d);
                    log << "  " << method.name << " seed " << seed << ": " << describe(r.best)
                        << " causal=" << format_real(ce) << '\n';
                } catch (const TrainingError& err) {
                    ++diverged;
                    log << "  " << method.name << " seed " << seed << ": diverged (" << err.what() << ")\n";
                }
                causal.push_back(ce);
                noncausal.push_back(ne);
                csv << method.name << ',' << csv_quote(set.label) << ',' << seed << ',' << format_real(lam) << ','
                    << format_real(alpha) << ',' << format_real(gamma) << ',' << format_real(ce) << ','
                    << format_real(ne) << '\n';
            }
            if (diverged == cfg.seeds.size()) any_group_lost = true;
            methods.push_back({{"method", method.name},
                               {"seeds", cfg.seeds.size()},
                               {"diverged", diverged},
                               {"causal_err", mean_std_json(causal)},
                               {"noncausal_err", mean_std_json(noncausal)}});
        }
        summary["env_sets"].push_back({{"env_set", set.label}, {"methods", methods}});
    }

    write_file(cfg.out_dir / "sem_results.csv", csv.str());
    write_file(cfg.out_dir / "sem_summary.json", summary.dump(2) + "\n");
    return any_group_lost ? kAllSeedsDiverged : kOk;
}

int cmd_cls(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    prepare_out_dir(cfg.out_dir);

    std::ostringstream csv;
    csv << "method,seed,test_acc,test_ece,test_ace\n";
    ojson summary = {{"experiment", "cls"}, {"train_envs", cfg.envs.front().label}, {"test_envs", cfg.test_envs},
                     {"seeds", cfg.seeds}, {"methods", ojson::array()}};
    bool any_group_lost = false;

    std::vector<std::vector<EnvDataset>> train, test;
    for (auto seed : cfg.seeds) {
        train.push_back(make_envs(cfg, cfg.envs.front().values, false, seed, 0));
        test.push_back(make_envs(cfg, cfg.test_envs, false, seed, cfg.envs.front().values.size()));
    }

    for (const auto& method : cfg.methods) {
        std::vector<double> acc, ece_v, ace_v;
        ojson selected = ojson::array();
        std::size_t diverged = 0;
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            const ClsRun run = run_cls_method(cfg, method, train[s], cfg.seeds[s], log);
            ClassificationMetrics m{NAN, NAN, NAN};
            if (run.diverged) {
                ++diverged;
                selected.push_back(nullptr);
            } else {
                m = evaluate_classification(run.result.report.model, test[s], cfg.bins);
                selected.push_back({{"lambda", run.result.best.lambda},
                                    {"alpha_min", run.result.best.extrapolation.alpha_min},
                                    {"gamma", run.result.best.extrapolation.gamma}});
            }
            acc.push_back(m.accuracy);
            ece_v.push_back(m.ece);
            ace_v.push_back(m.ace);
            csv << method.name << ',' << cfg.seeds[s] << ',' << format_real(m.accuracy) << ',' << format_real(m.ece)
                << ',' << format_real(m.ace) << '\n';
        }
        if (diverged == cfg.seeds.size()) any_group_lost = true;
        summary["methods"].push_back({{"method", method.name},
                                      {"diverged", diverged},
                                      {"test_acc", mean_std_json(acc)},
                                      {"test_ece", mean_std_json(ece_v)},
                                      {"test_ace", mean_std_json(ace_v)},
                                      {"selected", selected}});
    }

    write_file(cfg.out_dir / "cls_results.csv", csv.str());
    write_file(cfg.out_dir / "cls_summary.json", summary.dump(2) + "\n");
    return any_group_lost ? kAllSeedsDiverged : kOk;
}

int cmd_trace(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    if (cfg.tail > cfg.iterations / cfg.log_stride)
        throw ConfigError("config: tail exceeds the number of logged iterations");
    prepare_out_dir(cfg.out_dir);

    std::ostringstream csv;
    csv << "method,seed,iter,train_J,test_acc,test_ece,test_ace\n";
    bool any_group_lost = false;
    for (const auto& method : cfg.methods) {
        std::size_t diverged = 0;
        for (auto seed : cfg.seeds) {
            const auto train = make_envs(cfg, cfg.envs.front().values, false, seed, 0);
            const auto test = make_envs(cfg, cfg.test_envs, false, seed, cfg.envs.front().values.size());
            const ClsRun run = run_cls_method(cfg, method, train, seed, log);
            if (run.diverged) {
                ++diverged;
                continue;
            }
            for (const auto& row : trace_tail(run.result.report, cfg.tail, test, cfg.bins))
                csv << method.name << ',' << seed << ',' << row.iteration << ',' << format_real(row.train_j) << ','
                    << format_real(row.test.accuracy) << ',' << format_real(row.test.ece) << ','
                    << format_real(row.test.ace) << '\n';
        }
        if (diverged == cfg.seeds.size()) any_group_lost = true;
    }
    write_file(cfg.out_dir / "trace.csv", csv.str());
    return any_group_lost ? kAllSeedsDiverged : kOk;
}

int cmd_check(const RunConfig& cfg, std::ostream& log) {
    cfg.validate();
    prepare_out_dir(cfg.out_dir);
    const std::uint64_t seed = cfg.seeds.front();

    std::vector<PropertyResult> results;
    results.push_back(check_lp_equivalence(cfg.trials, seed));
    results.push_back(check_jensen(cfg.trials, seed, cfg.inject_bug == "jensen"));
    results.push_back(check_theorem_bound(cfg.trials, seed));
    results.push_back(check_gradients(cfg.grad_trials, seed));
    results.push_back(check_ols_convergence(seed));

    ojson report = {{"seed", seed}, {"properties", ojson::array()}};
    ojson failures = ojson::array();
    bool all_pass = true;
    for (const auto& r : results) {
        log << (r.passed ? "PASS " : "FAIL ") << r.name << " cases=" << r.cases << " worst=" << format_real(r.worst)
            << '\n';
        report["properties"].push_back(
            {{"name", r.name}, {"passed", r.passed}, {"cases", r.cases}, {"worst", real_json(r.worst)}});
        if (!r.passed) {
            all_pass = false;
            failures.push_back(ojson::parse(r.counterexample.dump()));
        }
    }
    write_file(cfg.out_dir / "check_results.json", report.dump(2) + "\n");
    if (!all_pass) {
        const auto path = cfg.out_dir / "check_counterexample.json";
        write_file(path, failures.dump(2) + "\n");
        log << "counterexample written to " << path.string() << '\n';
        return kPropertyFailure;
    }
    return kOk;
}

int run(const RunConfig& cfg, std::ostream& log) {
    try {
        if (cfg.experiment == "sem") return cmd_sem(cfg, log);
        if (cfg.experiment == "cls") return cmd_cls(cfg, log);
        if (cfg.experiment == "trace") return cmd_trace(cfg, log);
        if (cfg.experiment == "check") return cmd_check(cfg, log);
        throw ConfigError("config: unknown experiment '" + cfg.experiment + "'");
    } catch (const ConfigError& err) {
        log << "error: " << err.what() << '\n';
        return kConfigError;
    } catch (const IoError& err) {
        log << "error: " << err.what() << '\n';
        return kConfigError;
    }
}

}  // namespace irmx::cli
