// irmx: run the SEM / classification experiments, the trace export and the
// property suite from a flat config file plus --key value overrides.
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "irmx/cli.hpp"

int main(int argc, char** argv) {
    using namespace irmx::cli;

    CLI::App app{"Invariant risk minimization workbench"};
    std::string experiment, config_path;
    app.add_option("experiment", experiment, "sem | cls | check | trace (or set it in the config)");
    app.add_option("-c,--config", config_path, "flat key = value config file");

    std::map<std::string, std::string> flag_values;
    for (const auto& key : config_keys())
        if (key != "experiment") app.add_option("--" + key, flag_values[key], "overrides config key " + key);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        KeyValues file, flags;
        if (!config_path.empty()) file = read_config_file(config_path);
        if (!experiment.empty()) flags.emplace_back("experiment", experiment);
        // Keep command-line order stable: config_keys() order, only the ones given.
        for (const auto& key : config_keys()) {
            if (key == "experiment") continue;
            if (app.get_option("--" + key)->count() > 0) flags.emplace_back(key, flag_values[key]);
        }
        const RunConfig cfg = resolve_config(file, flags, std::getenv("IRMX_OUT"));
        return run(cfg, std::cout);
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kConfigError;
    }
}
