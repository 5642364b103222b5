#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vacant/runner.hpp"

namespace {

// Turns leftover `--key value` / `--key=value` pairs into config overrides.
bool apply_overrides(vacant::FlatConfig& cfg, const std::vector<std::string>& extras, std::ostream& err)
{
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const auto& a = extras[i];
        if (a.rfind("--", 0) != 0) {
            err << "config error [" << a << "]: unexpected argument '" << a << "'\n";
            return false;
        }
        auto key = a.substr(2);
        std::string value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key.erase(eq);
        } else if (i + 1 < extras.size()) {
            value = extras[++i];
        } else {
            err << "config error [" << key << "]: missing value for --" << key << "\n";
            return false;
        }
        cfg.set(key, value);
    }
    return true;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Vacant set experiments for random walk on the discrete torus"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> inputs;

    for (const char* name : {"simulate", "components", "estimate", "constants", "greenfn"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "flat key = value config file");
        sub->add_option("--out", out_dir, "output directory");
        sub->allow_extras();
    }
    auto* merge = app.add_subcommand("merge", "combine shard reports");
    merge->add_option("inputs", inputs, "report.json files")->required();
    merge->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : vacant::cli::kConfigInvalid;
    }

    auto* sub = app.get_subcommands().front();
    vacant::FlatConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "config error [config]: cannot read " << config_path << "\n";
            return vacant::cli::kConfigInvalid;
        }
        try {
            cfg = vacant::FlatConfig::parse(in);
        } catch (const vacant::ConfigError& e) {
            std::cerr << "config error [" << e.key() << "]: " << e.what() << "\n";
            return vacant::cli::kConfigInvalid;
        }
    }
    if (!apply_overrides(cfg, sub->remaining(), std::cerr))
        return vacant::cli::kConfigInvalid;

    vacant::cli::Context ctx;
    ctx.out_dir = out_dir;
    ctx.default_workers = vacant::cli::workers_from_env();
    std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
    return vacant::cli::dispatch(sub->get_name(), cfg, paths, ctx, std::cerr);
}
