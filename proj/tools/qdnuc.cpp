#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdnuc/config.hpp"
#include "qdnuc/driver.hpp"
#include "qdnuc/error.hpp"

namespace {

int fail(const qdnuc::Error& e, const std::string& sub, const std::string& out_dir) {
    const auto record = qdnuc::error_record(e, sub);
    std::cerr << record << '\n';
    if (!out_dir.empty()) {
        std::error_code ec;
        if (std::filesystem::is_directory(out_dir, ec)) {
            std::ofstream(std::filesystem::path(out_dir) / "error.json", std::ios::trunc) << record << '\n';
        }
    }
    return static_cast<int>(qdnuc::exit_code_for(e));
}

std::string summary(const std::string& name) {
    if (name == "fringe-map") return "count rate over an (omega, tau) grid";
    if (name == "sweep") return "forward/backward delay scan with nuclear memory";
    if (name == "steady") return "steady states at one delay and the nullcline";
    if (name == "oracle") return "full-equation oracle beside the mean field";
    if (name == "rate") return "trion-hole nuclear flip-rate estimate";
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electron-nuclear feedback under pulsed Ramsey driving"};
    app.set_version_flag("--version", std::string(qdnuc::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    for (const auto& name : qdnuc::subcommand_names()) {
        auto* sub = app.add_subcommand(name, summary(name));
        sub->add_option("--config", config_path, "key = value configuration file")->required();
        sub->add_option("--set", overrides, "override one key (key=value), repeatable");
        sub->add_option("--out", out_dir, "output directory (output.dir)");
        sub->add_option("--seed", seed, "random seed (seed)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(qdnuc::ExitCode::kConfigError);
    }
    const std::string sub = app.get_subcommands().front()->get_name();

    qdnuc::RunConfig cfg;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) {
            throw qdnuc::Error(qdnuc::ErrorCode::kParseError, "cannot read config file " + config_path);
        }
        std::ostringstream text;
        text << in.rdbuf();
        cfg = qdnuc::parse_config(text.str());
        std::vector<std::string_view> views(overrides.begin(), overrides.end());
        qdnuc::apply_overrides(cfg, views);
        if (!out_dir.empty()) {
            cfg.output.dir = out_dir;
            cfg.explicit_keys.insert("output.dir");
        }
        if (seed) {
            cfg.seed = *seed;
            cfg.explicit_keys.insert("seed");
        }
    } catch (const qdnuc::Error& e) {
        return fail(e, sub, out_dir);
    }

    const auto outcome = qdnuc::run_subcommand(sub, cfg);
    if (outcome.code != qdnuc::ExitCode::kOk) {
        std::cerr << outcome.error_record << '\n';
        return static_cast<int>(outcome.code);
    }
    for (const auto& f : outcome.files) {
        std::cout << f.string() << '\n';
    }
    return 0;
}
