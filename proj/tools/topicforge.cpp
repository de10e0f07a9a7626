// topicforge command-line front end.
//
//   topicforge run --config run.conf [--input crashes.csv] [--ks 5,10] ...
//   topicforge report --bundle out/ [--format text|csv]
//
// Every config key is also a flag of the same name; flags override the file.

#include "topicforge/errors.hpp"
#include "topicforge/pipeline_config.hpp"
#include "topicforge/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitUnexpected = 1;

int fail(int code, const std::string& message)
{
    std::cerr << "topicforge: error: " << message << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace topicforge;

    CLI::App app{"Topic modeling over accident narratives"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run the full pipeline");
    std::string config_path;
    run->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    std::map<std::string, std::optional<std::string>> overrides;
    for (const auto& key : PipelineConfig::keys()) {
        const std::string name(key.key);
        std::string help(key.help);
        if (!key.default_value.empty()) {
            help += " [default: " + std::string(key.default_value) + "]";
        }
        run->add_option("--" + name, overrides[name], help);
    }

    auto* report = app.add_subcommand("report", "Re-render tables from a saved bundle");
    std::string bundle_dir;
    std::string format = "text";
    report->add_option("--bundle", bundle_dir, "output directory of a previous run")->required();
    report->add_option("--format", format, "text or csv")->check(CLI::IsMember({"text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            return app.exit(e);
        }
        std::cerr << "error: " << e.what() << "\nRun with --help for more information.\n";
        return kExitInputError;
    }

    try {
        if (*run) {
            PipelineConfig config = config_path.empty() ? PipelineConfig{} : PipelineConfig::load(config_path);
            for (const auto& [key, value] : overrides) {
                if (value) {
                    config.set(key, *value);
                }
            }
            const auto bundle = run_pipeline(config);
            std::ostringstream csv;
            emit_comparison_table(bundle, std::cout, csv);
            std::cout << "\noutputs written to " << config.out_dir().string() << '\n';
            return kExitOk;
        }
        const auto bundle = load_bundle(bundle_dir);
        std::ostringstream discard;
        if (format == "csv") {
            emit_comparison_table(bundle, discard, std::cout);
        } else {
            emit_comparison_table(bundle, std::cout, discard);
        }
        return kExitOk;
    } catch (const PipelineError& e) {
        return fail(e.exit_code(), e.what());
    } catch (const ConfigError& e) {
        return fail(kExitInputError, e.what());
    } catch (const ParseError& e) {
        return fail(kExitInputError, e.what());
    } catch (const std::exception& e) {
        return fail(kExitUnexpected, e.what());
    }
}
