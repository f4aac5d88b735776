// qme: run master-equation scenarios from JSON files.
//
//   qme run <scenario.json> [--override key=value]... [--out-dir DIR] [--quiet]
//   qme show <scenario.json> [--override key=value]...

#include <iostream>

#include "CLI11.hpp"

#include "qme/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Density-matrix master-equation runner"};
    app.require_subcommand(1);

    std::string file;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "integrate a scenario and write states.csv, diagnostics.csv, summary.json");
    run->add_option("scenario", file, "scenario JSON file")->required();
    run->add_option("--override", overrides, "key=value with dot-path keys, repeatable");
    run->add_option("--out-dir", out_dir, "output directory (default $QME_OUT_DIR/<name>)");
    run->add_flag("--quiet", quiet, "print nothing on success");

    auto* show = app.add_subcommand("show", "validate a scenario and print its canonical JSON");
    show->add_option("scenario", file, "scenario JSON file")->required();
    show->add_option("--override", overrides, "key=value with dot-path keys, repeatable");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : qme::kExitError;
    }

    if (*show) {
        try {
            auto doc = qme::load_json(file);
            for (const auto& o : overrides) qme::apply_override(doc, o);
            std::cout << qme::to_json(qme::parse_scenario(doc)).dump(2) << "\n";
            return qme::kExitOk;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return qme::kExitError;
        }
    }

    qme::RunOptions options;
    options.overrides = overrides;
    options.quiet = quiet;
    if (!out_dir.empty()) options.out_dir = out_dir;
    const auto result = qme::run_scenario(std::filesystem::path(file), options);
    if (result.exit_code == qme::kExitError) {
        std::cerr << "error: " << result.error << "\n";
    } else if (result.exit_code == qme::kExitUnexpectedViolation) {
        std::cerr << "physics violation: positivity/occupation bounds broken, see "
                  << (result.out_dir / "summary.json").string() << "\n";
    }
    return result.exit_code;
}
