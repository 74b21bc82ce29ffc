// nmvi: command-line front end for problem files.
//   nmvi solve --input prob.json --out dir
//   nmvi diagnose | oracle --input prob.json
//   nmvi catalog-list

#include "nmvi/commands.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

bool write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    f << body;
    return static_cast<bool>(f);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extra-gradient solver and diagnostics for variational inequalities"};
    app.require_subcommand(1);

    std::string input;
    std::string out_dir = ".";
    nmvi::Overrides ov;
    std::uint64_t seed = 0;
    double residual_tol = 0.0;
    double grid_tol = 0.0;
    std::size_t max_iters = 0;
    std::size_t points = 0;

    auto add_common = [&](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("-i,--input", input, "Problem file (JSON)");
        if (needs_input) {
            in->required()->check(CLI::ExistingFile);
        }
        sub->add_option("-o,--out", out_dir, "Output directory for report.json and trace.csv");
        sub->add_option("--seed", seed, "Override the file's seed");
        sub->add_option("--residual-tol", residual_tol, "Override solver.residual_tol");
        sub->add_option("--grid-tol", grid_tol, "Override grid.tol");
        sub->add_option("--max-iters", max_iters, "Override solver.max_iters");
        sub->add_option("--points", points, "Override grid.points_per_axis");
    };
    add_common(app.add_subcommand("solve", "Run extra-gradient, write trace and report"), true);
    add_common(app.add_subcommand("diagnose", "Run the listed diagnostic checks"), true);
    add_common(app.add_subcommand("oracle", "Grid SOL/MSOL oracle for dim <= 3"), true);
    add_common(app.add_subcommand("catalog-list", "List builtin catalog problems"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : nmvi::kExitInvalid;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string verb = sub->get_name();
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--residual-tol")) ov.residual_tol = residual_tol;
    if (sub->count("--grid-tol")) ov.grid_tol = grid_tol;
    if (sub->count("--max-iters")) ov.max_iters = max_iters;
    if (sub->count("--points")) ov.points_per_axis = points;

    std::string text;
    if (!input.empty()) {
        std::ifstream f(input, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }

    const nmvi::CommandOutput out = nmvi::run_command(verb, text, ov);
    if (!out.error.empty()) {
        std::cerr << "error: " << out.error << "\n";
        return out.exit_code;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::filesystem::path dir(out_dir);
    if (!write_file(dir / "report.json", out.report.dump(2) + "\n")) {
        std::cerr << "error: cannot write " << (dir / "report.json").string() << "\n";
        return nmvi::kExitInvalid;
    }
    if (out.trace_csv && !write_file(dir / "trace.csv", *out.trace_csv)) {
        std::cerr << "error: cannot write " << (dir / "trace.csv").string() << "\n";
        return nmvi::kExitInvalid;
    }

    if (verb == "catalog-list") {
        for (const auto& e : out.report["catalog"]) {
            std::cout << e["name"].get<std::string>() << "  dim=" << e["dim"] << "  "
                      << e["description"].get<std::string>() << "\n";
        }
    } else if (verb == "solve") {
        const auto& r = out.report["solver_result"];
        std::cout << "status=" << r["status"].get<std::string>() << " iterations=" << r["iterations_used"]
                  << " residual=" << r["final_residual"] << "\n";
    } else if (verb == "diagnose") {
        for (const auto& r : out.report["diagnostic_reports"]) {
            std::cout << r["check_name"].get<std::string>() << ": " << r["verdict"].get<std::string>() << "\n";
        }
    } else {
        const auto& o = out.report["oracle_output"];
        std::cout << "sol=" << o["sol"].dump() << " msol=" << o["msol"].dump()
                  << " msol_subset_of_sol=" << o["msol_subset_of_sol"] << "\n";
    }
    return out.exit_code;
}
