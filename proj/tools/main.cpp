// Command-line runner for scenario files.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dalembert/pipeline.hpp"

namespace fs = std::filesystem;
using namespace dalembert;

namespace {

struct Options {
    std::string scenario;
    std::string out = ".";
    double tol_scale = 1.0;
    bool quiet = false;
};

void write_file(const fs::path &path, const std::string &content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
}

void solve(const Scenario &sc, const Options &opt) {
    const SolveResult r = run_solve(sc);
    const fs::path path = fs::path(opt.out) / sc.output.trajectory;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    write_csv(f, r);
    if (!opt.quiet)
        std::cout << sc.name << ": " << r.solve.samples.size() << " samples (" << r.solve.method << ") -> "
                  << path.string() << '\n';
}

bool verify(const Scenario &sc, const Options &opt) {
    const VerificationReport report = run_verify(sc, opt.tol_scale);
    const fs::path base = fs::path(opt.out) / sc.output.report;
    write_file(base.string() + ".json", report.to_json());
    write_file(base.string() + ".txt", report.to_text());
    if (!opt.quiet) std::cout << report.to_text();
    return report.pass();
}

void action(const Scenario &sc) {
    std::cout.precision(17);
    for (const auto &v : run_action(sc)) std::cout << v.label << " = " << v.value << '\n';
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Time-dependent Lagrangian mechanics: moving frames, constraints, least action"};
    app.require_subcommand(1, 1);
    Options opt;
    app.add_option("--scenario", opt.scenario, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", opt.out, "Output directory");
    app.add_option("--tol-scale", opt.tol_scale, "Multiplies every check tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", opt.quiet, "Suppress console output");
    for (const char *name : {"solve", "verify", "action", "report"}) {
        static const std::map<std::string, std::string> help{
            {"solve", "Integrate the initial value problem and write the trajectory CSV"},
            {"verify", "Run the verification checks and write the report"},
            {"action", "Print continuous and discrete action values"},
            {"report", "solve and verify"}};
        app.add_subcommand(name, help.at(name))->fallthrough();
    }
    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        const Scenario sc = load_scenario(opt.scenario);
        fs::create_directories(opt.out);
        if (cmd == "solve") {
            solve(sc, opt);
            return 0;
        }
        if (cmd == "action") {
            action(sc);
            return 0;
        }
        if (cmd == "report" && sc.solver.initial) solve(sc, opt);
        return verify(sc, opt) ? 0 : 1;
    } catch (const std::exception &e) {
        std::cerr << opt.scenario << ": " << cmd << " failed: " << error_kind(e) << ": " << e.what() << '\n';
        return 2;
    }
}
