#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vlasym/commands.hpp"

using namespace vlasym;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Appends "--key value" for each "key = value" line of a config file whose key was not given on the
// command line.
std::vector<std::string> with_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") path = args[i + 1];
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot read config '" + path + "'");
    std::set<std::string> given;
    for (auto& a : args)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(0, a.find('=')));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = "--" + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (given.count(key)) continue;
        args.push_back(key);
        if (value != "true") {
            std::istringstream words(value);
            for (std::string w; words >> w;) args.push_back(w);
        }
    }
    return args;
}

struct Common {
    bool json = false;
    std::string out, config;
};

void add_common(CLI::App* sub, RunConfig& cfg, Common& common) {
    sub->add_flag("--json", common.json, "emit the report as JSON");
    sub->add_option("--out", common.out, "write the report to a file");
    sub->add_option("--config", common.config, "read 'key = value' defaults from a file");
    for (std::string_view name : kParamNames) {
        const std::string n(name);
        if (sub->get_option_no_throw("--" + n)) continue;
        sub->add_option_function<std::string>("--" + n, [&cfg, n](const std::string& v) { cfg.params[n] = v; },
                                               "value of " + n + " (rational, decimal or 'symbolic')");
    }
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    Common common;
    CLI::App app{"Conformal-algebra symmetries of the one-dimensional Vlasov equation"};
    app.require_subcommand(1);

    auto* verify = app.add_subcommand("verify", "structure table and symmetry checks of a catalog representation");
    verify->add_option("--rep", cfg.rep, "representation")->required()->check(CLI::IsMember(
        std::vector<std::string>(kRepresentationNames.begin(), kRepresentationNames.end())));
    verify->add_option("--z", cfg.z, "dynamical exponent(s)");

    auto* bracket = app.add_subcommand("bracket", "Lie bracket of two vector fields");
    bracket->add_option("a", cfg.a, "field text, file, or generator name of --rep")->required();
    bracket->add_option("b", cfg.b, "field text, file, or generator name of --rep")->required();
    bracket->add_option("--rep", cfg.rep, "expand the result in this representation's basis");
    bracket->add_option("--z", cfg.z, "dynamical exponent")->expected(1);

    auto* nogo = app.add_subcommand("nogo", "time-dependent obstruction for the extension by X[2]");
    nogo->add_option("--z", cfg.z, "dynamical exponent(s)");
    nogo->add_flag("--complete", cfg.complete, "also build and check the tail-completed X[2]");

    auto* ode = app.add_subcommand("ode", "coefficient ODE solves");
    ode->add_option("kind", cfg.mode, "d12, b12, b0 or quad")->required()->check(CLI::IsMember({"d12", "b12", "b0", "quad"}));
    ode->add_option("--z", cfg.z, "dynamical exponent")->expected(1);
    ode->add_option("--lo", cfg.lo, "grid start");
    ode->add_option("--hi", cfg.hi, "grid end");
    ode->add_option("--step", cfg.step, "grid step");
    ode->add_option("--anchor", cfg.anchor, "d12 value at the grid start");
    ode->add_option("--init", cfg.init, "b12 initial value and slope")->expected(2);
    ode->add_option("--s", cfg.s, "b0 source strength");
    ode->add_option("--base", cfg.base, "quadrature base point");
    ode->add_option("--tol", cfg.residual_tol, "residual tolerance");
    ode->add_flag("--compare-closed", cfg.compare_closed, "compare against the closed form at z = 2");
    ode->add_option("--csv", cfg.csv, "write the solution table");

    auto* pde = app.add_subcommand("pde", "numeric checks on exact Vlasov solutions");
    pde->add_option("mode", cfg.mode, "symcheck or transport")->required()->check(CLI::IsMember({"symcheck", "transport"}));
    pde->add_option("--rep", cfg.rep, "representation (default example1)");
    pde->add_option("--z", cfg.z, "dynamical exponent")->expected(1);
    pde->add_option("--gen", cfg.gen, "generator, e.g. Y0 or X[-1]");
    pde->add_option("--corrupt", cfg.corrupt, "check a deliberately broken copy of this generator");
    pde->add_option("--eps", cfg.eps, "step sizes for the slope fit");
    pde->add_option("--points", cfg.points, "sample points");
    pde->add_option("--min-slope", cfg.min_slope, "second-order threshold");
    pde->add_option("--step", cfg.step, "characteristic step (transport)");
    pde->add_option("--csv", cfg.csv, "write samples");

    for (auto* sub : {verify, bracket, nogo, ode, pde}) add_common(sub, cfg, common);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = with_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();

    try {
        const Report report = run_command(cfg);
        const std::string text = common.json ? report.to_json().dump(2) + "\n" : report.to_text();
        if (!common.out.empty()) {
            std::ofstream out(common.out);
            if (!out) throw InvalidArgument("cannot write '" + common.out + "'");
            out << text;
        }
        std::cout << text;
        return report.ok() ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
