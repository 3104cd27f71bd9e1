#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectral/cli.hpp"

int main(int argc, char** argv)
{
    using namespace spectral;
    CLI::App app{"Fredholm determinants, tau functions and spectral data of linear systems"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string x_grid, lambda_grid, kappa_grid;
    std::vector<std::string> tols;

    auto common = [&](CLI::App* s) {
        s->add_option("--output,-o", cfg.output, "Output file (default: standard output)");
        s->add_option("--format", cfg.format, "csv or json");
    };
    auto system = [&](CLI::App* s) {
        s->add_option("--system", cfg.system_path, "System description (JSON)");
        s->add_option("--nodes", cfg.nodes, "Quadrature nodes");
        s->add_option("--map", cfg.map, "auto, rational or exponential");
        s->add_option("--scale", cfg.scale, "Map scale L");
    };

    auto* det = app.add_subcommand("det", "det(I + z Gamma_phi) with node doubling");
    system(det);
    common(det);
    det->add_option("--z", cfg.z, "Spectral parameter z");

    for (const char* name : {"tau", "potential", "gl", "green"}) {
        auto* s = app.add_subcommand(name, std::string(name) + " on an x grid");
        system(s);
        common(s);
        s->add_option("--x-grid", x_grid, "a:b:n");
        if (std::string(name) == "green") {
            s->add_option("--lambda", cfg.lambda, "Spectral parameter (negative)");
            s->add_option("--terms", cfg.terms, "Series terms");
        }
    }

    auto* xi = app.add_subcommand("xi", "xi function on a lambda grid");
    system(xi);
    common(xi);
    xi->add_option("--potential", cfg.potential, "free or soliton (instead of --system)");
    xi->add_option("--x", cfg.x, "Position");
    xi->add_option("--lambda-grid", lambda_grid, "a:b:n");
    xi->add_option("--eps", cfg.eps, "Imaginary offset");

    auto* phase = app.add_subcommand("phase", "de Branges phase of a canonical system");
    common(phase);
    phase->add_option("--canonical", cfg.canonical_path, "Canonical system description (JSON)");
    phase->add_option("--x", cfg.x, "Endpoint x");
    phase->add_option("--kappa-grid", kappa_grid, "a:b:n");

    auto* curve = app.add_subcommand("curve", "Spectral curve of a finite-gap potential");
    system(curve);
    common(curve);
    curve->add_option("--ell", cfg.ell, "Genus bound ell");
    curve->add_option("--constants", cfg.constants, "c1=..,c2=.. (rationals)");
    curve->add_option("--jet", cfg.jet, "u=..,u1=..,u2=..");
    curve->add_option("--at", cfg.at, "x=.. for the --system path");

    auto* verify = app.add_subcommand("verify", "Identity suite with a JSON report");
    system(verify);
    common(verify);
    verify->add_option("--seed", cfg.seed, "Seed for random test operators");
    verify->add_option("--terms", cfg.terms, "Green series terms");

    for (auto* s : app.get_subcommands({}))
        s->add_option("--tol", tols, "Tolerance override name=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        cfg.subcommand = parse_subcommand(app.get_subcommands().front()->get_name());
        if (!x_grid.empty()) cfg.x_grid = parse_grid(x_grid);
        if (!lambda_grid.empty()) cfg.lambda_grid = parse_grid(lambda_grid);
        if (!kappa_grid.empty()) cfg.kappa_grid = parse_grid(kappa_grid);
        for (const auto& t : tols) {
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ArgumentError("--tol: expected name=value, got '" + t + "'");
            cfg.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
        }
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }
    return run(cfg, std::cout, std::cerr);
}
