// Command-line front end: simulate, sweep, protocol, oracle, validate.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gemsim/bessel.hpp"
#include "gemsim/io.hpp"

namespace {

using namespace gemsim;

enum Exit { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::Domain: return kValidation;
    case ErrorKind::Numerical: return kNumerical;
    case ErrorKind::Io: return kIo;
    }
    return kNumerical;
}

ExperimentConfig load(const std::string& path, const std::string& output_dir)
{
    ExperimentConfig c = load_config(path);
    if (!output_dir.empty()) c.output_dir = output_dir;
    return c;
}

int execute(const ExperimentConfig& c)
{
    const auto result = run_experiment(c);
    std::printf("%s: %zu output pulse(s)", to_string(c.protocol), result.outputs.size());
    if (result.efficiency) std::printf(", efficiency %.6g", result.efficiency->efficiency);
    if (result.fit) std::printf(", J0^2 fit R^2 %.6g", result.fit->r_squared);
    std::printf(", energy balance %.3g\nwrote %s\n", result.balance, c.output_dir.string().c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gradient-echo memory simulator with light-shift grating diffraction"};
    app.require_subcommand(1);

    std::string config_path, output_dir, which;
    double nu = 0.0, tau = 0.0;
    int n_max = -1;

    auto* simulate = app.add_subcommand("simulate", "Run the protocol named in a config");
    simulate->add_option("config", config_path, "Config file")->required();
    simulate->add_option("-o,--output", output_dir, "Override output_dir");

    auto* sweep = app.add_subcommand("sweep", "Efficiency against grating duration");
    sweep->add_option("config", config_path, "Config file")->required();
    sweep->add_option("-o,--output", output_dir, "Override output_dir");

    auto* protocol = app.add_subcommand("protocol", "Run a pulse-sequencing protocol");
    protocol->add_option("kind", which, "fifo or reorder")->required()->check(CLI::IsMember({"fifo", "reorder"}));
    protocol->add_option("config", config_path, "Config file")->required();
    protocol->add_option("-o,--output", output_dir, "Override output_dir");

    auto* oracle = app.add_subcommand("oracle", "Print Kapitza-Dirac weights J_n(nu tau)^2");
    oracle->add_option("--nu", nu, "Grating amplitude")->required();
    oracle->add_option("--tau", tau, "Grating duration")->required();
    oracle->add_option("--n-max", n_max, "Largest |n| (default ceil(nu tau) + 5)");

    auto* validate = app.add_subcommand("validate", "Check a config and its schedule without simulating");
    validate->add_option("config", config_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (*simulate) return execute(load(config_path, output_dir));
        if (*sweep) {
            auto c = load(config_path, output_dir);
            if (c.protocol != Protocol::Sweep) {
                std::cerr << "error: " << config_path << " sets protocol = " << to_string(c.protocol)
                          << "; sweep needs protocol = sweep\n";
                return kValidation;
            }
            return execute(c);
        }
        if (*protocol) {
            auto c = load(config_path, output_dir);
            c.protocol = which == "fifo" ? Protocol::Fifo : Protocol::Reorder;
            return execute(c);
        }
        if (*oracle) {
            const double x = nu * tau;
            if (n_max < 0) n_max = static_cast<int>(std::ceil(std::abs(x))) + 5;
            std::printf("n,J_n,J_n^2\n");
            for (int n = -n_max; n <= n_max; ++n) {
                const double j = bessel_jn(n, x);
                std::printf("%d,%s,%s\n", n, format_double(j).c_str(), format_double(j * j).c_str());
            }
            return kOk;
        }
        if (*validate) {
            const auto c = load(config_path, "");
            const auto report = validate_config(c);
            if (report.ok()) {
                std::printf("%s: ok (%s, N = %.6g, optical depth %.6g)\n", config_path.c_str(), to_string(c.protocol),
                            c.params.atomic_density, c.optical_depth);
                return kOk;
            }
            std::cerr << report.summary();
            return kValidation;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
