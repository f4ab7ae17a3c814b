#include "mcdual/cli/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    namespace cli = mcdual::cli;
    CLI::App app{"mcdual: reflectionless multichannel models and their classical duals"};
    std::string config;
    std::string out;
    std::string format;
    unsigned workers = 0;
    double tol = 0.0;
    app.add_option("--config", config, "Run configuration (JSON)")->required();
    auto* out_opt = app.add_option("--out", out, "Output path, '-' for stdout");
    auto* fmt_opt = app.add_option("--format", format, "csv or structured-text");
    auto* workers_opt = app.add_option("--workers", workers, "Worker threads, 0 = one per processor");
    auto* tol_opt = app.add_option("--tol", tol, "Relative integration tolerance");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << cli::error_record(cli::parse_failure, "parse", e.what()) << '\n';
        return cli::parse_failure;
    }

    cli::Overrides ov;
    if (*out_opt) {
        ov.out_path = out;
    }
    if (*workers_opt) {
        ov.workers = workers;
    }
    if (*tol_opt) {
        ov.rel_tol = tol;
    }
    if (*fmt_opt) {
        try {
            ov.format = cli::parse_format(format);
        } catch (const cli::parse_error& e) {
            std::cerr << cli::error_record(cli::parse_failure, "parse", e.what()) << '\n';
            return cli::parse_failure;
        }
    }
    return cli::run(config, ov, std::cout, std::cerr);
}
