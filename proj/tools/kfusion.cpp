// kfusion <command> --in <file> [--out <file>] [--seed N] [--tol X] [--system NAME]
#include "kfusion/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
    using namespace kfusion;
    CLI::App app{"K-fusion frame toolkit"};
    std::string command, in, out;
    cli::Flags flags;
    std::uint64_t seed = 0;
    double tol = 0;
    std::string commands_help;
    for (const auto& c : cli::commands())
        commands_help += (commands_help.empty() ? "" : ", ") + c;

    app.add_option("command", command, commands_help)->required()->check(CLI::IsMember(cli::commands()));
    app.add_option("--in", in, "instance file");
    app.add_option("--out", out, "write the report as JSON");
    auto* seed_opt = app.add_option("--seed", seed, "seed for sampling and generation");
    auto* tol_opt = app.add_option("--tol", tol, "residual tolerance; rank and relative cuts scale with it")
                        ->check(CLI::PositiveNumber);
    app.add_option("--system", flags.system, "name of the primary system")->capture_default_str();
    app.add_option("--dim", flags.dim, "random: ambient dimension")->capture_default_str();
    app.add_option("--members", flags.members, "random: number of subspaces")->capture_default_str();
    app.add_option("--rank", flags.rank, "random: rank of K")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::exit_pass : cli::exit_input;
    }
    if (*seed_opt)
        flags.seed = seed;
    if (*tol_opt)
        flags.tol = tol;

    try {
        std::optional<cli::ProblemInstance> inst;
        if (!in.empty()) {
            const Tolerance t = flags.tol ? Tolerance::from_scale(*flags.tol) : Tolerance{};
            inst = cli::load_instance(in, t);
        }
        const cli::Report report = cli::run(command, inst ? &*inst : nullptr, flags);
        std::cout << report.human();
        if (!out.empty()) {
            std::ofstream f(out);
            if (!f)
                throw InputError("cannot write \"" + out + "\"");
            f << report.to_json().dump(2) << "\n";
        }
        return report.pass ? cli::exit_pass : cli::exit_fail;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return cli::exit_input;
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis fails: " << e.what() << "\n";
        return cli::exit_fail;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return cli::exit_numerical;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return cli::exit_input;
    }
}
