// Command-line front end: certify / solve / measure / demo over problem
// files or builtin problem names.  Reports go to stdout as JSON; demo prints
// a human-readable summary instead.
//
// Exit codes: 0 = command ran (a failed certificate is data, not an error);
// 2 = input or evaluation error; 3 = unexpected internal failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <l1fix/l1fix.hpp>

namespace {

struct MeasureSpec {
    std::string kind;
    std::size_t size = 0;
};

MeasureSpec parse_ensemble_spec(const std::string& text) {
    const auto pos = text.rfind(':');
    if (pos == std::string::npos || pos == 0 || pos + 1 >= text.size())
        throw l1fix::input_error("--ensemble expects <kind:size>, e.g. random-in-ball:16");
    MeasureSpec spec;
    spec.kind = text.substr(0, pos);
    try {
        const long long n = std::stoll(text.substr(pos + 1));
        if (n < 1 || n > 4096) throw l1fix::input_error("");
        spec.size = static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw l1fix::input_error("ensemble size must be an integer in [1, 4096], got '" +
                                 text.substr(pos + 1) + "'");
    }
    return spec;
}

void run_demo(std::size_t cells) {
    using namespace l1fix;
    ProblemDefinition def = taoudi_example_definition();
    def.numerics.cells = cells;
    std::cout << "problem " << def.name << ": " << cells << " cells, horizon "
              << def.numerics.t_max << "\n";

    Report cert = run_certify(def, 1, 500);
    const auto& cp = cert.payload;
    std::cout << "  gamma = " << cp["gamma"].get<double>()
              << "  (kernel norm " << cp["kernel_norm"]["value"].get<double>() << ", "
              << cp["kernel_norm"]["source"].get<std::string>() << ")\n"
              << "  C = " << cp["C"].get<double>() << ", r = " << cp["r"].get<double>() << "\n"
              << "  certified: " << (cp["certified"].get<bool>() ? "yes" : "no") << "\n";
    for (const auto& a : cp["assumptions"]) {
        std::cout << "    " << a["id"].get<std::string>() << " "
                  << a["subject"].get<std::string>() << ": "
                  << a["status"].get<std::string>() << "\n";
    }

    SolveRunOptions sopt;
    Report sol = run_solve(def, sopt);
    const auto& sp = sol.payload;
    std::cout << "  solve (picard): " << sp["status"].get<std::string>() << " after "
              << sp["iterations"].get<std::size_t>() << " iterations, residual "
              << sp["final_residual"].get<double>();
    if (sp.contains("refinement_residual"))
        std::cout << " (refined-grid residual " << sp["refinement_residual"].get<double>() << ")";
    std::cout << ", |x*| = " << sp["final_norm"].get<double>() << "\n";

    Report mes = run_measure(def, "random-in-ball", 16, 1);
    const auto& mp = mes.payload;
    std::cout << "  measure (random-in-ball:16): mu " << mp["input"]["mu_hat"].get<double>()
              << " -> " << mp["image"]["mu_hat"].get<double>() << ", bound "
              << mp["rhs"].get<double>() << ", pass: " << (mp["pass"].get<bool>() ? "yes" : "no")
              << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Fixed-point toolkit for x(t) = g(t,(Tx)(t)) + f(t, int_0^t k(t,s) u(t,s,(Qx)(s)) ds) "
        "in L1(0, inf): hypothesis certification, Picard/split solvers, and "
        "noncompactness-measure diagnostics"};
    app.require_subcommand(1);

    std::string certify_arg;
    std::uint64_t certify_seed = 1;
    std::size_t certify_samples = 2000;
    CLI::App* certify_cmd =
        app.add_subcommand("certify", "Sample-check the hypotheses and emit a certificate");
    certify_cmd->add_option("problem", certify_arg, "problem file or builtin name")->required();
    certify_cmd->add_option("--seed", certify_seed, "RNG seed (default 1)");
    certify_cmd->add_option("--samples", certify_samples, "pointwise samples per inequality");

    std::string solve_arg;
    std::string solve_scheme = "picard";
    double solve_tol = -1.0;  // <0: use the problem's numerics.solve_tol
    std::size_t solve_max_iters = 200;
    std::string solve_table;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Iterate to a fixed point and report");
    solve_cmd->add_option("problem", solve_arg, "problem file or builtin name")->required();
    solve_cmd->add_option("--scheme", solve_scheme, "picard | split")
        ->check(CLI::IsMember({"picard", "split"}));
    solve_cmd->add_option("--tol", solve_tol, "relative residual target");
    solve_cmd->add_option("--max-iters", solve_max_iters, "iteration cap (default 200)");
    solve_cmd->add_option("--emit-table", solve_table, "write t <TAB> x*(t) rows to this file");

    std::string measure_arg;
    std::string measure_ensemble;
    std::uint64_t measure_seed = 1;
    CLI::App* measure_cmd = app.add_subcommand(
        "measure", "Estimate noncompactness measures and check the mu-contraction bound");
    measure_cmd->add_option("problem", measure_arg, "problem file or builtin name")->required();
    measure_cmd
        ->add_option("--ensemble", measure_ensemble,
                     "<kind:size>, kind in {concentrating, escaping, random-in-ball}")
        ->required();
    measure_cmd->add_option("--seed", measure_seed, "RNG seed (default 1)");

    std::size_t demo_cells = 1024;
    CLI::App* demo_cmd =
        app.add_subcommand("demo", "Run the bundled example end to end and print a summary");
    demo_cmd->add_option("--cells", demo_cells, "grid cells (default 1024)")
        ->check(CLI::Range(static_cast<std::size_t>(2), static_cast<std::size_t>(1u << 20)));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*certify_cmd) {
            l1fix::ProblemDefinition def = l1fix::resolve_problem(certify_arg);
            std::cout << l1fix::run_certify(def, certify_seed, certify_samples).dump();
        } else if (*solve_cmd) {
            l1fix::ProblemDefinition def = l1fix::resolve_problem(solve_arg);
            l1fix::SolveRunOptions opt;
            opt.scheme = solve_scheme == "split" ? l1fix::Scheme::split : l1fix::Scheme::picard;
            if (solve_tol > 0.0) opt.tol = solve_tol;
            opt.max_iters = solve_max_iters;
            opt.table_path = solve_table;
            std::cout << l1fix::run_solve(def, opt).dump();
        } else if (*measure_cmd) {
            l1fix::ProblemDefinition def = l1fix::resolve_problem(measure_arg);
            const MeasureSpec spec = parse_ensemble_spec(measure_ensemble);
            std::cout << l1fix::run_measure(def, spec.kind, spec.size, measure_seed).dump();
        } else if (*demo_cmd) {
            run_demo(demo_cells);
        }
        return 0;
    } catch (const l1fix::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const l1fix::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const l1fix::eval_error& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 2;
    } catch (const l1fix::truncation_error& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
}
