// Command-line front end. Single points print JSON on stdout; grids write CSV
// to --out (or stdout when --out is absent).
//
// Exit codes: 0 success, 2 invalid arguments, 3 numeric failure, 4 I/O.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dephasing/channel.hpp"
#include "dephasing/closed_form.hpp"
#include "dephasing/entanglement.hpp"
#include "dephasing/optimizer.hpp"
#include "dephasing/sweep.hpp"

namespace {

using namespace dephasing;
using nlohmann::json;

constexpr int kExitInvalid = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

// Beyond this e^{-gamma/2} underflows and the channel is fully dephasing.
constexpr double kGammaCap = 700.0;

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Args {
    int d = 3;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    std::optional<double> energy;
    int grid = 100;
    double gamma_max = 3.0;
    std::string out;
    std::string method;
    int jobs = 1;
    std::optional<double> tol;
};

double capped(double g) {
    if (!std::isfinite(g) && g > 0.0) return kGammaCap;
    return std::min(g, kGammaCap);
}

GammaPair gammas(const Args& a) { return GammaPair(capped(a.gamma0), capped(a.gamma1)); }

OptimizerOptions options(const Args& a) {
    OptimizerOptions o;
    if (a.tol) o.refine_tol = *a.tol;
    o.validate();
    return o;
}

Method method(const Args& a) {
    if (a.method.empty()) return a.d <= 4 ? Method::closed : Method::numeric;
    if (a.method == "closed") {
        if (a.d > 4) throw invalid_argument("--method closed requires d <= 4");
        return Method::closed;
    }
    if (a.method == "numeric") return Method::numeric;
    throw invalid_argument("--method must be 'closed' or 'numeric'");
}

json result_json(const DiscriminationResult& r) {
    json j;
    j["ps"] = r.ps;
    j["coeffs"] = r.coeffs;
    j["region"] = std::string(to_string(r.region));
    j["method"] = std::string(to_string(r.method));
    if (r.energy) j["energy"] = *r.energy;
    return j;
}

template <class Write>
void emit(const std::string& path, Write&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open '" + path + "' for writing");
    write(f);
    f.flush();
    if (!f) throw io_error("write to '" + path + "' failed");
}

int cmd_optimal(const Args& a) {
    const GammaPair g = gammas(a);
    const Method m = method(a);
    const auto opts = options(a);
    const auto r = m == Method::closed ? closed_form_optimal(a.d, g) : brute_force_unconstrained(a.d, g, opts);
    std::cout << result_json(r).dump() << '\n';
    return 0;
}

int cmd_constrained(const Args& a) {
    if (!a.energy) throw invalid_argument("constrained requires --energy");
    const GammaPair g = gammas(a);
    const auto opts = options(a);
    const auto r = a.d == 2 ? qubit_optimal(g, a.energy) : constrained_optimize(a.d, g, *a.energy, opts);
    std::cout << result_json(r).dump() << '\n';
    return 0;
}

int cmd_sweep(const Args& a) {
    SweepSpec spec;
    spec.dim = a.d;
    spec.grid = a.grid;
    spec.gamma_max = capped(a.gamma_max);
    spec.energy = a.energy;
    spec.method = method(a);
    spec.jobs = a.jobs;
    spec.opts = options(a);
    const auto rows = run_sweep(spec);
    emit(a.out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
    return 0;
}

int cmd_classify(const Args& a) {
    const auto pts = run_classify(a.d, a.grid, capped(a.gamma_max), a.jobs);
    emit(a.out, [&](std::ostream& os) { write_classify_csv(os, pts); });
    return 0;
}

int cmd_boundary(const Args& a) {
    if (!a.energy) throw invalid_argument("boundary requires --energy");
    const auto curve = dimension_transition(a.d, *a.energy, a.grid, capped(a.gamma_max), options(a));
    emit(a.out, [&](std::ostream& os) { write_boundary_csv(os, a.d, curve); });
    return 0;
}

int cmd_entangled(const Args& a) {
    if (a.d < 2 || a.d > 6) throw invalid_argument("entangled: d must lie in [2, 6]");
    const GammaPair g = gammas(a);
    const auto opts = options(a);
    const double assisted = assisted_optimum(a.d, g, opts).ps;
    const double unassisted = brute_force_unconstrained(a.d, g, opts).ps;
    json j;
    j["assisted_ps"] = assisted;
    j["unassisted_ps"] = unassisted;
    j["delta"] = std::abs(assisted - unassisted);
    std::cout << j.dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal discrimination of dephasing channels"};
    app.require_subcommand(1);
    Args a;

    auto add_point = [&](CLI::App* s) {
        s->add_option("--d", a.d, "probe dimension")->required();
        s->add_option("--gamma0", a.gamma0, "first dephasing rate")->required()->check(CLI::NonNegativeNumber);
        s->add_option("--gamma1", a.gamma1, "second dephasing rate")->required()->check(CLI::NonNegativeNumber);
        s->add_option("--tol", a.tol, "refinement tolerance");
    };
    auto add_grid = [&](CLI::App* s) {
        s->add_option("--d", a.d, "probe dimension")->required();
        s->add_option("--grid", a.grid, "points per axis");
        s->add_option("--gamma-max", a.gamma_max, "largest rate on each axis");
        s->add_option("--out", a.out, "output CSV path");
        s->add_option("--jobs", a.jobs, "worker threads");
        s->add_option("--tol", a.tol, "refinement tolerance");
    };

    auto* optimal = app.add_subcommand("optimal", "unconstrained optimum at one point");
    add_point(optimal);
    optimal->add_option("--method", a.method, "closed or numeric");

    auto* constrained = app.add_subcommand("constrained", "optimum at fixed mean energy");
    add_point(constrained);
    constrained->add_option("--energy", a.energy, "mean energy")->required();

    auto* sweep = app.add_subcommand("sweep", "grid of optima as CSV");
    add_grid(sweep);
    sweep->add_option("--energy", a.energy, "mean energy (unconstrained when absent)");
    sweep->add_option("--method", a.method, "closed or numeric");

    auto* classify = app.add_subcommand("classify", "closed-form region per grid point");
    add_grid(classify);

    auto* boundary = app.add_subcommand("boundary", "locus where the top level drops out");
    add_grid(boundary);
    boundary->add_option("--energy", a.energy, "mean energy")->required();

    auto* entangled = app.add_subcommand("entangled", "assisted vs unassisted optimum");
    add_point(entangled);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*optimal) return cmd_optimal(a);
        if (*constrained) return cmd_constrained(a);
        if (*sweep) return cmd_sweep(a);
        if (*classify) return cmd_classify(a);
        if (*boundary) return cmd_boundary(a);
        if (*entangled) return cmd_entangled(a);
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitInvalid;
}
