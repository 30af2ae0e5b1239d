#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "reachcert/bangbang.hpp"
#include "reachcert/fixtures.hpp"
#include "reachcert/geometry.hpp"
#include "reachcert/io.hpp"
#include "reachcert/mintime.hpp"
#include "reachcert/nonlinear2d.hpp"
#include "reachcert/sysdef.hpp"
#include "reachcert/version.hpp"

using namespace reachcert;
using nlohmann::json;

namespace {

// Exit taxonomy: 0 ok, 2 parse/eligibility, 3 extremality, 4 oracle gap,
// 5 certificate failure.
constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitExtremality = 3;
constexpr int kExitOracleGap = 4;
constexpr int kExitCertificate = 5;

sysdef::SystemVariant load_system(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw sysdef::ParseError(path, "cannot open system file");
    std::stringstream ss;
    ss << f.rdbuf();
    return sysdef::parse_system(ss.str());
}

bool linear_eligible(const sysdef::LinearSystem& sys) { return sysdef::is_normal(sys); }

bool nonlinear_eligible(const sysdef::NonlinearSystem2D& sys) {
    return sys.flags.all() && sysdef::is_normal(sysdef::linearize_at_origin(sys));
}

bool eligible(const sysdef::SystemVariant& sys) {
    if (std::holds_alternative<sysdef::LinearSystem>(sys))
        return linear_eligible(std::get<sysdef::LinearSystem>(sys));
    return nonlinear_eligible(std::get<sysdef::NonlinearSystem2D>(sys));
}

double minimized_hamiltonian_linear(const sysdef::LinearSystem& sys, const Vec& x, const Vec& zeta) {
    double h = zeta.dot(sys.A * x);
    for (int i = 0; i < sys.m; ++i) h -= std::abs(zeta.dot(sys.B.col(i)));
    return h;
}

struct CheckReport {
    bool parsed = false;
    bool is_linear = false;
    bool eligible = false;
    json detail;
};

CheckReport run_check(const sysdef::SystemVariant& sys) {
    CheckReport rep;
    rep.parsed = true;
    rep.detail = json::object();
    if (std::holds_alternative<sysdef::LinearSystem>(sys)) {
        rep.is_linear = true;
        const auto& lin = std::get<sysdef::LinearSystem>(sys);
        const auto rec = sysdef::normality_check(lin);
        json cols = json::array();
        bool normal = true;
        for (const auto& c : rec) {
            cols.push_back(json{{"rank", c.rank}, {"L_const", c.L_const}});
            if (c.rank != lin.n) normal = false;
        }
        rep.detail["kind"] = "linear";
        rep.detail["n"] = lin.n;
        rep.detail["m"] = lin.m;
        rep.detail["columns"] = cols;
        rep.detail["normal"] = normal;
        rep.eligible = normal;
    } else {
        const auto& nl = std::get<sysdef::NonlinearSystem2D>(sys);
        const auto lin = sysdef::linearize_at_origin(nl);
        const auto rec = sysdef::normality_check(lin);
        bool lin_normal = true;
        json cols = json::array();
        for (const auto& c : rec) {
            cols.push_back(json{{"rank", c.rank}, {"L_const", c.L_const}});
            if (c.rank != lin.n) lin_normal = false;
        }
        rep.detail["kind"] = "nonlinear2d";
        rep.detail["flags"] = json{{"origin_equilibrium", nl.flags.origin_equilibrium},
                                   {"linearization_rank", nl.flags.linearization_rank},
                                   {"vanishing_control_jacobian", nl.flags.vanishing_control_jacobian}};
        rep.detail["linearization_normal"] = lin_normal;
        rep.detail["linearization_columns"] = cols;
        rep.detail["lipschitz_bound_default_box"] = sysdef::derivative_lipschitz_bound(nl);
        rep.eligible = nl.flags.all() && lin_normal;
    }
    rep.detail["certified_eligible"] = rep.eligible;
    return rep;
}

void print_check(const CheckReport& rep) {
    if (rep.is_linear) {
        const auto& cols = rep.detail["columns"];
        for (size_t i = 0; i < cols.size(); ++i)
            std::printf("column %zu: rank %d, L=%s\n", i + 1, cols[i]["rank"].get<int>(),
                        io::format_double(cols[i]["L_const"].get<double>()).c_str());
        std::printf("normal: %s\n", rep.detail["normal"].get<bool>() ? "yes" : "no");
    } else {
        const auto& f = rep.detail["flags"];
        std::printf("F(0) = 0:                 %s\n",
                    f["origin_equilibrium"].get<bool>() ? "pass" : "fail");
        std::printf("rank[G(0), DF(0)G(0)]:    %s\n",
                    f["linearization_rank"].get<bool>() ? "pass" : "fail");
        std::printf("DG(0) = 0:                %s\n",
                    f["vanishing_control_jacobian"].get<bool>() ? "pass" : "fail");
        std::printf("linearization normal:     %s\n",
                    rep.detail["linearization_normal"].get<bool>() ? "yes" : "no");
        std::printf("Lipschitz bound [-2,2]^2: %s\n",
                    io::format_double(rep.detail["lipschitz_bound_default_box"].get<double>()).c_str());
    }
    std::printf("certified-mode eligible: %s\n", rep.eligible ? "yes" : "no");
}

std::vector<Vec> load_points(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open points file: " + path);
    std::vector<Vec> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        Vec x(static_cast<int>(vals.size()));
        for (size_t i = 0; i < vals.size(); ++i) x(static_cast<int>(i)) = vals[i];
        out.push_back(x);
    }
    return out;
}

std::vector<Vec> random_points(int count, int dim, double half_width, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-half_width, half_width);
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) {
        Vec x(dim);
        for (int d = 0; d < dim; ++d) x(d) = uni(rng);
        out.push_back(x);
    }
    return out;
}

int cmd_boundary(const sysdef::SystemVariant& sys, double tau, int dirs, const std::string& out,
                 bool exploratory, std::uint64_t seed, const std::string& config) {
    std::string csv = io::output_header(config, seed);
    json summary;
    summary["n_dirs"] = dirs;
    if (std::holds_alternative<sysdef::LinearSystem>(sys)) {
        const auto& lin = std::get<sysdef::LinearSystem>(sys);
        std::vector<bangbang::BoundaryPoint> points;
        try {
            points = bangbang::sample_boundary(lin, tau, dirs);
        } catch (const std::logic_error& e) {
            std::fprintf(stderr, "extremality failure: %s\n", e.what());
            return kExitExtremality;
        }
        std::string cols;
        for (int i = 0; i < lin.n; ++i) cols += "zeta_" + std::to_string(i + 1) + ",";
        for (int i = 0; i < lin.n; ++i) cols += "x_" + std::to_string(i + 1) + ",";
        for (int i = 0; i < lin.m; ++i) cols += "n_switches_" + std::to_string(i + 1) + ",";
        csv += cols + "T\n";
        int max_switches = 0;
        double max_residual = 0.0;
        for (const auto& p : points) {
            std::vector<double> row;
            for (int i = 0; i < lin.n; ++i) row.push_back(p.zeta(i));
            for (int i = 0; i < lin.n; ++i) row.push_back(p.x(i));
            for (int i = 0; i < lin.m; ++i) {
                row.push_back(p.control.n_switches(i));
                max_switches = std::max(max_switches, p.control.n_switches(i));
            }
            row.push_back(p.T);
            csv += io::join_csv_row(row);
            max_residual = std::max(
                max_residual, std::abs(p.zeta.dot(p.x) - bangbang::support_function(lin, p.zeta, tau)));
        }
        summary["max_switch_count"] = max_switches;
        summary["max_extremality_residual"] = max_residual;
    } else {
        const auto& nl = std::get<sysdef::NonlinearSystem2D>(sys);
        if (!nonlinear_eligible(nl) && !exploratory) {
            std::fprintf(stderr,
                         "system is not certified-mode eligible; rerun with --exploratory\n");
            return kExitParse;
        }
        const auto boundary = nonlinear2d::sample_nonlinear_boundary(nl, tau, dirs);
        csv += "angle,x_1,x_2,n_switches\n";
        for (int k = 0; k < dirs; ++k) {
            const auto& s = boundary.samples[static_cast<size_t>(k)];
            csv += io::join_csv_row({2.0 * M_PI * k / dirs, s.endpoint(0), s.endpoint(1),
                                     static_cast<double>(s.n_switches)});
        }
        summary["closed_simple"] = boundary.closed_simple;
        summary["certified_mode"] = boundary.certified_mode;
        summary["uncertified_count"] = boundary.uncertified_count;
        if (!exploratory && !boundary.certified_mode) {
            io::write_text_file(out, csv);
            io::write_text_file(out + ".summary.json", summary.dump(2));
            std::fprintf(stderr, "extremality/certification failure in certified mode\n");
            return kExitExtremality;
        }
    }
    io::write_text_file(out, csv);
    io::write_text_file(out + ".summary.json", summary.dump(2));
    return kExitOk;
}

int cmd_mintime(const sysdef::SystemVariant& sys_variant, const std::vector<Vec>& points,
                double tol, int resolution, double grid_half, double gap_bound,
                const std::string& out, std::uint64_t seed, const std::string& config) {
    if (!std::holds_alternative<sysdef::LinearSystem>(sys_variant)) {
        std::fprintf(stderr, "mintime bisection requires a linear system\n");
        return kExitParse;
    }
    const auto& sys = std::get<sysdef::LinearSystem>(sys_variant);
    const bool with_grid = resolution > 0 && sys.n == 2;

    mintime::TimeGrid grid;
    if (with_grid) {
        mintime::GridSpec spec;
        spec.lo = Vec2(-grid_half, -grid_half);
        spec.hi = Vec2(grid_half, grid_half);
        spec.resolution = resolution;
        grid = mintime::grid_value_iteration(sys_variant, spec);
    }

    std::string csv = io::output_header(config, seed);
    for (int i = 0; i < sys.n; ++i) csv += "x_" + std::to_string(i + 1) + ",";
    csv += "T,method,gap\n";
    double max_gap = 0.0;
    for (const Vec& x : points) {
        const auto r = mintime::min_time_linear(sys, x, tol);
        const double tb = r.infinite ? std::numeric_limits<double>::infinity() : r.T;
        double gap = 0.0;
        if (with_grid) {
            const double tg = grid.value_at(Vec2(x(0), x(1)));
            gap = std::abs(tb - tg);
        }
        max_gap = std::max(max_gap, gap);
        std::string row;
        for (int i = 0; i < sys.n; ++i) row += io::format_double(x(i)) + ",";
        row += io::format_double(tb);
        row += with_grid ? ",both," : ",bisect,";
        row += io::format_double(gap);
        csv += row + "\n";
    }
    io::write_text_file(out, csv);
    if (with_grid && max_gap > gap_bound) {
        std::fprintf(stderr, "oracle gap %g exceeds bound %g\n", max_gap, gap_bound);
        return kExitOracleGap;
    }
    return kExitOk;
}

struct CertifyResult {
    json bundle;
    bool all_pass = true;
};

CertifyResult certify_linear(const sysdef::LinearSystem& sys, double horizon, int dirs) {
    CertifyResult result;
    const double p = sys.n;

    auto boundary_to_data = [&](int nd) {
        const auto boundary = bangbang::sample_boundary(sys, horizon, nd);
        std::pair<std::vector<geometry::SupportSample>, std::vector<Vec>> data;
        for (const auto& bp : boundary) {
            data.first.push_back({bp.x, bp.zeta});
            data.second.push_back(bp.x);
        }
        return data;
    };
    const auto coarse = boundary_to_data(dirs);
    const auto fine = boundary_to_data(2 * dirs);
    const auto cert = geometry::fit_convexity_constant(coarse.first, coarse.second, p);
    const auto cert2 = geometry::fit_convexity_constant(fine.first, fine.second, p);
    const double ratio = cert2.gamma_hat / cert.gamma_hat;
    const bool conv_pass = cert.gamma_hat > 0.0 && std::abs(ratio - 1.0) <= 0.10;
    result.bundle["convexity"] =
        json::parse(geometry::certificate_to_json(cert, ratio));
    result.bundle["convexity_pass"] = conv_pass;
    result.all_pass = result.all_pass && conv_pass;

    // Exponent probe: neighbors must accumulate along a smooth boundary arc,
    // so anchor at a direction whose control switches (corner normals map
    // whole fans to one endpoint and give no admissible pairs).
    {
        Vec base_dir;
        double best_margin = -1.0;
        for (const Vec& d : bangbang::direction_grid(sys.n, 64)) {
            const auto u = bangbang::synthesize_control(sys, d, horizon);
            for (double s : u.channels[0].switch_times) {
                const double margin = std::min(s, horizon - s);
                if (margin > best_margin) {
                    best_margin = margin;
                    base_dir = d;
                }
            }
        }
        if (best_margin <= 0.0) throw std::runtime_error("certify: no switching direction found");
        // Orthonormal companion via Gram-Schmidt against the least-aligned axis.
        Eigen::Index axis = 0;
        base_dir.cwiseAbs().minCoeff(&axis);
        Vec ortho = Vec::Zero(sys.n);
        ortho(axis) = 1.0;
        ortho -= ortho.dot(base_dir) * base_dir;
        ortho.normalize();

        const auto base_control = bangbang::synthesize_control(sys, base_dir, horizon);
        geometry::SupportSample at{bangbang::integrate_linear(sys, base_control), base_dir};
        std::vector<Vec> neighbors;
        for (int k = 0; k < 40; ++k) {
            const double angle = 1e-4 * std::pow(2000.0, k / 39.0);
            const Vec dir = (std::cos(angle) * base_dir + std::sin(angle) * ortho).normalized();
            neighbors.push_back(
                bangbang::integrate_linear(sys, bangbang::synthesize_control(sys, dir, horizon)));
        }
        const auto fit = geometry::fit_exponent(at, neighbors);
        const bool pass = std::abs(fit.slope - p) <= 0.15 * p;
        result.bundle["exponent"] = json{{"slope", fit.slope}, {"used", fit.used},
                                         {"excluded", fit.excluded}, {"target", p}};
        result.bundle["exponent_pass"] = pass;
        result.all_pass = result.all_pass && pass;
    }

    // Inscribed-ball ratio band over a horizon sweep.
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        json sweep = json::array();
        for (double t : {horizon, horizon / 2, horizon / 4}) {
            const double ratio_t =
                geometry::inscribed_ball_radius(sys, t, 720) / std::pow(t, p);
            sweep.push_back(json{{"T", t}, {"radius_ratio", ratio_t}});
            lo = std::min(lo, ratio_t);
            hi = std::max(hi, ratio_t);
        }
        const bool pass = hi <= 2.0 * lo && lo > 0.0;
        result.bundle["inscribed_ball"] = sweep;
        result.bundle["inscribed_ball_pass"] = pass;
        result.all_pass = result.all_pass && pass;
    }

    // Epigraph proximal inequality on reversed-system boundaries (T(x) = tau).
    {
        const auto rev = sysdef::reversed(sys);
        std::vector<geometry::EpigraphSample> pts;
        std::vector<geometry::EpigraphOther> others;
        for (int k = 1; k <= 5; ++k) {
            const double tau = horizon * k / 5.0;
            for (const auto& bp : bangbang::sample_boundary(rev, tau, std::max(16, dirs / 8))) {
                pts.push_back({bp.x, tau, bp.zeta, minimized_hamiltonian_linear(sys, bp.x, bp.zeta)});
                others.push_back({bp.x, tau});
            }
        }
        const auto chk = geometry::epigraph_proximal_check(pts, others);
        const bool pass = std::isfinite(chk.sigma_hat);
        result.bundle["epigraph"] = json{{"sigma_hat", chk.sigma_hat},
                                         {"violations", chk.violations},
                                         {"skipped", chk.skipped}};
        result.bundle["epigraph_pass"] = pass;
        result.all_pass = result.all_pass && pass;
    }
    return result;
}

CertifyResult certify_nonlinear(const sysdef::NonlinearSystem2D& sys, double tau, int dirs) {
    CertifyResult result;
    auto boundary_to_data = [&](const sysdef::NonlinearSystem2D& s, int nd) {
        const auto boundary = nonlinear2d::sample_nonlinear_boundary(s, tau, nd);
        std::pair<std::vector<geometry::SupportSample>, std::vector<Vec>> data;
        for (const auto& bs : boundary.samples) {
            Vec x(2), z(2);
            x << bs.endpoint(0), bs.endpoint(1);
            z << bs.terminal_adjoint(0), bs.terminal_adjoint(1);
            data.first.push_back({x, z});
            data.second.push_back(x);
        }
        return data;
    };

    const auto boundary = nonlinear2d::sample_nonlinear_boundary(sys, tau, dirs);
    result.bundle["closed_simple"] = boundary.closed_simple;
    result.all_pass = result.all_pass && boundary.closed_simple;

    const auto coarse = boundary_to_data(sys, dirs);
    const auto fine = boundary_to_data(sys, 2 * dirs);
    const auto cert = geometry::fit_convexity_constant(coarse.first, coarse.second, 2.0);
    const auto cert2 = geometry::fit_convexity_constant(fine.first, fine.second, 2.0);
    const double ratio = cert2.gamma_hat / cert.gamma_hat;
    const bool conv_pass = cert.gamma_hat > 0.0;
    result.bundle["convexity"] = json::parse(geometry::certificate_to_json(cert, ratio));
    result.bundle["convexity_pass"] = conv_pass;
    result.all_pass = result.all_pass && conv_pass;

    // Hamiltonian constancy with a refinement ratio.
    {
        const Vec2 lambda0(std::cos(0.4), std::sin(0.4));
        const auto t1 = nonlinear2d::integrate_extremal(sys, lambda0, tau, tau / 512);
        const auto t2 = nonlinear2d::integrate_extremal(sys, lambda0, tau, tau / 1024);
        const auto h1 = nonlinear2d::hamiltonian_constancy(t1);
        const auto h2 = nonlinear2d::hamiltonian_constancy(t2);
        const bool pass = h2.max_dev <= 1e-5 && (h2.max_dev < 1e-13 || h1.max_dev / h2.max_dev > 4.0);
        result.bundle["hamiltonian"] = json{{"max_dev", h2.max_dev},
                                            {"coarse_dev", h1.max_dev},
                                            {"C", h2.C}};
        result.bundle["hamiltonian_pass"] = pass;
        result.all_pass = result.all_pass && pass;
    }

    // Minimized Hamiltonian sign on the T-sublevel boundary.
    {
        const auto rev = sysdef::reversed(sys);
        const auto rev_boundary = nonlinear2d::sample_nonlinear_boundary(rev, tau, dirs);
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& s : rev_boundary.samples)
            worst = std::max(worst,
                             nonlinear2d::minimized_hamiltonian(sys, s.endpoint, s.terminal_adjoint));
        const bool pass = worst <= 1e-9;
        result.bundle["minimized_hamiltonian_max"] = worst;
        result.bundle["minimized_hamiltonian_pass"] = pass;
        result.all_pass = result.all_pass && pass;

        // Epigraph proximal inequality with theta = h(x, zeta).
        std::vector<geometry::EpigraphSample> pts;
        std::vector<geometry::EpigraphOther> others;
        auto add_level = [&](double level, int nd, std::vector<geometry::EpigraphSample>* dst,
                             std::vector<geometry::EpigraphOther>* odst) {
            const auto b = nonlinear2d::sample_nonlinear_boundary(rev, level, nd);
            for (const auto& s : b.samples) {
                Vec x(2), z(2);
                x << s.endpoint(0), s.endpoint(1);
                z << s.terminal_adjoint(0), s.terminal_adjoint(1);
                if (dst)
                    dst->push_back({x, level, z,
                                    nonlinear2d::minimized_hamiltonian(sys, s.endpoint,
                                                                       s.terminal_adjoint)});
                if (odst) odst->push_back({x, level});
            }
        };
        for (int k = 1; k <= 4; ++k) add_level(tau * k / 4.0, dirs / 4, &pts, &others);
        const auto chk = geometry::epigraph_proximal_check(pts, others);
        std::vector<geometry::EpigraphSample> pts2;
        std::vector<geometry::EpigraphOther> others2;
        for (int k = 1; k <= 4; ++k) add_level(tau * k / 4.0, dirs / 2, &pts2, &others2);
        const auto chk2 = geometry::epigraph_proximal_check(pts2, others2);
        const double sratio = chk.sigma_hat > 0 ? chk2.sigma_hat / chk.sigma_hat : 1.0;
        const bool epass = std::isfinite(chk.sigma_hat) && std::abs(sratio - 1.0) <= 0.15;
        result.bundle["epigraph"] = json{{"sigma_hat", chk.sigma_hat},
                                         {"sigma_hat_refined", chk2.sigma_hat},
                                         {"violations", chk.violations}};
        result.bundle["epigraph_pass"] = epass;
        result.all_pass = result.all_pass && epass;
    }
    return result;
}

int cmd_examples();

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum-time reachable-set toolkit"};
    app.require_subcommand(1);

    std::string system_path, out_path = "out.csv", points_path;
    double tol = 1e-6, tau = 1.0, grid_half = 0.9, gap_bound = 0.02;
    int dirs = 360, resolution = 0, npoints = 100;
    std::uint64_t seed = 0;
    bool as_json = false, exploratory = false;

    auto add_common = [&](CLI::App* cmd, bool needs_system) {
        if (needs_system)
            cmd->add_option("--system", system_path, "system definition JSON")->required();
        cmd->add_option("--out", out_path, "output path");
        cmd->add_option("--seed", seed, "seed recorded in output headers");
        cmd->add_option("--tol", tol, "tolerance (seconds)");
        cmd->add_option("--dirs", dirs, "number of covector directions");
        cmd->add_option("--resolution", resolution, "grid cells per axis");
        cmd->add_option("--tau", tau, "horizon (seconds)");
        cmd->add_flag("--json", as_json, "JSON output where applicable");
    };

    auto* check = app.add_subcommand("check", "normality and hypothesis gate");
    add_common(check, true);

    auto* boundary = app.add_subcommand("boundary", "sample the reachable-set boundary");
    add_common(boundary, true);
    boundary->add_flag("--exploratory", exploratory, "allow non-certified nonlinear runs");

    auto* mintimec = app.add_subcommand("mintime", "minimum-time queries");
    add_common(mintimec, true);
    mintimec->add_option("--points", points_path, "CSV of query points");
    mintimec->add_option("--npoints", npoints, "number of random query points");
    mintimec->add_option("--box", grid_half, "half-width for random points and the grid");
    mintimec->add_option("--gap-bound", gap_bound, "max allowed oracle gap");

    auto* certify = app.add_subcommand("certify", "convexity / reach certificates");
    add_common(certify, true);

    auto* oracle = app.add_subcommand("oracle", "bisection vs grid cross-validation");
    add_common(oracle, true);
    oracle->add_option("--npoints", npoints, "number of random query points");
    oracle->add_option("--box", grid_half, "half-width for random points and the grid");
    oracle->add_option("--gap-bound", gap_bound, "max allowed oracle gap");

    auto* examples = app.add_subcommand("examples", "reproduce the bundled closed-form fixtures");
    (void)examples;

    CLI11_PARSE(app, argc, argv);

    std::string config;
    for (int i = 1; i < argc; ++i) {
        config += argv[i];
        config += ' ';
    }

    try {
        if (app.got_subcommand("examples")) return cmd_examples();

        const sysdef::SystemVariant sys = load_system(system_path);

        if (app.got_subcommand("check")) {
            const CheckReport rep = run_check(sys);
            if (as_json)
                std::printf("%s\n", rep.detail.dump(2).c_str());
            else
                print_check(rep);
            return rep.eligible ? kExitOk : kExitParse;
        }
        if (app.got_subcommand("boundary")) {
            if (std::holds_alternative<sysdef::LinearSystem>(sys) &&
                !linear_eligible(std::get<sysdef::LinearSystem>(sys)) && !exploratory) {
                std::fprintf(stderr, "system is not normal; boundary synthesis refused\n");
                return kExitParse;
            }
            return cmd_boundary(sys, tau, dirs, out_path, exploratory, seed, config);
        }
        if (app.got_subcommand("mintime") || app.got_subcommand("oracle")) {
            if (!std::holds_alternative<sysdef::LinearSystem>(sys)) {
                std::fprintf(stderr, "mintime/oracle require a linear system\n");
                return kExitParse;
            }
            const auto& lin = std::get<sysdef::LinearSystem>(sys);
            if (!linear_eligible(lin)) {
                std::fprintf(stderr, "system is not normal\n");
                return kExitParse;
            }
            std::vector<Vec> points;
            if (!points_path.empty()) points = load_points(points_path);
            else points = random_points(npoints, lin.n, grid_half * 0.55, seed);
            if (app.got_subcommand("oracle") && resolution == 0) resolution = 512;
            return cmd_mintime(sys, points, tol, resolution, grid_half, gap_bound, out_path, seed,
                               config);
        }
        if (app.got_subcommand("certify")) {
            if (!eligible(sys)) {
                std::fprintf(stderr, "system is not certified-mode eligible\n");
                return kExitParse;
            }
            CertifyResult res;
            if (std::holds_alternative<sysdef::LinearSystem>(sys))
                res = certify_linear(std::get<sysdef::LinearSystem>(sys), tau, dirs);
            else
                res = certify_nonlinear(std::get<sysdef::NonlinearSystem2D>(sys), tau, dirs);
            res.bundle["all_pass"] = res.all_pass;
            std::string doc = io::output_header(config, seed);
            doc += res.bundle.dump(2);
            doc += "\n";
            io::write_text_file(out_path, doc);
            std::printf("%s\n", res.bundle.dump(2).c_str());
            return res.all_pass ? kExitOk : kExitCertificate;
        }
    } catch (const sysdef::ParseError& e) {
        std::fprintf(stderr, "parse error at %s\n", e.what());
        return kExitParse;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}

namespace {

int cmd_examples() {
    int failures = 0;
    auto report = [&](const char* name, bool pass) {
        std::printf("[%s] %s\n", pass ? "PASS" : "FAIL", name);
        if (!pass) ++failures;
    };

    // Chain-of-integrators endpoint identity: one switch at s drops the first
    // coordinate by 2 (T-s)^N / N!.
    for (int n : {2, 3}) {
        const auto sys = fixtures::integrator_chain(n);
        bangbang::BangBangControl plus;
        plus.T = 1.0;
        plus.channels.resize(1);
        plus.channels[0].initial_sign = 1;
        const Vec x_plus = bangbang::integrate_linear(sys, plus);
        double fact = 1.0;
        for (int k = 2; k <= n; ++k) fact *= k;
        bool pass = std::abs(x_plus(0) - 1.0 / fact) <= 1e-6 / fact;
        for (double s = 0.5; s < 0.995; s += 0.07) {
            auto u = plus;
            u.channels[0].switch_times = {s};
            const Vec xs = bangbang::integrate_linear(sys, u);
            const double expected = -2.0 * std::pow(1.0 - s, n) / fact;
            if (std::abs((xs(0) - x_plus(0)) - expected) > 1e-6 * std::abs(expected) + 1e-12)
                pass = false;
        }
        report(n == 2 ? "endpoint identity, double integrator" : "endpoint identity, triple integrator",
               pass);

        geometry::SupportSample at{x_plus, Vec::Zero(n)};
        at.zeta(0) = 1.0;
        std::vector<Vec> neighbors;
        for (int k = 0; k < 40; ++k) {
            const double gap = 1e-3 * std::pow(500.0, k / 39.0);
            auto u = plus;
            u.channels[0].switch_times = {1.0 - gap};
            neighbors.push_back(bangbang::integrate_linear(sys, u));
        }
        const auto fit = geometry::fit_exponent(at, neighbors);
        report(n == 2 ? "exponent fit ~ 2" : "exponent fit ~ 3", std::abs(fit.slope - n) <= 0.15);
    }

    // Corner example: curve, supporting inner product, and reach ratio.
    {
        std::vector<double> s_grid;
        for (int i = 1; i <= 20; ++i) s_grid.push_back(i / 21.0);
        bool pass = true;
        for (double tau : {0.5, 1.0}) {
            const auto table = nonlinear2d::reproduce_counterexample(tau, s_grid);
            if (table.max_endpoint_err > 1e-8) pass = false;
            if (table.max_inner_err > 1e-8) pass = false;
            if (table.max_reach_ratio > table.reach_bound + 1e-6) pass = false;
        }
        report("corner example: curve, inner product, reach ratio", pass);
    }

    // Squared-drift system: the eligibility gate must refuse certified mode.
    {
        const auto sys = fixtures::squared_drift_example();
        const bool refused = !nonlinear_eligible(sys);
        report("squared-drift system refused at the eligibility gate", refused);
        const auto boundary = nonlinear2d::sample_nonlinear_boundary(sys, 0.5, 32);
        report("squared-drift exploratory boundary computable",
               boundary.samples.size() == 32 && !boundary.certified_mode);
    }

    return failures == 0 ? kExitOk : 1;
}

}  // namespace
