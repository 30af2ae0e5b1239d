#include "reachcert/geometry.hpp"

#include <cmath>
#include <json.hpp>
#include <stdexcept>

#include "reachcert/bangbang.hpp"

namespace reachcert::geometry {

namespace {

constexpr double kCoincidenceRadius = 1e-9;

}  // namespace

ConvexityCertificate fit_convexity_constant(const std::vector<SupportSample>& samples,
                                            const std::vector<Vec>& others, double exponent,
                                            ExecPolicy policy) {
    if (samples.size() < 1 || samples.size() + others.size() < 2)
        throw std::invalid_argument("fit_convexity_constant: need at least 2 points");
    for (const SupportSample& s : samples)
        if (s.zeta.norm() == 0.0)
            throw std::invalid_argument("fit_convexity_constant: zero covector");

    const int ns = static_cast<int>(samples.size());
    struct Slot {
        double gamma = std::numeric_limits<double>::infinity();
        int other = -1;
        std::int64_t pairs = 0;
        std::int64_t excluded = 0;
    };
    std::vector<Slot> slots(static_cast<size_t>(ns));

    auto work = [&](int i) {
        const SupportSample& s = samples[static_cast<size_t>(i)];
        const double zn = s.zeta.norm();
        Slot& slot = slots[static_cast<size_t>(i)];
        for (int j = 0; j < static_cast<int>(others.size()); ++j) {
            const Vec d = others[static_cast<size_t>(j)] - s.x;
            const double dist = d.norm();
            if (dist < kCoincidenceRadius) {
                ++slot.excluded;
                continue;
            }
            ++slot.pairs;
            const double ratio = -s.zeta.dot(d) / (zn * std::pow(dist, exponent));
            if (ratio < slot.gamma) {
                slot.gamma = ratio;
                slot.other = j;
            }
        }
    };

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < ns; ++i) work(i);
    } else {
        for (int i = 0; i < ns; ++i) work(i);
    }

    ConvexityCertificate cert;
    cert.exponent = exponent;
    cert.gamma_hat = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ns; ++i) {
        const Slot& slot = slots[static_cast<size_t>(i)];
        cert.n_pairs += slot.pairs;
        cert.excluded += slot.excluded;
        if (slot.other >= 0 && slot.gamma < cert.gamma_hat) {
            cert.gamma_hat = slot.gamma;
            cert.worst_pair = {i, slot.other};
        }
    }
    if (cert.n_pairs == 0)
        throw std::invalid_argument("fit_convexity_constant: all pairs degenerate");
    return cert;
}

ExponentFit fit_exponent(const SupportSample& at, const std::vector<Vec>& neighbors) {
    ExponentFit fit;
    const double zn = at.zeta.norm();
    std::vector<double> lx, ly;
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (const Vec& y : neighbors) {
        const Vec d = y - at.x;
        const double dist = d.norm();
        const double drop = -at.zeta.dot(d) / zn;
        if (dist < kCoincidenceRadius || drop <= 1e-12) {
            ++fit.excluded;
            continue;
        }
        lx.push_back(std::log(dist));
        ly.push_back(std::log(drop));
        dmin = std::min(dmin, dist);
        dmax = std::max(dmax, dist);
    }
    fit.used = static_cast<int>(lx.size());
    if (fit.used < 10) throw std::invalid_argument("fit_exponent: fewer than 10 admissible pairs");
    if (dmax < 100.0 * dmin)
        throw std::invalid_argument("fit_exponent: pair distances span less than two decades");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double n = static_cast<double>(lx.size());
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

double inscribed_ball_radius(const sysdef::LinearSystem& sys, double T, int n_dirs) {
    // Valid for any linear system with the symmetric box control set: the
    // minimum support value is an inradius about 0 of the symmetric convex set.
    const std::vector<Vec> dirs = bangbang::direction_grid(sys.n, n_dirs);
    double radius = std::numeric_limits<double>::infinity();
    for (const Vec& d : dirs) radius = std::min(radius, bangbang::support_function(sys, d, T));
    return radius;
}

ReachCertificate positive_reach_estimate(const std::vector<SupportSample>& samples,
                                         const std::vector<Vec>& others, ExecPolicy policy) {
    if (samples.empty() || samples.size() + others.size() < 2)
        throw std::invalid_argument("positive_reach_estimate: need at least 2 points");
    for (const SupportSample& s : samples)
        if (s.zeta.norm() == 0.0) throw std::invalid_argument("positive_reach_estimate: zero normal");

    const int ns = static_cast<int>(samples.size());
    struct Slot {
        double phi = 0.0;
        int other = -1;
        std::int64_t pairs = 0;
    };
    std::vector<Slot> slots(static_cast<size_t>(ns));

    auto work = [&](int i) {
        const SupportSample& s = samples[static_cast<size_t>(i)];
        const double vn = s.zeta.norm();
        Slot& slot = slots[static_cast<size_t>(i)];
        for (int j = 0; j < static_cast<int>(others.size()); ++j) {
            const Vec d = others[static_cast<size_t>(j)] - s.x;
            const double dist = d.norm();
            if (dist < kCoincidenceRadius) continue;
            ++slot.pairs;
            const double ratio = s.zeta.dot(d) / (vn * dist * dist);
            if (ratio > slot.phi) {
                slot.phi = ratio;
                slot.other = j;
            }
        }
    };

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < ns; ++i) work(i);
    } else {
        for (int i = 0; i < ns; ++i) work(i);
    }

    ReachCertificate cert;
    for (int i = 0; i < ns; ++i) {
        const Slot& slot = slots[static_cast<size_t>(i)];
        cert.n_pairs += slot.pairs;
        if (slot.other >= 0 && slot.phi > cert.phi_hat) {
            cert.phi_hat = slot.phi;
            cert.worst_pair = {i, slot.other};
        }
    }
    return cert;
}

EpigraphCheck epigraph_proximal_check(const std::vector<EpigraphSample>& points,
                                      const std::vector<EpigraphOther>& others, double sigma_cap,
                                      ExecPolicy policy) {
    const int np = static_cast<int>(points.size());
    struct Slot {
        double sigma = 0.0;
        int other = -1;
        std::int64_t skipped = 0;
        std::int64_t violations = 0;
    };
    std::vector<Slot> slots(static_cast<size_t>(np));

    auto work = [&](int i) {
        const EpigraphSample& p = points[static_cast<size_t>(i)];
        Vec normal(p.zeta.size() + 1);
        normal.head(p.zeta.size()) = p.zeta;
        normal(p.zeta.size()) = p.theta;
        const double nn = normal.norm();
        Slot& slot = slots[static_cast<size_t>(i)];
        for (int j = 0; j < static_cast<int>(others.size()); ++j) {
            const EpigraphOther& o = others[static_cast<size_t>(j)];
            const Vec d = o.y - p.x;
            const double denom = d.squaredNorm() + std::abs(o.beta - p.t);
            if (denom < 1e-12) {
                ++slot.skipped;
                continue;
            }
            const double num = p.zeta.dot(d) + p.theta * (o.beta - p.t);
            const double ratio = num / (nn * denom);
            if (ratio > sigma_cap) ++slot.violations;
            if (ratio > slot.sigma) {
                slot.sigma = ratio;
                slot.other = j;
            }
        }
    };

    if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < np; ++i) work(i);
    } else {
        for (int i = 0; i < np; ++i) work(i);
    }

    EpigraphCheck out;
    for (int i = 0; i < np; ++i) {
        const Slot& slot = slots[static_cast<size_t>(i)];
        out.skipped += slot.skipped;
        out.violations += slot.violations;
        if (slot.other >= 0 && slot.sigma > out.sigma_hat) {
            out.sigma_hat = slot.sigma;
            out.worst_pair = {i, slot.other};
        }
    }
    return out;
}

std::string certificate_to_json(const ConvexityCertificate& cert, double refinement_ratio) {
    nlohmann::json j{{"exponent", cert.exponent},
                     {"gamma_hat", cert.gamma_hat},
                     {"n_pairs", cert.n_pairs},
                     {"worst_pair", {cert.worst_pair.first, cert.worst_pair.second}},
                     {"refinement_ratio", refinement_ratio}};
    return j.dump();
}

}  // namespace reachcert::geometry
