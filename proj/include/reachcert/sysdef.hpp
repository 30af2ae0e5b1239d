#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "reachcert/types.hpp"

namespace reachcert::sysdef {

// Parse/validation failure carrying the offending field path.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct Monomial {
    int e1 = 0;
    int e2 = 0;
    double c = 0.0;
};

// Bivariate polynomial map R^2 -> R^2 with exact evaluation and exact
// symbolic differentiation. Total degree per term is capped at 6.
class PolyVectorField {
public:
    static constexpr int kMaxDegree = 6;

    PolyVectorField() : comps_(2) {}
    explicit PolyVectorField(std::vector<std::vector<Monomial>> comps);

    const std::vector<std::vector<Monomial>>& components() const { return comps_; }

    Vec2 eval(const Vec2& x) const;
    Mat2 jacobian(const Vec2& x) const;

    Vec2 constant_term() const;       // value at 0
    Mat2 linear_term() const;         // jacobian at 0
    bool linear_term_is_zero() const; // exact check on coefficients

    // d/dx_var of one component, as a new coefficient list.
    static std::vector<Monomial> differentiate(const std::vector<Monomial>& comp, int var);

private:
    std::vector<std::vector<Monomial>> comps_;  // size 2
};

struct LinearSystem {
    int n = 0;
    int m = 0;
    Mat A;
    Mat B;
};

// Validates dimension bounds and finiteness; throws ParseError on failure.
void validate(const LinearSystem& sys, const std::string& path = "system");

// Theorem 5.1 standing hypotheses, recomputed from the polynomial data.
struct HypothesisFlags {
    bool origin_equilibrium = false;        // (i)  F(0) = 0
    bool linearization_rank = false;        // (ii) rank [G_i(0), DF(0) G_i(0)] = 2 for every column
    bool vanishing_control_jacobian = false;// (iii) DG(0) = 0
    bool all() const { return origin_equilibrium && linearization_rank && vanishing_control_jacobian; }
};

struct NonlinearSystem2D {
    PolyVectorField F;
    std::vector<PolyVectorField> G;  // M in {1, 2} columns, each a 2-component field
    HypothesisFlags flags;

    int m() const { return static_cast<int>(G.size()); }
    Vec2 drift(const Vec2& x) const { return F.eval(x); }
    Vec2 control_column(int i, const Vec2& x) const { return G[static_cast<size_t>(i)].eval(x); }
};

using SystemVariant = std::variant<LinearSystem, NonlinearSystem2D>;

// JSON schema: {"kind": "linear", "A": [[..]], "B": [[..]]} or
// {"kind": "nonlinear2d", "F": [comp, comp], "G": [[comp, comp], ...]}
// where comp = [{"e": [e1, e2], "c": coeff}, ...].
SystemVariant parse_system(const std::string& document);
std::string serialize_system(const SystemVariant& sys);

HypothesisFlags compute_hypothesis_flags(const PolyVectorField& f,
                                         const std::vector<PolyVectorField>& g);

struct ChannelNormality {
    int rank = 0;
    double L_const = 0.0;  // smallest singular value of [b_i, A b_i, ..., A^{n-1} b_i]
};

std::vector<ChannelNormality> normality_check(const LinearSystem& sys);
bool is_normal(const LinearSystem& sys);

LinearSystem linearize_at_origin(const NonlinearSystem2D& sys);

// Lipschitz constant of the first derivatives of F and G, estimated by
// sampling the second-derivative norms on a bounding box (default [-2,2]^2).
double derivative_lipschitz_bound(const NonlinearSystem2D& sys,
                                  const Vec2& box_lo = Vec2(-2.0, -2.0),
                                  const Vec2& box_hi = Vec2(2.0, 2.0),
                                  int samples_per_axis = 64);

// (-F, -G): role-reversed copy used by the minimum-time machinery.
LinearSystem reversed(const LinearSystem& sys);
NonlinearSystem2D reversed(const NonlinearSystem2D& sys);

}  // namespace reachcert::sysdef
