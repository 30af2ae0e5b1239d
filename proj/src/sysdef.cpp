#include "reachcert/sysdef.hpp"

#include <cmath>
#include <json.hpp>

#include "reachcert/linalg.hpp"

namespace reachcert::sysdef {

using nlohmann::json;

PolyVectorField::PolyVectorField(std::vector<std::vector<Monomial>> comps) : comps_(std::move(comps)) {
    if (comps_.size() != 2) throw ParseError("field", "expected exactly 2 components");
    for (size_t ci = 0; ci < comps_.size(); ++ci) {
        for (size_t ti = 0; ti < comps_[ci].size(); ++ti) {
            const Monomial& t = comps_[ci][ti];
            const std::string path = "component[" + std::to_string(ci) + "].term[" + std::to_string(ti) + "]";
            if (t.e1 < 0 || t.e2 < 0) throw ParseError(path, "negative exponent");
            if (t.e1 + t.e2 > kMaxDegree) throw ParseError(path, "total degree exceeds 6");
            if (!std::isfinite(t.c)) throw ParseError(path, "non-finite coefficient");
        }
    }
}

namespace {

double eval_component(const std::vector<Monomial>& comp, const Vec2& x) {
    double acc = 0.0;
    for (const Monomial& t : comp)
        acc += t.c * std::pow(x(0), t.e1) * std::pow(x(1), t.e2);
    return acc;
}

}  // namespace

Vec2 PolyVectorField::eval(const Vec2& x) const {
    return Vec2(eval_component(comps_[0], x), eval_component(comps_[1], x));
}

std::vector<Monomial> PolyVectorField::differentiate(const std::vector<Monomial>& comp, int var) {
    std::vector<Monomial> out;
    for (const Monomial& t : comp) {
        const int e = (var == 0) ? t.e1 : t.e2;
        if (e == 0) continue;
        Monomial d = t;
        d.c *= e;
        if (var == 0) --d.e1; else --d.e2;
        out.push_back(d);
    }
    return out;
}

Mat2 PolyVectorField::jacobian(const Vec2& x) const {
    Mat2 j;
    for (int row = 0; row < 2; ++row)
        for (int var = 0; var < 2; ++var)
            j(row, var) = eval_component(differentiate(comps_[static_cast<size_t>(row)], var), x);
    return j;
}

Vec2 PolyVectorField::constant_term() const { return eval(Vec2::Zero()); }

Mat2 PolyVectorField::linear_term() const { return jacobian(Vec2::Zero()); }

bool PolyVectorField::linear_term_is_zero() const {
    // Exact on coefficients: sum the degree-1 terms per slot.
    Mat2 l = Mat2::Zero();
    for (int row = 0; row < 2; ++row)
        for (const Monomial& t : comps_[static_cast<size_t>(row)]) {
            if (t.e1 == 1 && t.e2 == 0) l(row, 0) += t.c;
            if (t.e1 == 0 && t.e2 == 1) l(row, 1) += t.c;
        }
    return l.isZero(0.0);
}

void validate(const LinearSystem& sys, const std::string& path) {
    if (sys.n < 2 || sys.n > 5) throw ParseError(path + ".A", "state dimension must be in [2, 5]");
    if (sys.m < 1 || sys.m > sys.n) throw ParseError(path + ".B", "control dimension must be in [1, n]");
    if (sys.A.rows() != sys.n || sys.A.cols() != sys.n) throw ParseError(path + ".A", "expected n x n matrix");
    if (sys.B.rows() != sys.n || sys.B.cols() != sys.m) throw ParseError(path + ".B", "expected n x m matrix");
    if (!sys.A.allFinite()) throw ParseError(path + ".A", "non-finite entry");
    if (!sys.B.allFinite()) throw ParseError(path + ".B", "non-finite entry");
}

namespace {

std::vector<Monomial> parse_component(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array of monomials");
    std::vector<Monomial> out;
    for (size_t i = 0; i < j.size(); ++i) {
        const std::string tpath = path + "[" + std::to_string(i) + "]";
        const json& term = j[i];
        if (!term.is_object() || !term.contains("e") || !term.contains("c"))
            throw ParseError(tpath, "expected {\"e\": [e1, e2], \"c\": coeff}");
        const json& e = term["e"];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw ParseError(tpath + ".e", "expected a pair of nonnegative integers");
        if (!term["c"].is_number()) throw ParseError(tpath + ".c", "expected a number");
        out.push_back(Monomial{e[0].get<int>(), e[1].get<int>(), term["c"].get<double>()});
    }
    return out;
}

Mat parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ParseError(path, "expected a non-empty array of rows");
    const size_t rows = j.size();
    size_t cols = 0;
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].empty())
            throw ParseError(path + "[" + std::to_string(r) + "]", "expected a non-empty row");
        if (r == 0) cols = j[r].size();
        if (j[r].size() != cols)
            throw ParseError(path + "[" + std::to_string(r) + "]", "ragged rows");
    }
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) {
            const json& v = j[r][c];
            if (!v.is_number())
                throw ParseError(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                                 "expected a number");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v.get<double>();
        }
    return m;
}

json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json component_to_json(const std::vector<Monomial>& comp) {
    json arr = json::array();
    for (const Monomial& t : comp)
        arr.push_back(json{{"e", {t.e1, t.e2}}, {"c", t.c}});
    return arr;
}

}  // namespace

SystemVariant parse_system(const std::string& document) {
    json j;
    try {
        j = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ParseError("document", e.what());
    }
    if (!j.is_object() || !j.contains("kind")) throw ParseError("kind", "missing");
    const std::string kind = j["kind"].is_string() ? j["kind"].get<std::string>() : "";
    if (kind == "linear") {
        if (!j.contains("A")) throw ParseError("A", "missing");
        if (!j.contains("B")) throw ParseError("B", "missing");
        LinearSystem sys;
        sys.A = parse_matrix(j["A"], "A");
        sys.B = parse_matrix(j["B"], "B");
        if (sys.A.rows() != sys.A.cols()) throw ParseError("A", "must be square");
        if (sys.B.rows() != sys.A.rows()) throw ParseError("B", "row count must match A");
        sys.n = static_cast<int>(sys.A.rows());
        sys.m = static_cast<int>(sys.B.cols());
        validate(sys);
        return sys;
    }
    if (kind == "nonlinear2d") {
        if (!j.contains("F")) throw ParseError("F", "missing");
        if (!j.contains("G")) throw ParseError("G", "missing");
        const json& jf = j["F"];
        if (!jf.is_array() || jf.size() != 2) throw ParseError("F", "expected 2 components");
        std::vector<std::vector<Monomial>> fcomps;
        for (size_t i = 0; i < 2; ++i) fcomps.push_back(parse_component(jf[i], "F[" + std::to_string(i) + "]"));
        NonlinearSystem2D sys;
        sys.F = PolyVectorField(std::move(fcomps));
        const json& jg = j["G"];
        if (!jg.is_array() || jg.empty() || jg.size() > 2)
            throw ParseError("G", "expected 1 or 2 columns");
        for (size_t col = 0; col < jg.size(); ++col) {
            const std::string cpath = "G[" + std::to_string(col) + "]";
            if (!jg[col].is_array() || jg[col].size() != 2) throw ParseError(cpath, "expected 2 components");
            std::vector<std::vector<Monomial>> gcomps;
            for (size_t i = 0; i < 2; ++i)
                gcomps.push_back(parse_component(jg[col][i], cpath + "[" + std::to_string(i) + "]"));
            sys.G.emplace_back(std::move(gcomps));
        }
        sys.flags = compute_hypothesis_flags(sys.F, sys.G);
        return sys;
    }
    throw ParseError("kind", "expected \"linear\" or \"nonlinear2d\"");
}

std::string serialize_system(const SystemVariant& sys) {
    json j;
    if (std::holds_alternative<LinearSystem>(sys)) {
        const LinearSystem& lin = std::get<LinearSystem>(sys);
        j["kind"] = "linear";
        j["A"] = matrix_to_json(lin.A);
        j["B"] = matrix_to_json(lin.B);
    } else {
        const NonlinearSystem2D& nl = std::get<NonlinearSystem2D>(sys);
        j["kind"] = "nonlinear2d";
        json f = json::array();
        for (const auto& comp : nl.F.components()) f.push_back(component_to_json(comp));
        j["F"] = f;
        json g = json::array();
        for (const PolyVectorField& col : nl.G) {
            json c = json::array();
            for (const auto& comp : col.components()) c.push_back(component_to_json(comp));
            g.push_back(c);
        }
        j["G"] = g;
    }
    return j.dump(2);
}

HypothesisFlags compute_hypothesis_flags(const PolyVectorField& f,
                                         const std::vector<PolyVectorField>& g) {
    HypothesisFlags flags;
    flags.origin_equilibrium = f.constant_term().isZero(0.0);
    const Mat2 df0 = f.linear_term();
    flags.linearization_rank = true;
    for (const PolyVectorField& col : g) {
        Mat k(2, 2);
        const Vec2 g0 = col.constant_term();
        k.col(0) = g0;
        k.col(1) = df0 * g0;
        if (linalg::rank_with_threshold(k) != 2) flags.linearization_rank = false;
    }
    flags.vanishing_control_jacobian = true;
    for (const PolyVectorField& col : g)
        if (!col.linear_term_is_zero()) flags.vanishing_control_jacobian = false;
    return flags;
}

std::vector<ChannelNormality> normality_check(const LinearSystem& sys) {
    std::vector<ChannelNormality> out;
    out.reserve(static_cast<size_t>(sys.m));
    for (int i = 0; i < sys.m; ++i) {
        const Mat k = linalg::controllability_matrix(sys.A, sys.B.col(i));
        out.push_back(ChannelNormality{linalg::rank_with_threshold(k), linalg::min_singular_value(k)});
    }
    return out;
}

bool is_normal(const LinearSystem& sys) {
    for (const ChannelNormality& c : normality_check(sys))
        if (c.rank != sys.n) return false;
    return true;
}

LinearSystem linearize_at_origin(const NonlinearSystem2D& sys) {
    LinearSystem lin;
    lin.n = 2;
    lin.m = sys.m();
    lin.A = sys.F.linear_term();
    lin.B = Mat(2, lin.m);
    for (int i = 0; i < lin.m; ++i) lin.B.col(i) = sys.G[static_cast<size_t>(i)].constant_term();
    return lin;
}

double derivative_lipschitz_bound(const NonlinearSystem2D& sys, const Vec2& box_lo,
                                  const Vec2& box_hi, int samples_per_axis) {
    // Second derivatives of every component, evaluated on a grid; the max
    // Frobenius norm bounds the Lipschitz constant of the Jacobians on the box.
    std::vector<const PolyVectorField*> fields;
    fields.push_back(&sys.F);
    for (const PolyVectorField& col : sys.G) fields.push_back(&col);

    double best = 0.0;
    for (const PolyVectorField* field : fields) {
        std::vector<std::vector<Monomial>> second;
        for (const auto& comp : field->components())
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2)
                    second.push_back(PolyVectorField::differentiate(
                        PolyVectorField::differentiate(comp, v1), v2));
        for (int ix = 0; ix <= samples_per_axis; ++ix)
            for (int iy = 0; iy <= samples_per_axis; ++iy) {
                const Vec2 x(box_lo(0) + (box_hi(0) - box_lo(0)) * ix / samples_per_axis,
                             box_lo(1) + (box_hi(1) - box_lo(1)) * iy / samples_per_axis);
                double sq = 0.0;
                for (const auto& comp : second) {
                    double val = 0.0;
                    for (const Monomial& t : comp)
                        val += t.c * std::pow(x(0), t.e1) * std::pow(x(1), t.e2);
                    sq += val * val;
                }
                best = std::max(best, std::sqrt(sq));
            }
    }
    return best;
}

LinearSystem reversed(const LinearSystem& sys) {
    LinearSystem r = sys;
    r.A = -sys.A;
    r.B = -sys.B;
    return r;
}

NonlinearSystem2D reversed(const NonlinearSystem2D& sys) {
    auto negate = [](const PolyVectorField& f) {
        std::vector<std::vector<Monomial>> comps = f.components();
        for (auto& comp : comps)
            for (Monomial& t : comp) t.c = -t.c;
        return PolyVectorField(std::move(comps));
    };
    NonlinearSystem2D r;
    r.F = negate(sys.F);
    for (const PolyVectorField& col : sys.G) r.G.push_back(negate(col));
    r.flags = compute_hypothesis_flags(r.F, r.G);
    return r;
}

}  // namespace reachcert::sysdef
