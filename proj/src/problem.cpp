#include "singbvp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

namespace singbvp {

using nlohmann::json;

double eval(const TermSum& ts, double x) {
    double sum = 0.0;
    double csum_inv = 0.0;  // coefficients of x^{-1} terms
    double cabs_inv = 0.0;
    double grouped = 0.0;   // sum c (e^{-mu x} - 1) / x, finite at 0
    for (const auto& t : ts.terms) {
        if (t.p == -1) {
            csum_inv += t.c;
            cabs_inv += std::abs(t.c);
            grouped += x == 0.0 ? -t.c * t.mu : t.c * std::expm1(-t.mu * x) / x;
        } else if (t.p == 0) {
            sum += t.c * std::exp(-t.mu * x);
        } else {
            sum += x == 0.0 ? 0.0 : t.c * std::pow(x, t.p) * std::exp(-t.mu * x);
        }
    }
    sum += grouped;
    if (std::abs(csum_inv) > 1e-12 * cabs_inv) sum += x == 0.0 ? (csum_inv > 0 ? INFINITY : -INFINITY) : csum_inv / x;
    return sum;
}

TermSum derivative(const TermSum& ts) {
    TermSum out;
    for (const auto& t : ts.terms) {
        if (t.p == -1)
            throw Error(ErrorKind::UnsupportedDerivative,
                        "derivative of a term with p = -1 leaves the coefficient grammar");
        if (t.p != 0) out.terms.push_back({t.c * t.p, t.p - 1, t.mu});
        if (t.mu != 0.0) out.terms.push_back({-t.c * t.mu, t.p, t.mu});
    }
    return combine(out);
}

TermSum combine(const TermSum& ts) {
    std::map<std::pair<int, double>, std::pair<double, double>> groups;  // sum, sum |c|
    for (const auto& t : ts.terms) {
        auto& g = groups[{t.p, t.mu}];
        g.first += t.c;
        g.second += std::abs(t.c);
    }
    TermSum out;
    for (const auto& [key, g] : groups) {
        if (std::abs(g.first) <= 1e-14 * g.second || g.first == 0.0) continue;
        out.terms.push_back({g.first, key.first, key.second});
    }
    return out;
}

TermSum operator+(const TermSum& a, const TermSum& b) {
    TermSum out = a;
    out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
    return combine(out);
}

TermSum operator*(const TermSum& a, const TermSum& b) {
    TermSum out;
    for (const auto& s : a.terms)
        for (const auto& t : b.terms) {
            if (s.p + t.p < -1)
                throw Error(ErrorKind::Internal, "product leaves the coefficient grammar");
            out.terms.push_back({s.c * t.c, s.p + t.p, s.mu + t.mu});
        }
    return combine(out);
}

TermSum operator*(double s, const TermSum& a) {
    TermSum out = a;
    for (auto& t : out.terms) t.c *= s;
    return combine(out);
}

double limit_at_infinity(const TermSum& ts) {
    double v = 0.0;
    for (const auto& t : ts.terms)
        if (t.mu == 0.0 && t.p == 0) v += t.c;
    return v;
}

bool vanishes_at_infinity(const TermSum& ts) {
    for (const auto& t : combine(ts).terms)
        if (t.mu == 0.0 && t.p >= 0) return false;
    return true;
}

double envelope(const TermSum& ts, double x) {
    double v = 0.0;
    for (const auto& t : ts.terms) v += std::abs(t.c) * std::pow(x, t.p) * std::exp(-t.mu * x);
    return v;
}

void validate_term_sum(const TermSum& ts, const std::string& where) {
    double csum = 0.0, cabs = 0.0;
    for (const auto& t : ts.terms) {
        if (t.p < -1 || !std::isfinite(t.c) || !(t.mu >= 0.0) || !std::isfinite(t.mu)) {
            throw Error(ErrorKind::Invariant, where + ": term outside the grammar (need p >= -1, "
                                                      "mu >= 0, finite c)");
        }
        if (t.mu == 0.0 && t.p > 0) {
            std::ostringstream os;
            os << where << ": term x^" << t.p << " without decay is unbounded on [0, inf)";
            throw Error(ErrorKind::Invariant, os.str());
        }
        if (t.p == -1) {
            csum += t.c;
            cabs += std::abs(t.c);
        }
    }
    if (std::abs(csum) > 1e-12 * std::max(1.0, cabs)) {
        std::ostringstream os;
        os << where << ": coefficients of the x^-1 terms sum to " << csum
           << " (entry is discontinuous at 0)";
        throw Error(ErrorKind::Invariant, os.str());
    }
}

Vector eval(const std::vector<TermSum>& g, double x) {
    Vector v(static_cast<Eigen::Index>(g.size()));
    for (size_t i = 0; i < g.size(); ++i) v(static_cast<Eigen::Index>(i)) = eval(g[i], x);
    return v;
}

ProblemSpec ProblemSpec::zero(int n) {
    ProblemSpec s;
    s.n = n;
    s.A = Matrix::Zero(n, n);
    s.a = Vector::Zero(n);
    s.B.assign(static_cast<size_t>(n * n), TermSum{});
    s.f.assign(static_cast<size_t>(n), TermSum{});
    return s;
}

Matrix ProblemSpec::B_at(double x) const {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = eval(b(i, j), x);
    return m;
}

Vector ProblemSpec::f_at(double x) const { return eval(f, x); }

Matrix ProblemSpec::B_limit() const {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = limit_at_infinity(b(i, j));
    return m;
}

double ProblemSpec::B_sup() const {
    double sup = std::max(opnorm(B_at(0.0)), opnorm(B_limit()));
    constexpr int kSamples = 600;
    for (int k = 0; k < kSamples; ++k) {
        const double x = 1e-4 * std::pow(1e7, static_cast<double>(k) / (kSamples - 1));
        sup = std::max(sup, opnorm(B_at(x)));
    }
    return 1.05 * sup;
}

// ---- JSON -----------------------------------------------------------------

namespace {

[[noreturn]] void syntax(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::Syntax, path + ": " + msg);
}

double get_real(const json& j, const std::string& path) {
    if (!j.is_number()) syntax(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) syntax(path, "expected a finite number");
    return v;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) syntax(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

Term parse_term(const json& j, const std::string& path) {
    if (!j.is_object()) syntax(path, "expected a term object {\"c\", \"p\", \"mu\"}");
    reject_unknown(j, {"c", "p", "mu"}, path);
    Term t;
    if (!j.contains("c")) syntax(path, "missing field c");
    t.c = get_real(j["c"], path + ".c");
    if (j.contains("p")) {
        if (!j["p"].is_number_integer()) syntax(path + ".p", "expected an integer");
        t.p = j["p"].get<int>();
    }
    if (j.contains("mu")) t.mu = get_real(j["mu"], path + ".mu");
    return t;
}

TermSum parse_term_sum(const json& j, const std::string& path) {
    if (!j.is_array()) syntax(path, "expected a list of terms");
    TermSum ts;
    for (size_t k = 0; k < j.size(); ++k)
        ts.terms.push_back(parse_term(j[k], path + "[" + std::to_string(k) + "]"));
    validate_term_sum(ts, path);
    return ts;
}

json dump_term_sum(const TermSum& ts) {
    json arr = json::array();
    for (const auto& t : ts.terms) arr.push_back({{"c", t.c}, {"p", t.p}, {"mu", t.mu}});
    return arr;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Syntax, std::string("malformed problem file: ") + e.what());
    }
}

int parse_dimension(const json& doc) {
    if (!doc.is_object()) syntax("(root)", "expected an object");
    if (!doc.contains("n")) syntax("n", "missing field");
    if (!doc["n"].is_number_integer()) syntax("n", "expected an integer");
    const int n = doc["n"].get<int>();
    if (n < 1 || n > 16) syntax("n", "dimension must be in 1..16");
    return n;
}

Matrix parse_matrix(const json& doc, const char* key, int n) {
    if (!doc.contains(key)) syntax(key, "missing field");
    const json& j = doc[key];
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        syntax(key, "expected " + std::to_string(n) + " rows");
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        const std::string row = std::string(key) + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != n)
            syntax(row, "expected " + std::to_string(n) + " entries");
        for (int k = 0; k < n; ++k)
            m(i, k) = get_real(j[i][k], row + "[" + std::to_string(k) + "]");
    }
    return m;
}

std::vector<TermSum> parse_term_matrix(const json& doc, const char* key, int n) {
    std::vector<TermSum> out(static_cast<size_t>(n * n));
    if (!doc.contains(key)) return out;
    const json& j = doc[key];
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        syntax(key, "expected " + std::to_string(n) + " rows");
    for (int i = 0; i < n; ++i) {
        const std::string row = std::string(key) + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != n)
            syntax(row, "expected " + std::to_string(n) + " entries");
        for (int k = 0; k < n; ++k)
            out[static_cast<size_t>(i * n + k)] =
                parse_term_sum(j[i][k], row + "[" + std::to_string(k) + "]");
    }
    return out;
}

std::vector<TermSum> parse_term_vector(const json& doc, const char* key, int n) {
    std::vector<TermSum> out(static_cast<size_t>(n));
    if (!doc.contains(key)) return out;
    const json& j = doc[key];
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        syntax(key, "expected " + std::to_string(n) + " entries");
    for (int i = 0; i < n; ++i)
        out[static_cast<size_t>(i)] =
            parse_term_sum(j[i], std::string(key) + "[" + std::to_string(i) + "]");
    return out;
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
    const json doc = parse_json(text);
    const int n = parse_dimension(doc);
    reject_unknown(doc, {"n", "A", "a", "B", "f"}, "");
    ProblemSpec s = ProblemSpec::zero(n);
    s.A = parse_matrix(doc, "A", n);
    if (doc.contains("a")) {
        const json& j = doc["a"];
        if (!j.is_array() || static_cast<int>(j.size()) != n)
            syntax("a", "expected " + std::to_string(n) + " entries");
        for (int i = 0; i < n; ++i) s.a(i) = get_real(j[i], "a[" + std::to_string(i) + "]");
    }
    s.B = parse_term_matrix(doc, "B", n);
    s.f = parse_term_vector(doc, "f", n);
    return s;
}

std::string serialize_problem(const ProblemSpec& spec) {
    json doc;
    doc["n"] = spec.n;
    json A = json::array(), B = json::array(), a = json::array(), f = json::array();
    for (int i = 0; i < spec.n; ++i) {
        json arow = json::array(), brow = json::array();
        for (int k = 0; k < spec.n; ++k) {
            arow.push_back(spec.A(i, k));
            brow.push_back(dump_term_sum(spec.b(i, k)));
        }
        A.push_back(arow);
        B.push_back(brow);
        a.push_back(spec.a(i));
        f.push_back(dump_term_sum(spec.f[static_cast<size_t>(i)]));
    }
    doc["A"] = A;
    doc["a"] = a;
    doc["B"] = B;
    doc["f"] = f;
    return doc.dump(2) + "\n";
}

void validate_main_problem(const ProblemSpec& spec) {
    for (int i = 0; i < spec.n; ++i)
        if (!vanishes_at_infinity(spec.f[static_cast<size_t>(i)]))
            throw Error(ErrorKind::Invariant,
                        "f[" + std::to_string(i) + "]: must tend to 0 at infinity");
}

ManufactureInput parse_manufacture_input(const std::string& text) {
    const json doc = parse_json(text);
    ManufactureInput in;
    in.n = parse_dimension(doc);
    reject_unknown(doc, {"n", "A", "B", "ystar"}, "");
    in.A = parse_matrix(doc, "A", in.n);
    in.B = parse_term_matrix(doc, "B", in.n);
    if (!doc.contains("ystar")) syntax("ystar", "missing field");
    in.ystar = parse_term_vector(doc, "ystar", in.n);
    for (int i = 0; i < in.n; ++i)
        for (const auto& t : in.ystar[static_cast<size_t>(i)].terms)
            if (t.p < 0 || !(t.mu > 0.0))
                throw Error(ErrorKind::Invariant, "ystar[" + std::to_string(i) +
                                                      "]: terms need p >= 0 and mu > 0");
    return in;
}

ProblemSpec manufacture(const std::vector<TermSum>& ystar, const Matrix& A,
                        const std::vector<TermSum>& B) {
    const int n = static_cast<int>(A.rows());
    if (static_cast<int>(ystar.size()) != n || static_cast<int>(B.size()) != n * n)
        throw Error(ErrorKind::Dimension, "manufacture: inconsistent sizes");
    for (const auto& ts : ystar)
        for (const auto& t : ts.terms)
            if (t.p < 0 || !(t.mu > 0.0))
                throw Error(ErrorKind::Invariant, "manufacture: ystar terms need p >= 0, mu > 0");

    ProblemSpec s = ProblemSpec::zero(n);
    s.A = A;
    s.B = B;
    s.a = -A * eval(ystar, 0.0);
    for (int i = 0; i < n; ++i) {
        TermSum fi = derivative(ystar[static_cast<size_t>(i)]);
        TermSum lin;  // (A y + a)_i, divided by x below
        for (int j = 0; j < n; ++j) {
            fi = fi + (-1.0) * (B[static_cast<size_t>(i * n + j)] * ystar[static_cast<size_t>(j)]);
            lin = lin + A(i, j) * ystar[static_cast<size_t>(j)];
        }
        TermSum shifted;
        for (const auto& t : lin.terms) shifted.terms.push_back({-t.c, t.p - 1, t.mu});
        if (s.a(i) != 0.0) shifted.terms.push_back({-s.a(i), -1, 0.0});
        fi = fi + shifted;
        // the x^-1 coefficients cancel up to rounding; restore exact cancellation
        double csum = 0.0;
        int last = -1;
        for (size_t k = 0; k < fi.terms.size(); ++k)
            if (fi.terms[k].p == -1) {
                csum += fi.terms[k].c;
                last = static_cast<int>(k);
            }
        if (last >= 0) fi.terms[static_cast<size_t>(last)].c -= csum;
        fi = combine(fi);
        validate_term_sum(fi, "f[" + std::to_string(i) + "]");
        s.f[static_cast<size_t>(i)] = fi;
    }
    return s;
}

double validate_condition_A(const Matrix& A, double tol) {
    double alpha = INFINITY;
    for (const auto& lam : eigenvalues(A)) {
        const double gap = std::abs(lam.real() - 1.0);
        if (gap <= tol) {
            std::ostringstream os;
            os << "condition A violated: eigenvalue " << lam.real();
            if (lam.imag() != 0.0) os << (lam.imag() < 0 ? " - " : " + ") << std::abs(lam.imag()) << "i";
            os << " of A has real part 1";
            throw Error(ErrorKind::ConditionA, os.str());
        }
        alpha = std::min(alpha, gap);
    }
    return alpha;
}

Vector validate_condition_C(const Matrix& A, const Vector& a, double tol) {
    try {
        return min_norm_solve(A, -a, tol);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Consistency) throw;
        throw Error(ErrorKind::ConditionC,
                    std::string("condition C violated: a is not in the image of A (") + e.what() +
                        ")");
    }
}

void SolverConfig::validate() const {
    if (!(tol > 0.0 && tol <= 1e-2)) throw Error(ErrorKind::Domain, "tol must lie in (0, 1e-2]");
    if (x0 && !(*x0 > 0.0)) throw Error(ErrorKind::Domain, "x0 must be positive");
    if (x_inf && !(*x_inf > 0.0)) throw Error(ErrorKind::Domain, "x_inf must be positive");
    if (x0 && x_inf && !(*x0 < *x_inf)) throw Error(ErrorKind::Domain, "x0 must be below x_inf");
    if (kappa && !(*kappa > 0.0)) throw Error(ErrorKind::Domain, "kappa must be positive");
    if (beta && !(*beta > 0.0)) throw Error(ErrorKind::Domain, "beta must be positive");
    if (!(split_tol > 0.0)) throw Error(ErrorKind::Domain, "split_tol must be positive");
}

double auto_kappa(double gamma) { return 2.0 * gamma + 1.0; }

double auto_beta(const Matrix& A) {
    double min_re = INFINITY;
    for (const auto& lam : eigenvalues(A)) min_re = std::min(min_re, lam.real());
    if (!std::isfinite(min_re)) min_re = 0.0;
    return std::max(1.0, 1.1 * std::max(0.0, -min_re) + 0.1);
}

}  // namespace singbvp
