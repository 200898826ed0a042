#include "dlpde/library.hpp"

#include <cmath>
#include <set>

namespace dlpde {

double DerivativeJet::spatial(int q) const {
    switch (q) {
        case 0: return u;
        case 1: return u_x;
        case 2: return u_xx;
        case 3: return u_xxx;
        default: throw ParameterError("derivative order above 3 is not supported");
    }
}

bool DerivativeJet::finite() const {
    return std::isfinite(x) && std::isfinite(t) && std::isfinite(u) && std::isfinite(u_t) &&
           std::isfinite(u_x) && std::isfinite(u_xx) && std::isfinite(u_xxx);
}

namespace {

const char* derivative_label(int q) {
    switch (q) {
        case 1: return "u_x";
        case 2: return "u_xx";
        case 3: return "u_xxx";
        default: return nullptr;
    }
}

}  // namespace

std::string TermSpec::label() const {
    if (u_power < 0 || u_power > 2 || derivative_order < 0 || derivative_order > 3)
        throw ParameterError("term outside p in {0,1,2}, q in {0..3}");
    if (derivative_order == 0) return u_power == 0 ? "1" : (u_power == 1 ? "u" : "u^2");
    std::string d = derivative_label(derivative_order);
    if (u_power == 0) return d;
    return (u_power == 1 ? "u*" : "u^2*") + d;
}

TermSpec parse_term_label(const std::string& label) {
    for (int p = 0; p <= 2; ++p)
        for (int q = 0; q <= 3; ++q) {
            TermSpec term{p, q};
            if (term.label() == label) return term;
        }
    throw FormatError("unknown term label '" + label + "'");
}

int TermCatalog::index_of(const std::string& label) const {
    for (std::size_t j = 0; j < terms.size(); ++j)
        if (terms[j].label() == label) return static_cast<int>(j);
    return -1;
}

std::vector<std::string> TermCatalog::labels() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& term : terms) out.push_back(term.label());
    return out;
}

void TermCatalog::validate() const {
    if (terms.empty()) throw ParameterError("term catalog is empty");
    std::set<std::pair<int, int>> seen;
    for (const auto& term : terms) {
        term.label();  // range check
        if (!seen.insert({term.u_power, term.derivative_order}).second)
            throw ParameterError("duplicate term " + term.label() + " in catalog");
    }
}

TermCatalog default_catalog() {
    return {{{0, 0}, {0, 1}, {0, 2}, {0, 3},
             {1, 1}, {1, 2}, {1, 3},
             {2, 1}, {2, 2}, {2, 3}}};
}

TermCatalog extended_catalog() {
    return {{{0, 0}, {1, 0}, {2, 0}, {0, 1}, {0, 2}, {0, 3},
             {1, 1}, {1, 2}, {1, 3},
             {2, 1}, {2, 2}, {2, 3}}};
}

FeatureSystem assemble(std::span<const DerivativeJet> jets, const TermCatalog& catalog) {
    catalog.validate();
    const auto n = static_cast<Eigen::Index>(jets.size());
    const auto m = static_cast<Eigen::Index>(catalog.size());
    if (n < m)
        throw ParameterError("assemble: " + std::to_string(n) + " jets for " + std::to_string(m) +
                             " terms");
    FeatureSystem system;
    system.catalog = catalog;
    system.theta.resize(n, m);
    system.ut.resize(n);
    system.column_scales = Eigen::VectorXd::Ones(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& jet = jets[static_cast<std::size_t>(i)];
        if (!jet.finite())
            throw AssemblyError("non-finite jet at point " + std::to_string(i) + " (x=" +
                                    std::to_string(jet.x) + ", t=" + std::to_string(jet.t) + ")",
                                static_cast<std::size_t>(i));
        system.ut(i) = jet.u_t;
        for (Eigen::Index j = 0; j < m; ++j)
            system.theta(i, j) = evaluate_term(catalog[static_cast<std::size_t>(j)], jet);
    }
    return system;
}

FeatureSystem normalize(const FeatureSystem& system) {
    FeatureSystem out = system;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double norm = out.theta.col(j).norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            const auto label = out.catalog[static_cast<std::size_t>(j)].label();
            throw ConditioningError("column '" + label + "' has zero norm", label);
        }
        out.theta.col(j) /= norm;
        out.column_scales(j) *= norm;
    }
    return out;
}

FeatureSystem select_rows(const FeatureSystem& system, std::span<const Eigen::Index> rows) {
    FeatureSystem out;
    out.catalog = system.catalog;
    out.column_scales = system.column_scales;
    out.theta.resize(static_cast<Eigen::Index>(rows.size()), system.cols());
    out.ut.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.theta.row(static_cast<Eigen::Index>(k)) = system.theta.row(rows[k]);
        out.ut(static_cast<Eigen::Index>(k)) = system.ut(rows[k]);
    }
    return out;
}

}  // namespace dlpde
