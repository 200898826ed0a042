#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "dlpde/core.hpp"

namespace dlpde {

/// Value and spatial/temporal derivatives of the solution at one point.
struct DerivativeJet {
    double x = 0.0;
    double t = 0.0;
    double u = 0.0;
    double u_t = 0.0;
    double u_x = 0.0;
    double u_xx = 0.0;
    double u_xxx = 0.0;

    /// d^q u / dx^q for q in [0, 3].
    double spatial(int q) const;
    bool finite() const;
};

/// Candidate term u^p * d^q u/dx^q. For q = 0 there is no derivative factor,
/// so (0, 0) is the constant 1, (1, 0) is u and (2, 0) is u^2.
struct TermSpec {
    int u_power = 0;
    int derivative_order = 0;

    std::string label() const;
    bool operator==(const TermSpec&) const = default;
};

/// Inverse of TermSpec::label. Throws FormatError on unknown labels.
TermSpec parse_term_label(const std::string& label);

struct TermCatalog {
    std::vector<TermSpec> terms;

    std::size_t size() const { return terms.size(); }
    const TermSpec& operator[](std::size_t j) const { return terms[j]; }
    /// Column index of the term with this label, or -1.
    int index_of(const std::string& label) const;
    std::vector<std::string> labels() const;
    void validate() const;

    bool operator==(const TermCatalog&) const = default;
};

/// The ten-term library {1, u_x, u_xx, u_xxx, u u_x, u u_xx, u u_xxx,
/// u^2 u_x, u^2 u_xx, u^2 u_xxx}.
TermCatalog default_catalog();
/// default_catalog plus the derivative-free terms u and u^2 (12 terms).
TermCatalog extended_catalog();

/// u^p * d^q u / dx^q evaluated on a jet.
template <typename Scalar>
Scalar evaluate_term(const TermSpec& term, Scalar u, Scalar derivative) {
    Scalar power = term.u_power == 0 ? Scalar(1) : (term.u_power == 1 ? u : u * u);
    return term.derivative_order == 0 ? power : power * derivative;
}

inline double evaluate_term(const TermSpec& term, const DerivativeJet& jet) {
    return evaluate_term<double>(term, jet.u, jet.spatial(term.derivative_order));
}

/// Regression system U_t = Theta * xi over a catalog.
struct FeatureSystem {
    Eigen::MatrixXd theta;
    Eigen::VectorXd ut;
    TermCatalog catalog;
    /// Column j of theta equals the raw column j divided by column_scales(j).
    Eigen::VectorXd column_scales;

    Eigen::Index rows() const { return theta.rows(); }
    Eigen::Index cols() const { return theta.cols(); }
};

/// Builds theta(i, j) = term_j(jet_i), ut(i) = jet_i.u_t.
FeatureSystem assemble(std::span<const DerivativeJet> jets, const TermCatalog& catalog);

/// Divides each column by its 2-norm and records the cumulative scale.
FeatureSystem normalize(const FeatureSystem& system);

/// Selects a subset of rows (all columns, same scales).
FeatureSystem select_rows(const FeatureSystem& system, std::span<const Eigen::Index> rows);

}  // namespace dlpde
