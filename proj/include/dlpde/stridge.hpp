#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlpde/library.hpp"

namespace dlpde {

/// (Theta^T Theta + lambda I)^-1 Theta^T ut, solved as the stacked least-squares
/// problem [Theta; sqrt(lambda) I] xi = [ut; 0] by QR. With lambda = 0 a
/// rank-deficient Theta raises RankError.
template <typename DerivedA, typename DerivedB>
Eigen::VectorXd ridge(const Eigen::MatrixBase<DerivedA>& theta, const Eigen::MatrixBase<DerivedB>& ut,
                      double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("ridge: lambda must be >= 0");
    if (theta.rows() != ut.rows()) throw ParameterError("ridge: row count mismatch");
    const Eigen::Index m = theta.cols();
    if (m == 0) return Eigen::VectorXd();
    if (lambda == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(theta);
        if (qr.rank() < m) throw RankError("ridge: singular system with lambda = 0");
        return qr.solve(ut.derived().template cast<double>().eval());
    }
    Eigen::MatrixXd stacked(theta.rows() + m, m);
    stacked.topRows(theta.rows()) = theta;
    stacked.bottomRows(m) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(theta.rows() + m);
    rhs.head(theta.rows()) = ut;
    return stacked.householderQr().solve(rhs);
}

inline Eigen::VectorXd ridge(const FeatureSystem& system, double lambda) {
    return ridge(system.theta, system.ut, lambda);
}

enum class TolMode { Relative, Absolute };

struct StridgeConfig {
    double lambda = 1e-5;
    double tol = 0.05;
    TolMode tol_mode = TolMode::Relative;
    int max_iter = 25;
    bool final_refit = true;
    bool normalize = true;
    /// Candidate tolerances for sweep_tol.
    std::vector<double> tol_sweep;
    double validation_fraction = 0.2;
    std::uint64_t split_seed = 0;
    /// Complexity penalty per term in sweep_tol; negative selects the default.
    double complexity_penalty = -1.0;

    void validate() const;
};

struct DiscoveryResult {
    TermCatalog catalog;
    std::vector<int> support;
    std::vector<double> coefficients;
    int iterations_used = 0;
    double residual_rms = 0.0;
    bool converged = true;
    std::vector<std::string> warnings;
    std::string equation;

    bool found() const { return !support.empty(); }
    /// Coefficient of the term with this label (0 if not selected).
    double coefficient(const std::string& label) const;
    /// Dense coefficient vector over the catalog.
    Eigen::VectorXd dense() const;
    std::vector<std::string> support_labels() const;
};

/// "u_t = -0.996*u*u_x + 0.099*u_xx". `symbol` replaces the variable name.
std::string render_equation(const TermCatalog& catalog, const std::vector<int>& support,
                            const std::vector<double>& coefficients, const std::string& symbol = "u");
/// Three decimals, or three significant digits for |c| < 0.01.
std::string format_coefficient(double c);

/// Sequential threshold ridge regression.
DiscoveryResult stridge(const FeatureSystem& system, const StridgeConfig& config);

/// Runs stridge for each tolerance in config.tol_sweep on a seeded fit
/// split, picks the one minimizing validation RMS + penalty * |support|,
/// and refits it on the whole system.
DiscoveryResult sweep_tol(const FeatureSystem& system, const StridgeConfig& config);

/// sweep_tol when config.tol_sweep is non-empty, stridge otherwise.
DiscoveryResult discover(const FeatureSystem& system, const StridgeConfig& config);

void write_result(std::ostream& os, const DiscoveryResult& result);
DiscoveryResult read_result(std::istream& is);
void save_result(const std::string& path, const DiscoveryResult& result);
DiscoveryResult load_result(const std::string& path);

}  // namespace dlpde
