#pragma once

#include <optional>
#include <vector>

#include "dlpde/grid.hpp"
#include "dlpde/library.hpp"
#include "dlpde/stridge.hpp"

namespace dlpde {

enum class FdScheme { Central2, Central4 };
enum class FdBoundary { OneSided, Drop };

/// Local least-squares polynomial fit along each grid line.
struct Smoothing {
    int degree = 4;
    int window = 11;
};

struct FdConfig {
    FdScheme scheme = FdScheme::Central2;
    FdBoundary boundary = FdBoundary::OneSided;
    std::optional<Smoothing> smooth;

    void validate() const;
};

/// Finite-difference weights for the q-th derivative at 0 from nodes at
/// the given offsets (Fornberg's recursion). Offsets in units of spacing.
std::vector<double> fd_weights(const std::vector<double>& offsets, int q);

/// Jets at every grid node (x-fastest). With FdBoundary::Drop, nodes whose
/// centred stencil does not fit are left out.
std::vector<DerivativeJet> fd_jets(const GridField& field, const FdConfig& config);

/// fd_jets -> assemble -> stridge (sweep_tol when config.tol_sweep is set).
DiscoveryResult direct_stridge(const GridField& field, const FdConfig& fd, const TermCatalog& catalog,
                               const StridgeConfig& config);

}  // namespace dlpde
