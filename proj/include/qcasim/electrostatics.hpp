#pragma once

// Coulomb configuration energies and kink energies between cells.

#include "qcasim/geometry.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace qcasim {

/// Raised when an energy is undefined (non-positive distance, overlapping cells).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct PhysicalConstants {
    double coulomb_k = 9.0e9;              // N m^2 / C^2
    double electron_charge = 1.6e-19;      // C
    double relative_permittivity = 1.0;
    double boltzmann_k = 1.380649e-23;     // J / K
    double hbar = 1.054571817e-34;         // J s
    ConstantsMode mode = ConstantsMode::Paper;

    /// k = 9e9 and e = 1.6e-19, so k e^2 = 23.04e-29 J m.
    [[nodiscard]] static PhysicalConstants paper() noexcept;
    [[nodiscard]] static PhysicalConstants codata() noexcept;
    [[nodiscard]] static PhysicalConstants for_mode(ConstantsMode mode) noexcept;
};

/// Point-charge interaction energy in joules. `r` is in metres.
[[nodiscard]] double coulomb_pair(double q1, double q2, double r, const PhysicalConstants& constants);

/// Electrostatic energy of the four electron-electron pairs when cell A holds sign
/// `pa` and cell B holds sign `pb`. Each cell contributes two electrons of charge -e.
[[nodiscard]] double config_energy(const Cell& a, int pa, const Cell& b, int pb, const PhysicalConstants& constants);

/// Opposite-polarization energy minus same-polarization energy. Both are averaged
/// over the two reference states: E_opp = (E(+,-) + E(-,+))/2 and
/// E_same = (E(+,+) + E(-,-))/2. Positive values favour equal polarizations.
[[nodiscard]] double kink_energy_pair(const Cell& a, const Cell& b, const PhysicalConstants& constants);

/// Sparse symmetric kink energies for all pairs within the radius of effect.
class KinkMatrix {
public:
    struct Entry {
        std::size_t neighbor;
        double energy;
    };

    KinkMatrix() = default;
    KinkMatrix(std::size_t cell_count, double radius_of_effect);

    [[nodiscard]] std::size_t cell_count() const noexcept { return neighbors_.size(); }
    [[nodiscard]] double radius_of_effect() const noexcept { return radius_; }
    [[nodiscard]] std::size_t pair_count() const noexcept;

    /// Neighbours of `i` in ascending index order.
    [[nodiscard]] const std::vector<Entry>& neighbors(std::size_t i) const { return neighbors_.at(i); }

    /// Kink energy between i and j, or nullopt if the pair is outside the radius.
    [[nodiscard]] std::optional<double> get(std::size_t i, std::size_t j) const;

    /// Inserts both (i,j) and (j,i). Entries must arrive in ascending order per row.
    void set(std::size_t i, std::size_t j, double energy);

private:
    std::vector<std::vector<Entry>> neighbors_;
    double radius_ = 0.0;
};

/// Builds the kink matrix for a layout. Pairs are evaluated in index order, so the
/// result does not depend on scheduling.
[[nodiscard]] KinkMatrix kink_matrix(const Layout& layout, double radius_of_effect, const PhysicalConstants& constants);

/// Pairs as (id_i, id_j, energy) with id_i < id_j, sorted lexicographically.
[[nodiscard]] std::vector<std::tuple<std::string, std::string, double>> kink_pairs(const Layout& layout,
                                                                                  const KinkMatrix& kink);

}  // namespace qcasim
