#include "qcasim/electrostatics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace qcasim {

namespace {
constexpr double kNanometre = 1e-9;
}

PhysicalConstants PhysicalConstants::paper() noexcept { return PhysicalConstants{}; }

PhysicalConstants PhysicalConstants::codata() noexcept {
    PhysicalConstants c;
    c.coulomb_k = 8.9875517873681764e9;
    c.electron_charge = 1.602176634e-19;
    c.mode = ConstantsMode::Codata;
    return c;
}

PhysicalConstants PhysicalConstants::for_mode(ConstantsMode mode) noexcept {
    return mode == ConstantsMode::Paper ? paper() : codata();
}

double coulomb_pair(double q1, double q2, double r, const PhysicalConstants& constants) {
    if (!(r > 0.0)) throw DomainError("coulomb_pair: distance must be positive");
    return constants.coulomb_k * q1 * q2 / (constants.relative_permittivity * r);
}

namespace {

std::array<Point, 4> local_dots(const Cell& cell) noexcept {
    Cell origin = cell;
    origin.center = {};
    return dot_positions(origin);
}

// Sum of 1/r (in 1/m) over the occupied dot pairs, in long double. Terms are sorted
// before summation so the result is independent of argument order.
long double inverse_distance_sum(const Cell& a, int pa, const Cell& b, int pb) {
    // Dot offsets relative to the cell centre are exact; the centre difference is
    // formed in long double so that distant pairs keep their small kink energy.
    const auto da = local_dots(a);
    const auto db = local_dots(b);
    const long double cx = static_cast<long double>(a.center.x) - b.center.x;
    const long double cy = static_cast<long double>(a.center.y) - b.center.y;
    const auto ea = electron_configuration(a, pa).dots;
    const auto eb = electron_configuration(b, pb).dots;
    std::array<long double, 4> terms{};
    std::size_t n = 0;
    for (int i : ea) {
        for (int j : eb) {
            const long double dx = cx + (static_cast<long double>(da[i].x) - db[j].x);
            const long double dy = cy + (static_cast<long double>(da[i].y) - db[j].y);
            const long double r = std::sqrt(dx * dx + dy * dy);
            if (!(r > 0.0L)) {
                throw DomainError("coincident dots between cells '" + a.id + "' and '" + b.id + "'");
            }
            terms[n++] = 1.0L / (r * kNanometre);
        }
    }
    std::sort(terms.begin(), terms.end());
    long double sum = 0.0L;
    for (auto t : terms) sum += t;
    return sum;
}

void require_disjoint(const Cell& a, const Cell& b) {
    if (!(edge_gap(a, b) > 0.0)) throw DomainError("cells '" + a.id + "' and '" + b.id + "' overlap");
}

long double pair_prefactor(const PhysicalConstants& c) {
    const long double e = c.electron_charge;
    return static_cast<long double>(c.coulomb_k) * e * e / c.relative_permittivity;
}

}  // namespace

double config_energy(const Cell& a, int pa, const Cell& b, int pb, const PhysicalConstants& constants) {
    require_disjoint(a, b);
    return static_cast<double>(pair_prefactor(constants) * inverse_distance_sum(a, pa, b, pb));
}

double kink_energy_pair(const Cell& a, const Cell& b, const PhysicalConstants& constants) {
    require_disjoint(a, b);
    // E_opp - E_same = -1/2 sum_ij s_i s_j / r_ij, where s = +1 on dots 1 and 3 and -1
    // on dots 2 and 4. The signed sum cancels to about 1e-8 of its terms for nearly
    // symmetric pairs, so it is accumulated in quad precision.
    using Wide = boost::multiprecision::cpp_bin_float_quad;
    const auto da = local_dots(a);
    const auto db = local_dots(b);
    const Wide cx = Wide(a.center.x) - Wide(b.center.x);
    const Wide cy = Wide(a.center.y) - Wide(b.center.y);
    std::array<Wide, 16> terms;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const Wide dx = cx + (Wide(da[i].x) - Wide(db[j].x));
            const Wide dy = cy + (Wide(da[i].y) - Wide(db[j].y));
            const Wide r = sqrt(dx * dx + dy * dy);
            if (!(r > 0)) throw DomainError("coincident dots between cells '" + a.id + "' and '" + b.id + "'");
            const Wide inv = 1 / r;
            terms[4 * i + j] = ((i + j) % 2 == 0) ? -inv : inv;
        }
    }
    // Summing in sorted order makes the result independent of which cell comes first.
    std::sort(terms.begin(), terms.end());
    Wide sum = 0;
    for (const auto& t : terms) sum += t;
    const long double diff = static_cast<long double>(sum / 2) / kNanometre;
    return static_cast<double>(pair_prefactor(constants) * diff);
}

KinkMatrix::KinkMatrix(std::size_t cell_count, double radius_of_effect)
    : neighbors_(cell_count), radius_(radius_of_effect) {}

std::size_t KinkMatrix::pair_count() const noexcept {
    std::size_t n = 0;
    for (const auto& row : neighbors_) n += row.size();
    return n / 2;
}

std::optional<double> KinkMatrix::get(std::size_t i, std::size_t j) const {
    const auto& row = neighbors_.at(i);
    const auto it = std::lower_bound(row.begin(), row.end(), j,
                                     [](const Entry& e, std::size_t key) { return e.neighbor < key; });
    if (it == row.end() || it->neighbor != j) return std::nullopt;
    return it->energy;
}

void KinkMatrix::set(std::size_t i, std::size_t j, double energy) {
    if (i == j) throw std::invalid_argument("KinkMatrix: self pairs are not stored");
    const auto insert = [&](std::size_t row, std::size_t col) {
        auto& r = neighbors_.at(row);
        const auto it = std::lower_bound(r.begin(), r.end(), col,
                                         [](const Entry& e, std::size_t key) { return e.neighbor < key; });
        if (it != r.end() && it->neighbor == col) {
            it->energy = energy;
        } else {
            r.insert(it, Entry{col, energy});
        }
    };
    insert(i, j);
    insert(j, i);
}

KinkMatrix kink_matrix(const Layout& layout, double radius_of_effect, const PhysicalConstants& constants) {
    if (!(radius_of_effect > 0.0)) throw DomainError("radius of effect must be positive");
    const auto& cells = layout.cells();
    KinkMatrix matrix(cells.size(), radius_of_effect);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = i + 1; j < cells.size(); ++j) {
            if (center_distance(cells[i], cells[j]) <= radius_of_effect) {
                matrix.set(i, j, kink_energy_pair(cells[i], cells[j], constants));
            }
        }
    }
    return matrix;
}

std::vector<std::tuple<std::string, std::string, double>> kink_pairs(const Layout& layout, const KinkMatrix& kink) {
    std::vector<std::tuple<std::string, std::string, double>> out;
    const auto& cells = layout.cells();
    for (std::size_t i = 0; i < kink.cell_count(); ++i) {
        for (const auto& e : kink.neighbors(i)) {
            if (e.neighbor <= i) continue;
            auto a = cells[i].id;
            auto b = cells[e.neighbor].id;
            if (b < a) std::swap(a, b);
            out.emplace_back(std::move(a), std::move(b), e.energy);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace qcasim
