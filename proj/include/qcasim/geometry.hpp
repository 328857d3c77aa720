#pragma once

// Cells, dot geometry, layouts and the `.qcl` layout text format.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qcasim {

/// Raised for malformed layout text or layouts that break a geometric invariant.
/// `line()` is 0 when the failure is not tied to a source line.
class LayoutError : public std::runtime_error {
public:
    explicit LayoutError(const std::string& what, std::size_t line = 0);

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

enum class CellRole { Normal, Input, Output, Fixed };

[[nodiscard]] std::string_view to_string(CellRole role) noexcept;
[[nodiscard]] std::optional<CellRole> parse_role(std::string_view text) noexcept;

enum class ConstantsMode { Paper, Codata };

[[nodiscard]] std::string_view to_string(ConstantsMode mode) noexcept;
[[nodiscard]] std::optional<ConstantsMode> parse_constants_mode(std::string_view text) noexcept;

inline constexpr double kDefaultCellSize = 18.0;  // nm

/// One QCA cell. Lengths in nanometres, rotation in degrees (0 or 45).
struct Cell {
    std::string id;
    Point center;
    double size = kDefaultCellSize;
    double dot_offset = kDefaultCellSize / 4.0;
    int rotation = 0;
    CellRole role = CellRole::Normal;
    int clock_zone = 0;
    std::optional<double> fixed_polarization;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// Throws LayoutError when a single cell is inconsistent (size, offset, rotation,
/// clock zone, fixed polarization presence and range).
void validate_cell(const Cell& cell);

/// Four dot centres in fixed numbering order. Dot 1 has the greatest x+y, the rest
/// follow counterclockwise. P = +1 puts electrons on dots 1 and 3, P = -1 on 2 and 4.
[[nodiscard]] std::array<Point, 4> dot_positions(const Cell& cell) noexcept;

/// Zero-based indices of the two occupied dots for a polarization sign.
struct ElectronConfiguration {
    std::string cell_id;
    std::array<int, 2> dots{};
};

[[nodiscard]] ElectronConfiguration electron_configuration(const Cell& cell, int polarization_sign);

/// Largest per-axis edge-to-edge gap between two cell bounding boxes. Positive means
/// the boxes are disjoint.
[[nodiscard]] double edge_gap(const Cell& a, const Cell& b) noexcept;

[[nodiscard]] double center_distance(const Cell& a, const Cell& b) noexcept;

class Layout {
public:
    /// Validates and takes ownership of the cells. Throws LayoutError.
    Layout(std::string name, std::vector<Cell> cells, ConstantsMode constants = ConstantsMode::Paper);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] const std::vector<Cell>& cells() const noexcept { return cells_; }
    [[nodiscard]] ConstantsMode constants_mode() const noexcept { return constants_; }
    [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }
    [[nodiscard]] bool empty() const noexcept { return cells_.empty(); }

    /// Index of the cell with `id`, or nullopt.
    [[nodiscard]] std::optional<std::size_t> find(std::string_view id) const noexcept;
    [[nodiscard]] const Cell& at(std::string_view id) const;

    /// Nearest other cell by centre distance, ties broken by lowest id.
    [[nodiscard]] std::optional<std::size_t> previous_neighbor(std::size_t index) const noexcept;

    [[nodiscard]] std::vector<std::size_t> indices_with_role(CellRole role) const;

    friend bool operator==(const Layout&, const Layout&) = default;

private:
    std::string name_;
    std::vector<Cell> cells_;
    ConstantsMode constants_ = ConstantsMode::Paper;
};

/// Parses a `.qcl` document. Errors carry the offending line number.
[[nodiscard]] Layout parse_layout(std::string_view text, std::string name = "layout");

/// Canonical `.qcl` text. parse_layout(serialize_layout(l)) == l for any layout whose
/// reals survive 6-decimal formatting.
[[nodiscard]] std::string serialize_layout(const Layout& layout);

/// Canonical real formatting used by the layout format: fixed, 6 decimals, trailing
/// zeros trimmed.
[[nodiscard]] std::string format_layout_real(double value);

/// Built-in layouts: "wire" (n cells), "majority", "inv2", "inv3". `gap` is the
/// per-axis edge gap in nm.
[[nodiscard]] Layout builtin_layout(std::string_view name, double gap = 2.0, int wire_length = 5);

/// Names accepted by builtin_layout; wire may be written "wire" or "wire<N>".
[[nodiscard]] std::vector<std::string> builtin_layout_names();

/// Moves cell `id` along `axis` so that its per-axis edge gap to its previous
/// neighbour equals `new_gap` on every axis where `axis` is non-zero.
[[nodiscard]] Layout displace_cell(const Layout& layout, std::string_view id, double new_gap, Point axis);

}  // namespace qcasim
