#include "qcasim/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace qcasim {

LayoutError::LayoutError(const std::string& what, std::size_t line)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

std::string_view to_string(CellRole role) noexcept {
    switch (role) {
        case CellRole::Normal: return "normal";
        case CellRole::Input: return "input";
        case CellRole::Output: return "output";
        case CellRole::Fixed: return "fixed";
    }
    return "normal";
}

std::optional<CellRole> parse_role(std::string_view text) noexcept {
    if (text == "normal") return CellRole::Normal;
    if (text == "input") return CellRole::Input;
    if (text == "output") return CellRole::Output;
    if (text == "fixed") return CellRole::Fixed;
    return std::nullopt;
}

std::string_view to_string(ConstantsMode mode) noexcept {
    return mode == ConstantsMode::Paper ? "paper" : "codata";
}

std::optional<ConstantsMode> parse_constants_mode(std::string_view text) noexcept {
    if (text == "paper") return ConstantsMode::Paper;
    if (text == "codata") return ConstantsMode::Codata;
    return std::nullopt;
}

void validate_cell(const Cell& cell) {
    const auto fail = [&](const std::string& msg) { throw LayoutError("cell '" + cell.id + "': " + msg); };
    if (cell.id.empty()) throw LayoutError("cell id must not be empty");
    if (!std::isfinite(cell.center.x) || !std::isfinite(cell.center.y)) fail("center must be finite");
    if (!(cell.size > 0.0) || !std::isfinite(cell.size)) fail("size must be positive");
    if (!(cell.dot_offset > 0.0) || cell.dot_offset > cell.size / 2.0) fail("offset must lie in (0, size/2]");
    if (cell.rotation != 0 && cell.rotation != 45) fail("rotation must be 0 or 45");
    if (cell.clock_zone < 0 || cell.clock_zone > 3) fail("clock zone must be in 0..3");
    if (cell.role == CellRole::Fixed) {
        if (!cell.fixed_polarization) fail("fixed cell requires a polarization");
        if (!(std::abs(*cell.fixed_polarization) <= 1.0)) fail("polarization must lie in [-1, 1]");
    } else if (cell.fixed_polarization) {
        fail("only fixed cells carry a polarization");
    }
}

std::array<Point, 4> dot_positions(const Cell& cell) noexcept {
    const double a = cell.dot_offset;
    const double cx = cell.center.x;
    const double cy = cell.center.y;
    if (cell.rotation == 45) {
        // Dot 1 is on the +x axis; the +y dot has equal x+y and comes next counterclockwise.
        return {Point{cx + a, cy}, Point{cx, cy + a}, Point{cx - a, cy}, Point{cx, cy - a}};
    }
    return {Point{cx + a, cy + a}, Point{cx - a, cy + a}, Point{cx - a, cy - a}, Point{cx + a, cy - a}};
}

ElectronConfiguration electron_configuration(const Cell& cell, int polarization_sign) {
    if (polarization_sign == 0) throw std::invalid_argument("polarization sign must be non-zero");
    ElectronConfiguration config{cell.id, {}};
    config.dots = polarization_sign > 0 ? std::array<int, 2>{0, 2} : std::array<int, 2>{1, 3};
    return config;
}

double edge_gap(const Cell& a, const Cell& b) noexcept {
    const double half = (a.size + b.size) / 2.0;
    const double gx = std::abs(a.center.x - b.center.x) - half;
    const double gy = std::abs(a.center.y - b.center.y) - half;
    return std::max(gx, gy);
}

double center_distance(const Cell& a, const Cell& b) noexcept {
    return std::hypot(a.center.x - b.center.x, a.center.y - b.center.y);
}

Layout::Layout(std::string name, std::vector<Cell> cells, ConstantsMode constants)
    : name_(std::move(name)), cells_(std::move(cells)), constants_(constants) {
    std::set<std::string_view> ids;
    for (const auto& cell : cells_) {
        validate_cell(cell);
        if (!ids.insert(cell.id).second) throw LayoutError("duplicate cell id '" + cell.id + "'");
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        for (std::size_t j = i + 1; j < cells_.size(); ++j) {
            if (!(edge_gap(cells_[i], cells_[j]) > 0.0)) {
                throw LayoutError("cells '" + cells_[i].id + "' and '" + cells_[j].id + "' overlap");
            }
        }
    }
    const bool has_driver = std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) {
        return c.role == CellRole::Input || c.role == CellRole::Fixed;
    });
    const bool has_driven = std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) {
        return c.role == CellRole::Normal || c.role == CellRole::Output;
    });
    if (has_driven && !has_driver) throw LayoutError("layout has no input or fixed cell");
}

std::optional<std::size_t> Layout::find(std::string_view id) const noexcept {
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].id == id) return i;
    }
    return std::nullopt;
}

const Cell& Layout::at(std::string_view id) const {
    const auto index = find(id);
    if (!index) throw LayoutError("unknown cell id '" + std::string(id) + "'");
    return cells_[*index];
}

std::optional<std::size_t> Layout::previous_neighbor(std::size_t index) const noexcept {
    std::optional<std::size_t> best;
    double best_distance = 0.0;
    for (std::size_t j = 0; j < cells_.size(); ++j) {
        if (j == index) continue;
        const double d = center_distance(cells_[index], cells_[j]);
        if (!best || d < best_distance || (d == best_distance && cells_[j].id < cells_[*best].id)) {
            best = j;
            best_distance = d;
        }
    }
    return best;
}

std::vector<std::size_t> Layout::indices_with_role(CellRole role) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].role == role) out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// .qcl text format
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_real(std::string_view key, std::string_view text, std::size_t line) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw LayoutError("invalid number for '" + std::string(key) + "': '" + std::string(text) + "'", line);
    }
    return value;
}

int parse_int(std::string_view key, std::string_view text, std::size_t line) {
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw LayoutError("invalid integer for '" + std::string(key) + "': '" + std::string(text) + "'", line);
    }
    return value;
}

Cell parse_cell_line(const std::vector<std::string_view>& tokens, std::size_t line) {
    std::map<std::string_view, std::string_view> fields;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == tokens[i].size()) {
            throw LayoutError("expected key=value, got '" + std::string(tokens[i]) + "'", line);
        }
        const auto key = tokens[i].substr(0, eq);
        if (!fields.emplace(key, tokens[i].substr(eq + 1)).second) {
            throw LayoutError("repeated key '" + std::string(key) + "'", line);
        }
    }
    static const std::set<std::string_view> known{"id", "x", "y", "size", "offset", "rot", "role", "clock", "pol"};
    for (const auto& [key, value] : fields) {
        if (!known.count(key)) throw LayoutError("unknown key '" + std::string(key) + "'", line);
    }
    for (const auto* required : {"id", "x", "y", "role"}) {
        if (!fields.count(required)) throw LayoutError(std::string("missing required key '") + required + "'", line);
    }

    Cell cell;
    cell.id = std::string(fields["id"]);
    cell.center = {parse_real("x", fields["x"], line), parse_real("y", fields["y"], line)};
    if (fields.count("size")) cell.size = parse_real("size", fields["size"], line);
    cell.dot_offset = fields.count("offset") ? parse_real("offset", fields["offset"], line) : cell.size / 4.0;
    if (fields.count("rot")) cell.rotation = parse_int("rot", fields["rot"], line);
    if (fields.count("clock")) cell.clock_zone = parse_int("clock", fields["clock"], line);
    const auto role = parse_role(fields["role"]);
    if (!role) throw LayoutError("unknown role '" + std::string(fields["role"]) + "'", line);
    cell.role = *role;
    if (fields.count("pol")) cell.fixed_polarization = parse_real("pol", fields["pol"], line);
    if (cell.role == CellRole::Fixed && !cell.fixed_polarization) {
        throw LayoutError("fixed cell '" + cell.id + "' requires pol", line);
    }
    if (cell.role != CellRole::Fixed && cell.fixed_polarization) {
        throw LayoutError("pol is only allowed on fixed cells", line);
    }
    try {
        validate_cell(cell);
    } catch (const LayoutError& e) {
        throw LayoutError(e.what(), line);
    }
    return cell;
}

}  // namespace

Layout parse_layout(std::string_view text, std::string name) {
    std::vector<Cell> cells;
    std::vector<std::size_t> cell_lines;
    ConstantsMode constants = ConstantsMode::Paper;
    bool seen_header = false;
    bool seen_constants = false;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto tokens = split_ws(line);

        if (!seen_header) {
            if (tokens.size() != 2 || tokens[0] != "qcl" || tokens[1] != "1") {
                throw LayoutError("expected header 'qcl 1'", line_no);
            }
            seen_header = true;
            continue;
        }
        if (tokens[0] == "constants") {
            if (seen_constants) throw LayoutError("repeated constants line", line_no);
            if (!cells.empty()) throw LayoutError("constants line must precede cells", line_no);
            const auto mode = tokens.size() == 2 ? parse_constants_mode(tokens[1]) : std::nullopt;
            if (!mode) throw LayoutError("expected 'constants paper|codata'", line_no);
            constants = *mode;
            seen_constants = true;
        } else if (tokens[0] == "cell") {
            cells.push_back(parse_cell_line(tokens, line_no));
            cell_lines.push_back(line_no);
        } else {
            throw LayoutError("unknown directive '" + std::string(tokens[0]) + "'", line_no);
        }
    }
    if (!seen_header) throw LayoutError("missing header 'qcl 1'", line_no);

    // Pairwise checks are repeated here so errors can point at the later line.
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (cells[i].id == cells[j].id) throw LayoutError("duplicate cell id '" + cells[i].id + "'", cell_lines[i]);
            if (!(edge_gap(cells[i], cells[j]) > 0.0)) {
                throw LayoutError("cell '" + cells[i].id + "' overlaps '" + cells[j].id + "'", cell_lines[i]);
            }
        }
    }
    return Layout(std::move(name), std::move(cells), constants);
}

std::string format_layout_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

std::string serialize_layout(const Layout& layout) {
    std::ostringstream out;
    out << "qcl 1\n";
    out << "# " << layout.name() << "\n";
    out << "constants " << to_string(layout.constants_mode()) << "\n";
    for (const auto& c : layout.cells()) {
        out << "cell id=" << c.id << " x=" << format_layout_real(c.center.x) << " y=" << format_layout_real(c.center.y)
            << " size=" << format_layout_real(c.size) << " offset=" << format_layout_real(c.dot_offset)
            << " rot=" << c.rotation << " role=" << to_string(c.role) << " clock=" << c.clock_zone;
        if (c.fixed_polarization) out << " pol=" << format_layout_real(*c.fixed_polarization);
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Built-in layouts
// ---------------------------------------------------------------------------

namespace {

Cell make_cell(std::string id, double x, double y, CellRole role, int rotation = 0) {
    Cell c;
    c.id = std::move(id);
    c.center = {x, y};
    c.role = role;
    c.rotation = rotation;
    if (role == CellRole::Fixed) c.fixed_polarization = 1.0;
    return c;
}

}  // namespace

std::vector<std::string> builtin_layout_names() { return {"wire", "majority", "inv2", "inv3"}; }

Layout builtin_layout(std::string_view name, double gap, int wire_length) {
    if (!(gap > 0.0) || !std::isfinite(gap)) throw LayoutError("gap must be positive");
    const double pitch = kDefaultCellSize + gap;

    if (name.rfind("wire", 0) == 0) {
        if (name.size() > 4) {
            const auto digits = name.substr(4);
            const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), wire_length);
            if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
                throw LayoutError("unknown builtin layout '" + std::string(name) + "'");
            }
        }
        if (wire_length < 2) throw LayoutError("wire needs at least 2 cells");
        std::vector<Cell> cells;
        for (int i = 0; i < wire_length; ++i) {
            const auto role = i == 0 ? CellRole::Fixed : (i + 1 == wire_length ? CellRole::Output : CellRole::Normal);
            const auto id = i == 0 ? std::string("in") : (i + 1 == wire_length ? std::string("out") : "w" + std::to_string(i));
            cells.push_back(make_cell(id, i * pitch, 0.0, role));
        }
        return Layout("wire" + std::to_string(wire_length), std::move(cells));
    }
    if (name == "majority") {
        return Layout("majority", {make_cell("a", -pitch, 0.0, CellRole::Input),
                                   make_cell("b", 0.0, pitch, CellRole::Input),
                                   make_cell("c", 0.0, -pitch, CellRole::Input),
                                   make_cell("center", 0.0, 0.0, CellRole::Normal),
                                   make_cell("out", pitch, 0.0, CellRole::Output)});
    }
    if (name == "inv2") {
        // Output sits diagonally off the driver's corner.
        return Layout("inv2", {make_cell("in", 0.0, 0.0, CellRole::Fixed),
                               make_cell("out", pitch, pitch, CellRole::Output)});
    }
    if (name == "inv3") {
        // A 45-degree cell half a pitch up bridges driver and output; the output is
        // horizontally adjacent to it.
        return Layout("inv3", {make_cell("in", 0.0, 0.0, CellRole::Fixed),
                               make_cell("rot", pitch, pitch / 2.0, CellRole::Normal, 45),
                               make_cell("out", 2.0 * pitch, 0.0, CellRole::Output)});
    }
    throw LayoutError("unknown builtin layout '" + std::string(name) + "'");
}

Layout displace_cell(const Layout& layout, std::string_view id, double new_gap, Point axis) {
    if (!(new_gap > 0.0)) {
        throw LayoutError("gap must be positive (a zero or negative gap makes cells overlap)");
    }
    const auto index = layout.find(id);
    if (!index) throw LayoutError("unknown cell id '" + std::string(id) + "'");
    if (axis.x == 0.0 && axis.y == 0.0) throw LayoutError("displacement axis must be non-zero");
    const auto prev = layout.previous_neighbor(*index);
    if (!prev) throw LayoutError("cell '" + std::string(id) + "' has no neighbour to measure a gap from");

    auto cells = layout.cells();
    Cell& target = cells[*index];
    const Cell& anchor = layout.cells()[*prev];
    const double half = (target.size + anchor.size) / 2.0;

    const auto place = [&](double component, double& coord, double anchor_coord, const char* label) {
        if (component == 0.0) return;
        double direction = coord - anchor_coord;
        if (direction == 0.0) {
            throw LayoutError("cell '" + target.id + "' is aligned with its neighbour on the " + label + " axis");
        }
        // Moving along `axis` only; the side of the neighbour is preserved.
        coord = anchor_coord + std::copysign(half + new_gap, direction);
    };
    place(axis.x, target.center.x, anchor.center.x, "x");
    place(axis.y, target.center.y, anchor.center.y, "y");

    return Layout(layout.name(), std::move(cells), layout.constants_mode());
}

}  // namespace qcasim
