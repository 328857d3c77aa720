#include "qcasim/sweeps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace qcasim {

std::string format_sci(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", value);
    return buf;
}

std::string_view SweepResult::variable() const noexcept {
    return kind == SweepKind::Temperature ? "temperature" : "gap";
}

std::string_view SweepResult::unit() const noexcept { return kind == SweepKind::Temperature ? "K" : "nm"; }

std::vector<std::pair<std::string, std::string>> parameter_snapshot(const EngineConfig& config) {
    const auto& c = config.coherence;
    const auto& b = config.bistable;
    std::vector<std::pair<std::string, std::string>> out{
        {"engine", std::string(to_string(config.engine))},
        {"constants", std::string(to_string(config.constants.mode))},
    };
    if (config.engine == EngineKind::Coherence) {
        out.insert(out.end(), {
                                  {"temperature_K", format_sci(c.temperature)},
                                  {"relaxation_time_s", format_sci(c.relaxation_time)},
                                  {"time_step_s", format_sci(c.time_step)},
                                  {"total_time_s", format_sci(c.total_time)},
                                  {"clock_high_J", format_sci(c.clock_high)},
                                  {"clock_low_J", format_sci(c.clock_low)},
                                  {"clock_shift_J", format_sci(c.clock_shift)},
                                  {"clock_amplitude_factor", format_sci(c.clock_amplitude_factor)},
                                  {"radius_of_effect_nm", format_sci(c.radius_of_effect)},
                                  {"layer_separation_nm", format_sci(c.layer_separation)},
                                  {"clock_periods", std::to_string(c.clock_periods)},
                              });
    } else {
        out.insert(out.end(), {
                                  {"gamma_J", format_sci(b.gamma)},
                                  {"convergence_tolerance", format_sci(b.convergence_tolerance)},
                                  {"max_iterations", std::to_string(b.max_iterations)},
                                  {"radius_of_effect_nm", format_sci(b.radius_of_effect)},
                              });
    }
    return out;
}

std::vector<double> table1_temperatures() { return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25, 30}; }

std::vector<double> table2_gaps() { return {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}; }

namespace {

// Runs job(i) for i in [0, count) over `threads` workers. Each slot is written by
// exactly one worker; the first failure in index order is rethrown.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::vector<std::exception_ptr> errors(count);
    const auto worker = [&](unsigned w) {
        for (std::size_t i = w; i < count; i += threads) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::size_t single_output(const Layout& layout) {
    const auto outputs = layout.indices_with_role(CellRole::Output);
    if (outputs.size() != 1) throw LayoutError("sweep needs exactly one output cell");
    return outputs.front();
}

// Sorted copy of a grid. Range checks are left to the per-point evaluation so the
// failure names the offending value.
std::vector<double> sorted_grid(std::vector<double> grid, const char* what) {
    for (double v : grid) {
        if (!std::isfinite(v)) throw ParameterError(std::string(what) + " grid values must be finite");
    }
    std::sort(grid.begin(), grid.end());
    if (std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
        throw ParameterError(std::string(what) + " grid contains duplicate values");
    }
    return grid;
}

std::string trimmed_number(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace

SweepResult sweep_temperature(const Layout& layout, const std::vector<double>& grid, const EngineConfig& config,
                              unsigned threads) {
    const auto temperatures = sorted_grid(grid, "temperature");
    const auto out = single_output(layout);
    const auto kink = kink_matrix(layout, config.coherence.radius_of_effect, config.constants);

    EngineConfig snapshot = config;
    snapshot.engine = EngineKind::Coherence;
    SweepResult result;
    result.kind = SweepKind::Temperature;
    result.layout_name = layout.name();
    result.engine = "coherence";
    result.parameters = parameter_snapshot(snapshot);
    result.rows.resize(temperatures.size());

    parallel_for(temperatures.size(), threads, [&](std::size_t i) {
        auto params = config.coherence;
        params.temperature = temperatures[i];
        try {
            const auto trace = simulate_coherence(layout, kink, params, {}, config.constants);
            result.rows[i] = SweepRow{temperatures[i], layout.cells()[out].id, std::abs(trace.hold_polarization[out]), {}};
        } catch (const std::exception& e) {
            throw SweepError("at temperature " + trimmed_number(temperatures[i]) + " K: " + e.what(), temperatures[i]);
        }
    });
    return result;
}

Point separation_axis(const Layout& layout, std::size_t index) {
    const auto prev = layout.previous_neighbor(index);
    if (!prev) throw LayoutError("cell has no neighbour");
    const auto& a = layout.cells()[index];
    const auto& b = layout.cells()[*prev];
    const double half = (a.size + b.size) / 2.0;
    const double dx = a.center.x - b.center.x;
    const double dy = a.center.y - b.center.y;
    Point axis;
    if (std::abs(dx) > half) axis.x = dx > 0 ? 1.0 : -1.0;
    if (std::abs(dy) > half) axis.y = dy > 0 ? 1.0 : -1.0;
    return axis;
}

SweepResult sweep_gap(const Layout& layout, std::string_view output_id, const std::vector<double>& grid,
                      const EngineConfig& config, unsigned threads, std::optional<Point> axis) {
    const auto gaps = sorted_grid(grid, "gap");
    const auto index = layout.find(output_id);
    if (!index) throw LayoutError("unknown cell id '" + std::string(output_id) + "'");
    const Point direction = axis ? *axis : separation_axis(layout, *index);

    SweepResult result;
    result.kind = SweepKind::Gap;
    result.layout_name = layout.name();
    result.engine = std::string(to_string(config.engine));
    result.parameters = parameter_snapshot(config);
    result.rows.resize(gaps.size());

    parallel_for(gaps.size(), threads, [&](std::size_t i) {
        try {
            const auto moved = displace_cell(layout, output_id, gaps[i], direction);
            const auto prev = moved.previous_neighbor(*index);
            const auto kink = kink_matrix(moved, config.radius_of_effect(), config.constants);
            const auto pol = run_engine(moved, kink, config, {});
            const double ek = kink_energy_pair(moved.cells()[*index], moved.cells()[*prev], config.constants);
            result.rows[i] = SweepRow{gaps[i], std::string(output_id), std::abs(pol[*index]), ek};
        } catch (const std::exception& e) {
            throw SweepError("at gap " + trimmed_number(gaps[i]) + " nm: " + e.what(), gaps[i]);
        }
    });
    return result;
}

void emit_csv(const SweepResult& result, std::ostream& out) {
    for (const auto& [key, value] : result.parameters) out << "# " << key << '=' << value << '\n';
    if (result.kind == SweepKind::Temperature) {
        out << "temperature_K,cell_id,polarization\n";
    } else {
        out << "gap_nm,cell_id,polarization,kink_energy_J\n";
    }
    for (const auto& row : result.rows) {
        out << format_sci(row.value) << ',' << row.cell_id << ',' << format_sci(row.polarization);
        if (result.kind == SweepKind::Gap) out << ',' << format_sci(row.kink_energy.value_or(0.0));
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Reference tables
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct TableShape {
    std::string_view identifier;
    std::vector<std::string> header;
    std::size_t rows;
};

const std::vector<TableShape>& known_tables() {
    static const std::vector<TableShape> shapes{
        {"table1", {"temperature_K", "inv2_P", "inv3_P"}, 15},
        {"table2", {"gap_nm", "inv2_P", "inv3_P"}, 6},
        {"table3", {"gap_nm", "inv2_Ek_J", "inv3_Ek_J"}, 6},
    };
    return shapes;
}

}  // namespace

std::size_t ReferenceTable::column_index(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ParameterError("reference table " + identifier + " has no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> ReferenceTable::column(std::string_view name) const {
    const auto c = column_index(name);
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(row[c]);
    return out;
}

ReferenceTable parse_reference_table(std::string_view identifier, std::string_view csv) {
    ReferenceTable table;
    table.identifier = std::string(identifier);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < csv.size()) {
        const auto nl = csv.find('\n', pos);
        const auto line = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? csv.size() : nl + 1;
        ++line_no;
        if (line.empty() || line == "\r" || line.front() == '#') continue;
        auto fields = split_csv_line(line);
        if (table.columns.empty()) {
            table.columns = std::move(fields);
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw ParameterError(table.identifier + " line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(table.columns.size()) + " fields");
        }
        std::vector<double> parsed;
        for (const auto& f : fields) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (f.empty() || end != f.c_str() + f.size()) {
                throw ParameterError(table.identifier + " line " + std::to_string(line_no) + ": bad number '" + f + "'");
            }
            parsed.push_back(v);
        }
        table.text.push_back(std::move(fields));
        table.values.push_back(std::move(parsed));
    }
    if (table.columns.empty()) throw ParameterError(table.identifier + ": missing header");
    for (const auto& shape : known_tables()) {
        if (shape.identifier != identifier) continue;
        if (table.columns != shape.header) throw ParameterError(table.identifier + ": unexpected header");
        if (table.rows() != shape.rows) {
            throw ParameterError(table.identifier + ": expected " + std::to_string(shape.rows) + " rows, found " +
                                 std::to_string(table.rows()));
        }
    }
    return table;
}

ReferenceTable load_reference_table(std::string_view identifier, const std::string& data_dir) {
    const auto path = data_dir + "/" + std::string(identifier) + ".csv";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open reference table '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_reference_table(identifier, buf.str());
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ParameterError("spearman: length mismatch");
    if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double mean = (static_cast<double>(a.size()) + 1.0) / 2.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - mean;
        const double db = rb[i] - mean;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

ComparisonReport compare_to_reference(const SweepResult& result, const ReferenceTable& ref, std::string_view column) {
    const auto c = ref.column_index(column);
    if (c == 0) throw ParameterError("cannot compare against the swept column");
    if (result.rows.size() != ref.rows()) {
        throw ParameterError("grid mismatch: sweep has " + std::to_string(result.rows.size()) + " rows, " +
                             ref.identifier + " has " + std::to_string(ref.rows()));
    }
    const bool energy = column.size() >= 5 && column.substr(column.size() - 5) == "_Ek_J";
    if (energy && result.kind != SweepKind::Gap) throw ParameterError("kink energy columns need a gap sweep");

    ComparisonReport report;
    report.column = std::string(column);
    std::vector<double> sim, refv;
    for (std::size_t i = 0; i < ref.rows(); ++i) {
        const auto& row = result.rows[i];
        const double grid = ref.values[i][0];
        if (std::abs(row.value - grid) > 1e-9 * std::max(1.0, std::abs(grid))) {
            throw ParameterError("grid mismatch at row " + std::to_string(i + 1) + ": " + trimmed_number(row.value) +
                                 " vs " + ref.text[i][0]);
        }
        ComparisonRow out;
        out.value = grid;
        out.simulated = energy ? std::abs(row.kink_energy.value_or(0.0)) : row.polarization;
        out.reference = ref.values[i][c];
        out.abs_diff = std::abs(out.simulated - out.reference);
        out.rel_diff = out.reference != 0.0 ? out.abs_diff / std::abs(out.reference) : 0.0;
        sim.push_back(out.simulated);
        refv.push_back(out.reference);
        report.rows.push_back(out);
    }
    report.spearman = spearman_correlation(sim, refv);
    return report;
}

void emit_comparison_csv(const ComparisonReport& report, std::ostream& out) {
    out << "# column=" << report.column << '\n';
    out << "# spearman=" << format_sci(report.spearman) << '\n';
    out << "value,simulated,reference,abs_diff,rel_diff\n";
    for (const auto& r : report.rows) {
        out << format_sci(r.value) << ',' << format_sci(r.simulated) << ',' << format_sci(r.reference) << ','
            << format_sci(r.abs_diff) << ',' << format_sci(r.rel_diff) << '\n';
    }
}

}  // namespace qcasim
