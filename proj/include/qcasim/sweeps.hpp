#pragma once

// Temperature and output-gap sweeps, reference tables and CSV emission.

#include "qcasim/engines.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcasim {

/// An engine or geometry failure at one sweep point. `value()` is the swept value.
class SweepError : public std::runtime_error {
public:
    SweepError(const std::string& what, double value) : std::runtime_error(what), value_(value) {}
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    double value_;
};

enum class SweepKind { Temperature, Gap };

struct SweepRow {
    double value = 0.0;
    std::string cell_id;
    double polarization = 0.0;              // magnitude
    std::optional<double> kink_energy;      // J, gap sweeps only
};

struct SweepResult {
    SweepKind kind = SweepKind::Temperature;
    std::string layout_name;
    std::string engine;
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<SweepRow> rows;

    [[nodiscard]] std::string_view variable() const noexcept;
    [[nodiscard]] std::string_view unit() const noexcept;
};

/// Parameter snapshot as ordered key/value text, used for CSV comment headers.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> parameter_snapshot(const EngineConfig& config);

/// Temperature grid of the published temperature table (15 points).
[[nodiscard]] std::vector<double> table1_temperatures();
/// Gap grid of the published displacement tables (0.5 .. 3.0 nm).
[[nodiscard]] std::vector<double> table2_gaps();

/// Coherence-engine run per temperature; reports |P| of the single output cell.
/// Rows come back sorted by the swept value whatever the grid order.
/// `threads` = 0 uses the hardware concurrency.
[[nodiscard]] SweepResult sweep_temperature(const Layout& layout, const std::vector<double>& temperatures,
                                            const EngineConfig& config, unsigned threads = 1);

/// Axis along which `index` is separated from its previous neighbour: each component
/// is the sign of the centre offset where the boxes are disjoint on that axis.
[[nodiscard]] Point separation_axis(const Layout& layout, std::size_t index);

/// Displaces `output_id` to each gap, rebuilds the kink matrix and reruns the engine.
/// Reports |P| of the output and its kink energy with its previous neighbour.
[[nodiscard]] SweepResult sweep_gap(const Layout& layout, std::string_view output_id, const std::vector<double>& gaps,
                                    const EngineConfig& config, unsigned threads = 1,
                                    std::optional<Point> axis = std::nullopt);

/// Writes `# key=value` snapshot lines followed by the CSV header and rows.
void emit_csv(const SweepResult& result, std::ostream& out);

/// A published table: first column is the swept value, others are named columns.
struct ReferenceTable {
    std::string identifier;
    std::vector<std::string> columns;                 // header, including the first column
    std::vector<std::vector<std::string>> text;       // cells exactly as stored
    std::vector<std::vector<double>> values;          // parsed cells

    [[nodiscard]] std::size_t rows() const noexcept { return values.size(); }
    [[nodiscard]] std::size_t column_index(std::string_view name) const;
    [[nodiscard]] std::vector<double> column(std::string_view name) const;
};

/// Parses reference CSV text; validates header and row count for known identifiers.
[[nodiscard]] ReferenceTable parse_reference_table(std::string_view identifier, std::string_view csv);
/// Loads `<data_dir>/<identifier>.csv`.
[[nodiscard]] ReferenceTable load_reference_table(std::string_view identifier,
                                                  const std::string& data_dir = QCASIM_DATA_DIR);

struct ComparisonRow {
    double value = 0.0;
    double simulated = 0.0;
    double reference = 0.0;
    double abs_diff = 0.0;
    double rel_diff = 0.0;
};

struct ComparisonReport {
    std::string column;
    std::vector<ComparisonRow> rows;
    double spearman = 0.0;
};

/// Spearman rank correlation with average ranks for ties. NaN when either side is
/// constant.
[[nodiscard]] double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

/// Pairs the sweep with a reference column row by row. Columns ending in `_Ek_J`
/// compare against |kink energy|, others against |P|.
[[nodiscard]] ComparisonReport compare_to_reference(const SweepResult& result, const ReferenceTable& ref,
                                                    std::string_view column);

void emit_comparison_csv(const ComparisonReport& report, std::ostream& out);

/// "%.5e": six significant digits in scientific notation.
[[nodiscard]] std::string format_sci(double value);

}  // namespace qcasim
