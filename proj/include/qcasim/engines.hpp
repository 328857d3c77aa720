#pragma once

// Polarization engines: bistable fixed-point relaxation and clocked coherence-vector
// integration.

#include "qcasim/electrostatics.hpp"
#include "qcasim/geometry.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcasim {

/// Engine parameters that fail their invariants.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bistable iteration did not settle within max_iterations.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::string worst_cell)
        : std::runtime_error(what), worst_cell_(std::move(worst_cell)) {}
    [[nodiscard]] const std::string& worst_cell() const noexcept { return worst_cell_; }

private:
    std::string worst_cell_;
};

/// The explicit integrator left the unit ball.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CoherenceParams {
    double temperature = 1.0;               // K
    double relaxation_time = 1.0e-15;       // s
    double time_step = 1.0e-16;             // s
    double total_time = 7.0e-11;            // s
    double clock_high = 9.8e-22;            // J
    double clock_low = 3.8e-23;             // J
    double clock_shift = 0.0;               // J
    double clock_amplitude_factor = 2.0;
    double radius_of_effect = 80.0;         // nm
    double layer_separation = 11.5;         // nm, stored only
    int clock_periods = 1;
    int record_stride = 100;

    void validate() const;
    [[nodiscard]] long long step_count() const;
};

struct BistableParams {
    double gamma = 9.8e-22;                 // J
    double convergence_tolerance = 1e-9;
    int max_iterations = 10000;
    double radius_of_effect = 80.0;         // nm

    void validate() const;
};

/// Drive values keyed by cell id. Input cells must be present; fixed cells fall back
/// to their stored polarization.
using Drives = std::map<std::string, double, std::less<>>;

/// Per-cell drive value, or nullopt for cells the engine evolves.
[[nodiscard]] std::vector<std::optional<double>> resolve_drives(const Layout& layout, const Drives& drives);

/// Tunnelling energy of `zone` at time `t` for the cosine four-phase clock.
[[nodiscard]] double clock_gamma(int zone, double t, const CoherenceParams& params);

/// Weighted neighbourhood field sum_j E_kink(i,j) P_j, summed in ascending index order.
[[nodiscard]] double local_field(std::size_t cell, const std::vector<double>& polarization, const KinkMatrix& kink);

/// x / sqrt(1 + x^2)
[[nodiscard]] double bistable_response(double x) noexcept;

struct BistableResult {
    std::vector<double> polarization;
    int iterations = 0;
};

[[nodiscard]] BistableResult bistable_relax(const Layout& layout, const KinkMatrix& kink, const BistableParams& params,
                                            const Drives& drives);

/// Thermal steady-state polarization (E/W) tanh(W / 2 k_B T), W = sqrt(E^2 + 4 gamma^2).
[[nodiscard]] double steady_state_polarization(double field, double gamma, double temperature,
                                               const PhysicalConstants& constants);

struct SimulationTrace {
    std::vector<std::string> cell_ids;
    std::vector<double> time;                          // s
    std::vector<std::array<double, 4>> clock;          // J, one entry per zone
    std::vector<std::vector<double>> polarization;     // [sample][cell]
    std::vector<double> final_polarization;
    /// Polarization at the centre of the cell's last low-barrier (hold) window.
    std::vector<double> hold_polarization;
    double max_coherence_norm = 0.0;

    [[nodiscard]] bool empty() const noexcept { return cell_ids.empty(); }
};

[[nodiscard]] SimulationTrace simulate_coherence(const Layout& layout, const KinkMatrix& kink,
                                                 const CoherenceParams& params, const Drives& drives,
                                                 const PhysicalConstants& constants);

/// CSV: time_s,clock0_J..clock3_J,<id>_P...
void write_trace_csv(const SimulationTrace& trace, std::ostream& out);

enum class EngineKind { Bistable, Coherence };

[[nodiscard]] std::string_view to_string(EngineKind engine) noexcept;
[[nodiscard]] std::optional<EngineKind> parse_engine(std::string_view text) noexcept;

struct EngineConfig {
    EngineKind engine = EngineKind::Bistable;
    BistableParams bistable;
    CoherenceParams coherence;
    PhysicalConstants constants = PhysicalConstants::paper();

    [[nodiscard]] double radius_of_effect() const noexcept {
        return engine == EngineKind::Bistable ? bistable.radius_of_effect : coherence.radius_of_effect;
    }
};

/// Reported polarization per cell: the converged value for the bistable engine, the
/// hold-window value for the coherence engine.
[[nodiscard]] std::vector<double> run_engine(const Layout& layout, const KinkMatrix& kink, const EngineConfig& config,
                                             const Drives& drives);

enum class LogicFunction { Buffer, Inverter, Majority, And, Or };

[[nodiscard]] std::string_view to_string(LogicFunction fn) noexcept;
[[nodiscard]] std::optional<LogicFunction> parse_logic_function(std::string_view text) noexcept;
[[nodiscard]] bool evaluate(LogicFunction fn, const std::vector<bool>& inputs);

struct TruthRow {
    std::vector<bool> inputs;
    bool expected = false;
    double polarization = 0.0;
    bool indeterminate = false;
    bool pass = false;
};

struct TruthReport {
    std::vector<std::string> input_ids;
    std::string output_id;
    std::vector<TruthRow> rows;

    [[nodiscard]] std::size_t passed() const noexcept;
    [[nodiscard]] bool all_pass() const noexcept { return passed() == rows.size(); }
};

inline constexpr double kIndeterminatePolarization = 1e-6;

/// Runs every input combination and compares the sign of the output against `fn`.
/// `driven` defaults to the input cells, or to the fixed cells when there are none.
[[nodiscard]] TruthReport truth_table_check(const Layout& layout, LogicFunction fn, const EngineConfig& config,
                                            std::vector<std::string> driven = {});

}  // namespace qcasim
