#include "qcasim/engines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace qcasim {

void CoherenceParams::validate() const {
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(relaxation_time) || !positive(time_step) || !positive(total_time)) {
        throw ParameterError("relaxation time, time step and total time must be positive");
    }
    if (!(time_step < relaxation_time)) throw ParameterError("time step must be smaller than the relaxation time");
    if (time_step > total_time) throw ParameterError("time step exceeds total simulation time");
    if (!(clock_low <= clock_high)) throw ParameterError("clock low must not exceed clock high");
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ParameterError("temperature must be >= 0");
    if (!std::isfinite(clock_shift) || !std::isfinite(clock_amplitude_factor)) {
        throw ParameterError("clock shift and amplitude factor must be finite");
    }
    if (!positive(radius_of_effect)) throw ParameterError("radius of effect must be positive");
    if (clock_periods < 1) throw ParameterError("clock periods must be >= 1");
    if (record_stride < 1) throw ParameterError("record stride must be >= 1");
}

long long CoherenceParams::step_count() const { return std::llround(total_time / time_step); }

void BistableParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
    if (!(convergence_tolerance > 0.0)) throw ParameterError("convergence tolerance must be positive");
    if (max_iterations < 1) throw ParameterError("max iterations must be >= 1");
    if (!(radius_of_effect > 0.0)) throw ParameterError("radius of effect must be positive");
}

std::vector<std::optional<double>> resolve_drives(const Layout& layout, const Drives& drives) {
    const auto& cells = layout.cells();
    std::vector<std::optional<double>> out(cells.size());
    for (const auto& [id, value] : drives) {
        const auto index = layout.find(id);
        if (!index) throw LayoutError("drive given for unknown cell '" + id + "'");
        const auto role = cells[*index].role;
        if (role != CellRole::Input && role != CellRole::Fixed) {
            throw LayoutError("cell '" + id + "' is not an input or fixed cell");
        }
        if (!(std::abs(value) <= 1.0)) throw ParameterError("drive for '" + id + "' must lie in [-1, 1]");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto it = drives.find(cells[i].id);
        if (cells[i].role == CellRole::Input) {
            if (it == drives.end()) throw LayoutError("input cell '" + cells[i].id + "' has no drive value");
            out[i] = it->second;
        } else if (cells[i].role == CellRole::Fixed) {
            out[i] = it != drives.end() ? it->second : *cells[i].fixed_polarization;
        }
    }
    return out;
}

double clock_gamma(int zone, double t, const CoherenceParams& params) {
    if (zone < 0 || zone > 3) throw ParameterError("clock zone must be in 0..3");
    const double amplitude = params.clock_amplitude_factor * (params.clock_high - params.clock_low) / 2.0;
    const double phase = 2.0 * std::numbers::pi * params.clock_periods * t / params.total_time -
                         zone * std::numbers::pi / 2.0;
    return std::clamp(params.clock_shift + amplitude * std::cos(phase), params.clock_low, params.clock_high);
}

double local_field(std::size_t cell, const std::vector<double>& polarization, const KinkMatrix& kink) {
    double field = 0.0;
    for (const auto& e : kink.neighbors(cell)) field += e.energy * polarization[e.neighbor];
    return field;
}

double bistable_response(double x) noexcept { return x / std::sqrt(1.0 + x * x); }

BistableResult bistable_relax(const Layout& layout, const KinkMatrix& kink, const BistableParams& params,
                              const Drives& drives) {
    params.validate();
    if (kink.cell_count() != layout.size()) throw ParameterError("kink matrix does not match layout");
    const auto driven = resolve_drives(layout, drives);

    BistableResult result;
    result.polarization.assign(layout.size(), 0.0);
    for (std::size_t i = 0; i < driven.size(); ++i) {
        if (driven[i]) result.polarization[i] = *driven[i];
    }

    const double scale = 1.0 / (2.0 * params.gamma);
    std::size_t worst = 0;
    for (int iter = 1; iter <= params.max_iterations; ++iter) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < driven.size(); ++i) {
            if (driven[i]) continue;
            const double next = bistable_response(local_field(i, result.polarization, kink) * scale);
            const double change = std::abs(next - result.polarization[i]);
            if (change > max_change) {
                max_change = change;
                worst = i;
            }
            result.polarization[i] = next;
        }
        result.iterations = iter;
        if (max_change < params.convergence_tolerance) return result;
    }
    const auto& id = layout.cells()[worst].id;
    throw ConvergenceError("bistable relaxation did not converge in " + std::to_string(params.max_iterations) +
                               " iterations (worst cell '" + id + "')",
                           id);
}

double steady_state_polarization(double field, double gamma, double temperature,
                                 const PhysicalConstants& constants) {
    if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
    const double omega = std::sqrt(field * field + 4.0 * gamma * gamma);
    if (!(omega > 0.0)) throw DomainError("steady state undefined for zero field and zero gamma");
    const double thermal = temperature == 0.0 ? 1.0 : std::tanh(omega / (2.0 * constants.boltzmann_k * temperature));
    return field / omega * thermal;
}

namespace {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

// Thermal target of the coherence vector for precession vector components
// (-2 gamma, 0, E), all in joules.
Vec3 thermal_target(double gamma, double field, double temperature, const PhysicalConstants& constants) {
    const double gx = -2.0 * gamma;
    const double omega = std::sqrt(gx * gx + field * field);
    if (omega == 0.0) return {};
    const double thermal = temperature == 0.0 ? 1.0 : std::tanh(omega / (2.0 * constants.boltzmann_k * temperature));
    return {thermal * gx / omega, 0.0, thermal * field / omega};
}

// Step index of the centre of the last low-barrier window of `zone`.
long long hold_step(int zone, const CoherenceParams& p, long long steps) {
    const double periods = p.clock_periods;
    const double k = std::floor(periods - 0.5 - zone / 4.0);
    const double t = p.total_time * (0.5 + zone / 4.0 + k) / periods;
    return std::clamp(std::llround(t / p.time_step), 0LL, steps);
}

}  // namespace

SimulationTrace simulate_coherence(const Layout& layout, const KinkMatrix& kink, const CoherenceParams& params,
                                   const Drives& drives, const PhysicalConstants& constants) {
    params.validate();
    if (kink.cell_count() != layout.size()) throw ParameterError("kink matrix does not match layout");
    SimulationTrace trace;
    if (layout.empty()) return trace;

    const auto& cells = layout.cells();
    const std::size_t n = cells.size();
    const auto driven = resolve_drives(layout, drives);
    const long long steps = params.step_count();
    const double dt = params.time_step;
    const double decay = dt / params.relaxation_time;
    const double dt_over_hbar = dt / constants.hbar;
    constexpr double kNormLimit = 1.0 + 1e-6;

    for (const auto& c : cells) trace.cell_ids.push_back(c.id);

    std::vector<long long> hold_at(n);
    for (std::size_t i = 0; i < n; ++i) hold_at[i] = hold_step(cells[i].clock_zone, params, steps);
    trace.hold_polarization.assign(n, 0.0);

    std::vector<double> pol(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (driven[i]) pol[i] = *driven[i];
    }

    std::array<double, 4> gamma{};
    const auto update_clock = [&](double t) {
        for (int z = 0; z < 4; ++z) gamma[z] = clock_gamma(z, t, params);
    };

    // Start each evolving cell at its thermal target for the initial clock and field.
    update_clock(0.0);
    std::vector<Vec3> lambda(n);
    std::vector<double> fields(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (driven[i]) continue;
        lambda[i] = thermal_target(gamma[cells[i].clock_zone], local_field(i, pol, kink), params.temperature, constants);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!driven[i]) pol[i] = lambda[i].z;
    }

    const auto record = [&](long long step) {
        trace.time.push_back(static_cast<double>(step) * dt);
        trace.clock.push_back(gamma);
        trace.polarization.push_back(pol);
    };
    const auto capture_hold = [&](long long step) {
        for (std::size_t i = 0; i < n; ++i) {
            if (hold_at[i] == step) trace.hold_polarization[i] = pol[i];
        }
    };

    record(0);
    capture_hold(0);

    for (long long step = 1; step <= steps; ++step) {
        // Explicit Euler from the state at t_{step-1}; all cells see the same snapshot.
        for (std::size_t i = 0; i < n; ++i) {
            if (!driven[i]) fields[i] = local_field(i, pol, kink);
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (driven[i]) continue;
            const double g = gamma[cells[i].clock_zone];
            const Vec3 target = thermal_target(g, fields[i], params.temperature, constants);
            const double gx = -2.0 * g * dt_over_hbar;
            const double gz = fields[i] * dt_over_hbar;
            Vec3& l = lambda[i];
            // dt * (Gamma x lambda) with Gamma = (gx, 0, gz) / dt.
            const Vec3 rot{-gz * l.y, gz * l.x - gx * l.z, gx * l.y};
            l = Vec3{l.x + rot.x - decay * (l.x - target.x), l.y + rot.y - decay * (l.y - target.y),
                     l.z + rot.z - decay * (l.z - target.z)};
            const double norm = std::sqrt(l.x * l.x + l.y * l.y + l.z * l.z);
            trace.max_coherence_norm = std::max(trace.max_coherence_norm, norm);
            if (norm > kNormLimit) {
                throw IntegrationError("coherence vector of cell '" + cells[i].id + "' left the unit ball (|lambda| = " +
                                       std::to_string(norm) + "); reduce the time step");
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!driven[i]) pol[i] = lambda[i].z;
        }
        update_clock(static_cast<double>(step) * dt);
        if (step % params.record_stride == 0 || step == steps) record(step);
        capture_hold(step);
    }
    trace.final_polarization = pol;
    return trace;
}

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
    out << "time_s,clock0_J,clock1_J,clock2_J,clock3_J";
    for (const auto& id : trace.cell_ids) out << ',' << id << "_P";
    out << '\n';
    char buf[32];
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.5e", v);
        out << buf;
    };
    for (std::size_t s = 0; s < trace.time.size(); ++s) {
        put(trace.time[s]);
        for (double g : trace.clock[s]) {
            out << ',';
            put(g);
        }
        for (double p : trace.polarization[s]) {
            out << ',';
            put(p);
        }
        out << '\n';
    }
}

std::string_view to_string(EngineKind engine) noexcept {
    return engine == EngineKind::Bistable ? "bistable" : "coherence";
}

std::optional<EngineKind> parse_engine(std::string_view text) noexcept {
    if (text == "bistable") return EngineKind::Bistable;
    if (text == "coherence") return EngineKind::Coherence;
    return std::nullopt;
}

std::vector<double> run_engine(const Layout& layout, const KinkMatrix& kink, const EngineConfig& config,
                               const Drives& drives) {
    if (config.engine == EngineKind::Bistable) return bistable_relax(layout, kink, config.bistable, drives).polarization;
    return simulate_coherence(layout, kink, config.coherence, drives, config.constants).hold_polarization;
}

std::string_view to_string(LogicFunction fn) noexcept {
    switch (fn) {
        case LogicFunction::Buffer: return "buffer";
        case LogicFunction::Inverter: return "inverter";
        case LogicFunction::Majority: return "majority";
        case LogicFunction::And: return "and";
        case LogicFunction::Or: return "or";
    }
    return "buffer";
}

std::optional<LogicFunction> parse_logic_function(std::string_view text) noexcept {
    for (auto fn : {LogicFunction::Buffer, LogicFunction::Inverter, LogicFunction::Majority, LogicFunction::And,
                    LogicFunction::Or}) {
        if (text == to_string(fn)) return fn;
    }
    return std::nullopt;
}

bool evaluate(LogicFunction fn, const std::vector<bool>& inputs) {
    const auto ones = std::count(inputs.begin(), inputs.end(), true);
    const auto n = static_cast<long>(inputs.size());
    switch (fn) {
        case LogicFunction::Buffer:
        case LogicFunction::Inverter:
            if (n != 1) throw ParameterError(std::string(to_string(fn)) + " takes exactly one input");
            return fn == LogicFunction::Buffer ? inputs[0] : !inputs[0];
        case LogicFunction::Majority:
            if (n != 3) throw ParameterError("majority takes exactly three inputs");
            return ones >= 2;
        case LogicFunction::And:
            if (n < 1) throw ParameterError("and takes at least one input");
            return ones == n;
        case LogicFunction::Or:
            if (n < 1) throw ParameterError("or takes at least one input");
            return ones > 0;
    }
    return false;
}

std::size_t TruthReport::passed() const noexcept {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const TruthRow& r) { return r.pass; }));
}

TruthReport truth_table_check(const Layout& layout, LogicFunction fn, const EngineConfig& config,
                              std::vector<std::string> driven) {
    if (driven.empty()) {
        auto ids = layout.indices_with_role(CellRole::Input);
        if (ids.empty()) ids = layout.indices_with_role(CellRole::Fixed);
        for (auto i : ids) driven.push_back(layout.cells()[i].id);
    }
    if (driven.empty()) throw LayoutError("layout has no input cells");
    const auto outputs = layout.indices_with_role(CellRole::Output);
    if (outputs.size() != 1) throw LayoutError("truth table needs exactly one output cell");
    if (driven.size() > 16) throw LayoutError("too many inputs for an exhaustive truth table");

    const auto kink = kink_matrix(layout, config.radius_of_effect(), config.constants);
    TruthReport report;
    report.input_ids = driven;
    report.output_id = layout.cells()[outputs.front()].id;

    const std::size_t n = driven.size();
    for (std::size_t combo = 0; combo < (std::size_t{1} << n); ++combo) {
        TruthRow row;
        Drives drives;
        for (std::size_t k = 0; k < n; ++k) {
            const bool bit = (combo >> (n - 1 - k)) & 1U;
            row.inputs.push_back(bit);
            drives[driven[k]] = bit ? 1.0 : -1.0;
        }
        row.expected = evaluate(fn, row.inputs);
        row.polarization = run_engine(layout, kink, config, drives)[outputs.front()];
        row.indeterminate = std::abs(row.polarization) < kIndeterminatePolarization;
        row.pass = !row.indeterminate && ((row.polarization > 0.0) == row.expected);
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace qcasim
