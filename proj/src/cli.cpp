#include "qcasim/cli.hpp"

#include "qcasim/sweeps.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace qcasim {

namespace {

// Usage problems detected after CLI11 parsing (bad numbers, bad enum values).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One physical override flag: name, help text, and where it lands in the config.
struct Override {
    std::string flag;
    std::string help;
    std::function<void(EngineConfig&, double)> apply;
};

const std::vector<Override>& overrides() {
    static const std::vector<Override> list{
        {"--temperature", "Temperature (K)", [](EngineConfig& c, double v) { c.coherence.temperature = v; }},
        {"--relaxation-time", "Relaxation time (s)", [](EngineConfig& c, double v) { c.coherence.relaxation_time = v; }},
        {"--time-step", "Integration time step (s)", [](EngineConfig& c, double v) { c.coherence.time_step = v; }},
        {"--total-time", "Total simulation time (s)", [](EngineConfig& c, double v) { c.coherence.total_time = v; }},
        {"--clock-high", "Clock high (J)", [](EngineConfig& c, double v) { c.coherence.clock_high = v; }},
        {"--clock-low", "Clock low (J)", [](EngineConfig& c, double v) { c.coherence.clock_low = v; }},
        {"--clock-shift", "Clock shift (J)", [](EngineConfig& c, double v) { c.coherence.clock_shift = v; }},
        {"--amplitude-factor", "Clock amplitude factor", [](EngineConfig& c, double v) { c.coherence.clock_amplitude_factor = v; }},
        {"--radius", "Radius of effect (nm)",
         [](EngineConfig& c, double v) {
             c.coherence.radius_of_effect = v;
             c.bistable.radius_of_effect = v;
         }},
        {"--layer-separation", "Layer separation (nm), stored only", [](EngineConfig& c, double v) { c.coherence.layer_separation = v; }},
        {"--gamma", "Bistable tunnelling energy (J)", [](EngineConfig& c, double v) { c.bistable.gamma = v; }},
        {"--tolerance", "Bistable convergence tolerance", [](EngineConfig& c, double v) { c.bistable.convergence_tolerance = v; }},
    };
    return list;
}

struct Options {
    std::string layout;
    std::string engine;
    std::string constants;
    std::string out;
    std::string grid;
    std::string gap = "2";
    std::string output_cell;
    std::string function;
    std::string reference;
    std::string data_dir = QCASIM_DATA_DIR;
    std::vector<std::string> drives;
    unsigned threads = 1;
    int stride = 100;
    int periods = 1;
    int max_iterations = 10000;
    bool seedless = false;
    std::map<std::string, std::string> raw_overrides;
};

double parse_number(const std::string& flag, const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (text.empty() || end != begin + text.size() || !std::isfinite(v)) {
        throw UsageError(flag + ": expected a number, got '" + text + "'");
    }
    return v;
}

std::string fmt_default(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

struct Prepared {
    Layout layout;
    EngineConfig config;
    std::vector<std::string> snapshot;  // comment lines without the leading "# "
};

Layout load_layout(const std::string& source, double gap) {
    if (source.empty()) throw UsageError("--layout is required");
    if (source.rfind("builtin:", 0) == 0) return builtin_layout(source.substr(8), gap);
    std::ifstream in(source, std::ios::binary);
    if (!in) throw LayoutError("cannot open layout file '" + source + "': file not found or unreadable");
    std::ostringstream buf;
    buf << in.rdbuf();
    auto name = source;
    if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    return parse_layout(buf.str(), name);
}

// Converts every flag before any computation so usage errors never follow partial work.
Prepared prepare(const std::string& command, const Options& o, EngineKind default_engine, bool needs_layout = true) {
    EngineConfig config;
    config.engine = default_engine;
    if (!o.engine.empty()) {
        const auto e = parse_engine(o.engine);
        if (!e) throw UsageError("--engine must be bistable or coherence");
        config.engine = *e;
    }
    std::optional<ConstantsMode> mode;
    if (!o.constants.empty()) {
        mode = parse_constants_mode(o.constants);
        if (!mode) throw UsageError("--constants must be paper or codata");
    }
    std::vector<std::pair<std::string, double>> values;
    for (const auto& [flag, text] : o.raw_overrides) values.emplace_back(flag, parse_number(flag, text));
    const double gap = parse_number("--gap", o.gap);

    for (const auto& [flag, value] : values) {
        for (const auto& ov : overrides()) {
            if (ov.flag == flag) ov.apply(config, value);
        }
    }
    config.coherence.record_stride = o.stride;
    config.coherence.clock_periods = o.periods;
    config.bistable.max_iterations = o.max_iterations;
    config.coherence.validate();
    config.bistable.validate();

    Layout layout = needs_layout ? load_layout(o.layout, gap) : Layout("none", {});
    config.constants = PhysicalConstants::for_mode(mode ? *mode : layout.constants_mode());

    std::vector<std::string> snapshot{"qcasim " + command, "layout=" + (o.layout.empty() ? "none" : o.layout)};
    if (o.layout.rfind("builtin:", 0) == 0) snapshot.push_back("gap_nm=" + format_sci(gap));
    for (const auto& [k, v] : parameter_snapshot(config)) snapshot.push_back(k + "=" + v);
    for (const auto& [flag, text] : o.raw_overrides) snapshot.push_back("override " + flag.substr(2) + "=" + text);
    return Prepared{std::move(layout), config, std::move(snapshot)};
}

void write_snapshot(const std::vector<std::string>& lines, std::ostream& out) {
    for (const auto& l : lines) out << "# " << l << '\n';
}

Drives parse_drives(const std::vector<std::string>& specs) {
    Drives drives;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--drive expects ID=VALUE, got '" + s + "'");
        drives[s.substr(0, eq)] = parse_number("--drive", s.substr(eq + 1));
    }
    return drives;
}

std::vector<double> parse_grid(const std::string& grid, const std::string& fallback) {
    const auto g = grid.empty() ? fallback : grid;
    if (g == "table1") return table1_temperatures();
    if (g == "table2" || g == "table3") return table2_gaps();
    std::vector<double> out;
    std::stringstream ss(g);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number("--grid", item));
    if (out.empty()) throw UsageError("--grid is empty");
    return out;
}

std::string output_cell_id(const Layout& layout, const std::string& requested) {
    if (!requested.empty()) {
        (void)layout.at(requested);
        return requested;
    }
    const auto outs = layout.indices_with_role(CellRole::Output);
    if (outs.size() != 1) throw LayoutError("layout needs exactly one output cell (or pass --output-cell)");
    return layout.cells()[outs.front()].id;
}

std::string cmd_layouts(const Options& o) {
    std::ostringstream out;
    if (o.layout.empty()) {
        for (const auto& name : builtin_layout_names()) out << "builtin:" << name << '\n';
        return out.str();
    }
    return serialize_layout(load_layout(o.layout, parse_number("--gap", o.gap)));
}

std::string cmd_kink(const Options& o) {
    auto p = prepare("kink", o, EngineKind::Bistable);
    const auto kink = kink_matrix(p.layout, p.config.radius_of_effect(), p.config.constants);
    std::ostringstream out;
    write_snapshot(p.snapshot, out);
    out << "cell_i,cell_j,kink_energy_J\n";
    for (const auto& [a, b, e] : kink_pairs(p.layout, kink)) out << a << ',' << b << ',' << format_sci(e) << '\n';
    return out.str();
}

std::string cmd_simulate(const Options& o) {
    auto p = prepare("simulate", o, EngineKind::Bistable);
    const auto drives = parse_drives(o.drives);
    const auto kink = kink_matrix(p.layout, p.config.radius_of_effect(), p.config.constants);
    std::ostringstream out;
    write_snapshot(p.snapshot, out);
    if (p.config.engine == EngineKind::Bistable) {
        const auto result = bistable_relax(p.layout, kink, p.config.bistable, drives);
        out << "# iterations=" << result.iterations << '\n';
        out << "cell_id,role,polarization\n";
        for (std::size_t i = 0; i < p.layout.size(); ++i) {
            const auto& c = p.layout.cells()[i];
            out << c.id << ',' << to_string(c.role) << ',' << format_sci(result.polarization[i]) << '\n';
        }
    } else {
        const auto trace = simulate_coherence(p.layout, kink, p.config.coherence, drives, p.config.constants);
        for (std::size_t i = 0; i < trace.cell_ids.size(); ++i) {
            out << "# hold_polarization " << trace.cell_ids[i] << '=' << format_sci(trace.hold_polarization[i]) << '\n';
        }
        write_trace_csv(trace, out);
    }
    return out.str();
}

LogicFunction infer_function(const Options& o, const Layout& layout) {
    if (!o.function.empty()) {
        const auto fn = parse_logic_function(o.function);
        if (!fn) throw UsageError("--function must be buffer, inverter, majority, and or or");
        return *fn;
    }
    const auto& n = layout.name();
    if (n == "inv2" || n == "inv3") return LogicFunction::Inverter;
    if (n == "majority") return LogicFunction::Majority;
    if (n.rfind("wire", 0) == 0) return LogicFunction::Buffer;
    throw UsageError("--function is required for layout '" + n + "'");
}

std::string cmd_truth(const Options& o, bool& all_pass) {
    auto p = prepare("truth", o, EngineKind::Bistable);
    const auto fn = infer_function(o, p.layout);
    const auto report = truth_table_check(p.layout, fn, p.config);
    std::ostringstream out;
    write_snapshot(p.snapshot, out);
    out << "# function=" << to_string(fn) << '\n';
    for (const auto& id : report.input_ids) out << id << ',';
    out << "expected,polarization,pass\n";
    for (const auto& row : report.rows) {
        for (bool b : row.inputs) out << (b ? 1 : 0) << ',';
        out << (row.expected ? 1 : 0) << ',' << format_sci(row.polarization) << ','
            << (row.pass ? "pass" : (row.indeterminate ? "indeterminate" : "fail")) << '\n';
    }
    all_pass = report.all_pass();
    return out.str();
}

std::string finish_sweep(const Options& o, const Prepared& p, SweepResult result, const std::string& default_table) {
    std::ostringstream out;
    write_snapshot(p.snapshot, out);
    result.parameters.clear();  // already part of the snapshot
    if (o.reference.empty()) {
        emit_csv(result, out);
        return out.str();
    }
    std::string table = default_table;
    if (result.kind == SweepKind::Gap) {
        table = o.reference.size() > 5 && o.reference.substr(o.reference.size() - 5) == "_Ek_J" ? "table3" : "table2";
    }
    const auto ref = load_reference_table(table, o.data_dir);
    out << "# reference=" << table << '\n';
    emit_comparison_csv(compare_to_reference(result, ref, o.reference), out);
    return out.str();
}

std::string cmd_sweep_temp(const Options& o) {
    auto p = prepare("sweep-temp", o, EngineKind::Coherence);
    if (p.config.engine != EngineKind::Coherence) throw UsageError("sweep-temp requires --engine coherence");
    const auto grid = parse_grid(o.grid, "table1");
    (void)output_cell_id(p.layout, o.output_cell);
    return finish_sweep(o, p, sweep_temperature(p.layout, grid, p.config, o.threads), "table1");
}

std::string cmd_sweep_gap(const Options& o) {
    auto p = prepare("sweep-gap", o, EngineKind::Coherence);
    const auto grid = parse_grid(o.grid, "table2");
    const auto id = output_cell_id(p.layout, o.output_cell);
    return finish_sweep(o, p, sweep_gap(p.layout, id, grid, p.config, o.threads), "table2");
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--layout", o.layout, "Layout source: builtin:<name> or a .qcl path");
    sub->add_option("--engine", o.engine, "Engine: bistable|coherence");
    sub->add_option("--constants", o.constants, "Physical constants: paper|codata (default: layout's, else paper)");
    sub->add_option("--out", o.out, "Write output to PATH instead of stdout");
    sub->add_option("--grid", o.grid, "Sweep grid: table1|table2|comma-separated list");
    sub->add_option("--gap", o.gap, "Edge gap for builtin layouts (nm)")->default_str("2");
    sub->add_option("--threads", o.threads, "Worker threads for sweeps (0 = all cores)")->default_str("1");
    sub->add_option("--stride", o.stride, "Record every N coherence steps")->default_str("100");
    sub->add_option("--clock-periods", o.periods, "Clock periods per run")->default_str("1");
    sub->add_option("--max-iterations", o.max_iterations, "Bistable iteration cap")->default_str("10000");
    sub->add_option("--drive", o.drives, "Drive value ID=VALUE (repeatable)");
    sub->add_option("--output-cell", o.output_cell, "Reported cell for sweeps (default: the output cell)");
    sub->add_option("--function", o.function, "Truth function: buffer|inverter|majority|and|or");
    sub->add_option("--reference", o.reference, "Compare a sweep against a reference column (e.g. inv3_P)");
    sub->add_option("--data-dir", o.data_dir, "Directory with table1.csv..table3.csv")->default_str(QCASIM_DATA_DIR);
    sub->add_flag("--seedless", o.seedless, "Accepted for scripting; every run is deterministic");

    const CoherenceParams c;
    const BistableParams b;
    const std::map<std::string, std::string> defaults{
        {"--temperature", fmt_default("%g", c.temperature)},
        {"--relaxation-time", fmt_default("%e", c.relaxation_time)},
        {"--time-step", fmt_default("%e", c.time_step)},
        {"--total-time", fmt_default("%e", c.total_time)},
        {"--clock-high", fmt_default("%e", c.clock_high)},
        {"--clock-low", fmt_default("%e", c.clock_low)},
        {"--clock-shift", fmt_default("%e", c.clock_shift)},
        {"--amplitude-factor", fmt_default("%f", c.clock_amplitude_factor)},
        {"--radius", fmt_default("%f", c.radius_of_effect)},
        {"--layer-separation", fmt_default("%f", c.layer_separation)},
        {"--gamma", fmt_default("%e", b.gamma)},
        {"--tolerance", fmt_default("%e", b.convergence_tolerance)},
    };
    for (const auto& ov : overrides()) {
        const auto flag = ov.flag;
        sub->add_option_function<std::string>(
               flag, [&o, flag](const std::string& v) { o.raw_overrides[flag] = v; }, ov.help)
            ->default_str(defaults.at(flag));
    }
    sub->footer(coherence_defaults_text());
}

}  // namespace

std::string coherence_defaults_text() {
    const CoherenceParams c;
    std::ostringstream s;
    s << "Coherence vector defaults:\n"
      << "  Temperature: " << fmt_default("%g", c.temperature) << " K\n"
      << "  Relaxation Time: " << fmt_default("%e", c.relaxation_time) << " s\n"
      << "  Time Step: " << fmt_default("%e", c.time_step) << " s\n"
      << "  Total Simulation Time: " << fmt_default("%e", c.total_time) << " s\n"
      << "  Clock High: " << fmt_default("%e", c.clock_high) << " J\n"
      << "  Clock Low: " << fmt_default("%e", c.clock_low) << " J\n"
      << "  Clock Shift: " << fmt_default("%e", c.clock_shift) << " J\n"
      << "  Clock Amplitude Factor: " << fmt_default("%f", c.clock_amplitude_factor) << "\n"
      << "  Radius of Effect: " << fmt_default("%f", c.radius_of_effect) << " nm\n"
      << "  Layer Separation: " << fmt_default("%f", c.layer_separation) << " nm\n";
    return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qcasim: QCA layout kink energies, polarization engines and sweeps"};
    app.require_subcommand(1);
    app.footer(coherence_defaults_text());

    Options o;
    struct Command {
        const char* name;
        const char* help;
    };
    const std::vector<Command> commands{
        {"kink", "Pairwise kink energies within the radius of effect"},
        {"simulate", "Run one engine on a layout"},
        {"truth", "Exhaustive truth table against a logic function"},
        {"sweep-temp", "Output polarization over a temperature grid (coherence engine)"},
        {"sweep-gap", "Output polarization and kink energy over output-cell gaps"},
        {"layouts", "List builtin layouts, or print one as .qcl"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, o);
        subs[c.name] = sub;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) command = name;
    }

    try {
        std::string text;
        bool truth_ok = true;
        if (command == "kink") text = cmd_kink(o);
        else if (command == "simulate") text = cmd_simulate(o);
        else if (command == "truth") text = cmd_truth(o, truth_ok);
        else if (command == "sweep-temp") text = cmd_sweep_temp(o);
        else if (command == "sweep-gap") text = cmd_sweep_gap(o);
        else text = cmd_layouts(o);

        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream file(o.out, std::ios::binary);
            if (!file || !(file << text)) throw LayoutError("cannot write '" + o.out + "'");
        }
        if (!truth_ok) {
            err << "error: truth table has failing rows\n";
            return 1;
        }
        return 0;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace qcasim
