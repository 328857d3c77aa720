// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if
// any criterion fails. Every tolerance is fixed here.

#include "qcasim/cli.hpp"
#include "qcasim/sweeps.hpp"

#include "oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace qcasim;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& note) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok: " : "FAILED: ") + note);
    }
};

std::string sci(double v) { return format_sci(v); }

bool non_increasing(const std::vector<double>& v, double slack) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] + slack) return false;
    }
    return true;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i] < v[i - 1])) return false;
    }
    return true;
}

std::vector<double> polarizations(const SweepResult& r) {
    std::vector<double> out;
    for (const auto& row : r.rows) out.push_back(row.polarization);
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + sci(x);
    return s;
}

Outcome criterion_constant() {
    Outcome o;
    const auto c = PhysicalConstants::paper();
    for (double r_nm : {0.5, 1.0, 2.0, 3.0}) {
        const double r = r_nm * 1e-9;
        const double product = coulomb_pair(c.electron_charge, c.electron_charge, r, c) * r;
        const double rel = std::abs(product / 23.04e-29 - 1.0);
        o.check(rel < 1e-12, "r=" + sci(r_nm) + " nm: U*r=" + sci(product) + " rel=" + sci(rel));
    }
    return o;
}

Outcome criterion_oracle() {
    Outcome o;
    std::mt19937_64 rng(7);
    double worst = 0.0;
    std::size_t pairs = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto layout = oracle::random_layout(rng, 6);
        for (const auto mode : {ConstantsMode::Paper, ConstantsMode::Codata}) {
            const auto c = PhysicalConstants::for_mode(mode);
            const auto kink = kink_matrix(layout, 80.0, c);
            pairs += kink.pair_count();
            worst = std::max(worst, oracle::max_relative_error(layout, kink, 80.0, c));
        }
    }
    o.check(worst < 1e-12, "100 layouts, " + std::to_string(pairs) + " pairs, worst rel err " + sci(worst));
    return o;
}

Layout majority_with_fixed_c(double c_value) {
    auto cells = builtin_layout("majority").cells();
    for (auto& cell : cells) {
        if (cell.id == "c") {
            cell.role = CellRole::Fixed;
            cell.fixed_polarization = c_value;
        }
    }
    return Layout("majority_fixed_c", cells);
}

Outcome criterion_logic() {
    Outcome o;
    for (const auto engine : {EngineKind::Bistable, EngineKind::Coherence}) {
        EngineConfig config;
        config.engine = engine;
        for (const char* name : {"inv2", "inv3"}) {
            const auto report = truth_table_check(builtin_layout(name), LogicFunction::Inverter, config);
            std::string detail;
            for (const auto& row : report.rows) detail += " " + sci(row.polarization);
            o.check(report.all_pass() && report.rows.size() == 2,
                    std::string(name) + " " + std::string(to_string(engine)) + " outputs" + detail);
        }
    }
    EngineConfig bistable;
    const auto maj = truth_table_check(builtin_layout("majority"), LogicFunction::Majority, bistable);
    o.check(maj.all_pass() && maj.rows.size() == 8, "majority " + std::to_string(maj.passed()) + "/8");
    const auto and_gate = truth_table_check(majority_with_fixed_c(-1.0), LogicFunction::And, bistable);
    o.check(and_gate.all_pass() && and_gate.rows.size() == 4, "M(A,B,0)=AND " + std::to_string(and_gate.passed()) + "/4");
    const auto or_gate = truth_table_check(majority_with_fixed_c(1.0), LogicFunction::Or, bistable);
    o.check(or_gate.all_pass() && or_gate.rows.size() == 4, "M(A,B,1)=OR " + std::to_string(or_gate.passed()) + "/4");
    return o;
}

Outcome criterion_temperature() {
    Outcome o;
    EngineConfig config;
    config.engine = EngineKind::Coherence;
    const auto table = load_reference_table("table1");
    for (const char* name : {"inv2", "inv3"}) {
        const auto result = sweep_temperature(builtin_layout(name), table1_temperatures(), config, 0);
        const auto p = polarizations(result);
        o.check(non_increasing(p, 1e-9), std::string(name) + " |P| non-increasing: " + join(p));
        if (std::string(name) == "inv3") {
            const double d = std::abs(p[0] - p[1]);
            o.check(d < 1e-3, "inv3 |P(0K)-P(1K)|=" + sci(d));
        }
        const std::string column = std::string(name) + "_P";
        const auto cmp = compare_to_reference(result, table, column);
        o.check(cmp.spearman == 1.0, column + " spearman=" + sci(cmp.spearman));
    }
    return o;
}

Outcome criterion_displacement() {
    Outcome o;
    EngineConfig config;
    config.engine = EngineKind::Coherence;
    const auto result = sweep_gap(builtin_layout("inv3"), "out", table2_gaps(), config, 0);
    const auto p = polarizations(result);
    std::vector<double> ek;
    for (const auto& row : result.rows) ek.push_back(std::abs(*row.kink_energy));
    o.check(strictly_decreasing(p), "inv3 |P| strictly decreasing: " + join(p));
    o.check(strictly_decreasing(ek), "inv3 |Ek| strictly decreasing: " + join(ek));
    const auto s2 = compare_to_reference(result, load_reference_table("table2"), "inv3_P").spearman;
    const auto s3 = compare_to_reference(result, load_reference_table("table3"), "inv3_Ek_J").spearman;
    o.check(s2 == 1.0, "inv3_P spearman=" + sci(s2));
    o.check(s3 == 1.0, "inv3_Ek_J spearman=" + sci(s3));
    return o;
}

Layout driven_pair() {
    Cell in;
    in.id = "in";
    in.role = CellRole::Fixed;
    in.fixed_polarization = 1.0;
    Cell out;
    out.id = "out";
    out.center = {20.0, 0.0};
    out.role = CellRole::Output;
    return Layout("pair", {in, out});
}

Outcome criterion_steady_state() {
    Outcome o;
    const auto c = PhysicalConstants::paper();
    const auto pair = driven_pair();
    const auto kink = kink_matrix(pair, 80.0, c);
    const double field = *kink.get(1, 0);
    for (double T : {0.0, 1.0, 5.0, 30.0}) {
        CoherenceParams p;
        p.temperature = T;
        p.clock_amplitude_factor = 0.0;
        p.clock_shift = p.clock_high;
        p.total_time = 10.0 * p.relaxation_time;
        const auto trace = simulate_coherence(pair, kink, p, {}, c);
        const double want = steady_state_polarization(field, p.clock_high, T, c);
        const double err = std::abs(trace.final_polarization[1] - want);
        o.check(err < 1e-6 && trace.max_coherence_norm <= 1.0 + 1e-6,
                "T=" + sci(T) + " K: P=" + sci(trace.final_polarization[1]) + " closed form " + sci(want) +
                    " |lambda|max=" + sci(trace.max_coherence_norm));
    }
    for (const char* name : {"inv2", "inv3"}) {
        const auto layout = builtin_layout(name);
        const auto k = kink_matrix(layout, 80.0, c);
        CoherenceParams full;
        CoherenceParams half;
        half.time_step = full.time_step / 2.0;
        const auto a = simulate_coherence(layout, k, full, {}, c);
        const auto b = simulate_coherence(layout, k, half, {}, c);
        const auto out = *layout.find("out");
        const double d_hold = std::abs(a.hold_polarization[out] - b.hold_polarization[out]);
        const double d_final = std::abs(a.final_polarization[out] - b.final_polarization[out]);
        const double norm = std::max(a.max_coherence_norm, b.max_coherence_norm);
        o.check(d_hold < 1e-4 && d_final < 1e-4 && norm <= 1.0 + 1e-6,
                std::string(name) + " half-step change hold=" + sci(d_hold) + " final=" + sci(d_final) +
                    " |lambda|max=" + sci(norm));
    }
    return o;
}

std::string cli_bytes(std::vector<std::string> args, int& code) {
    std::ostringstream out, err;
    code = run_cli(args, out, err);
    return out.str() + "\x1f" + err.str();
}

Outcome criterion_determinism() {
    Outcome o;
    const std::vector<std::vector<std::string>> commands{
        {"layouts"},
        {"layouts", "--layout", "builtin:inv3"},
        {"kink", "--layout", "builtin:majority"},
        {"kink", "--layout", "builtin:inv3", "--constants", "codata"},
        {"simulate", "--layout", "builtin:inv2"},
        {"simulate", "--layout", "builtin:inv3", "--engine", "coherence", "--stride", "5000"},
        {"truth", "--layout", "builtin:majority"},
        {"truth", "--layout", "builtin:inv3", "--engine", "coherence"},
        {"sweep-temp", "--layout", "builtin:inv3", "--grid", "table1"},
        {"sweep-temp", "--layout", "builtin:inv2", "--reference", "inv2_P"},
        {"sweep-gap", "--layout", "builtin:inv3"},
        {"sweep-gap", "--layout", "builtin:inv3", "--engine", "bistable", "--reference", "inv3_Ek_J"},
    };
    for (const auto& base : commands) {
        std::string label;
        for (const auto& a : base) label += (label.empty() ? "" : " ") + a;
        int c1 = 0, c2 = 0, c3 = 0;
        auto with_threads = [&](const char* n) {
            auto args = base;
            args.insert(args.end(), {"--threads", n, "--seedless"});
            return args;
        };
        const auto first = cli_bytes(with_threads("1"), c1);
        const auto second = cli_bytes(with_threads("1"), c2);
        const auto parallel = cli_bytes(with_threads("4"), c3);
        o.check(c1 == 0 && c1 == c2 && c1 == c3 && first == second && first == parallel,
                label + " (" + std::to_string(first.size()) + " bytes)");
    }
    return o;
}

Outcome criterion_reference_data() {
    Outcome o;
    const auto t1 = load_reference_table("table1");
    const auto t2 = load_reference_table("table2");
    const auto t3 = load_reference_table("table3");
    o.check(t1.rows() == 15 && t2.rows() == 6 && t3.rows() == 6,
            "rows " + std::to_string(t1.rows()) + "/" + std::to_string(t2.rows()) + "/" + std::to_string(t3.rows()));
    const auto c1 = t1.column_index("inv2_P");
    o.check(t1.text[1][0] == "1" && t1.text[1][c1] == "0.562", "table1 inv2 at 1 K = " + t1.text[1][c1]);
    const auto c3 = t3.column_index("inv3_Ek_J");
    o.check(t3.text[3][0] == "2.00" && t3.text[3][c3] == "9.714e-20", "table3 inv3 Ek at 2.00 nm = " + t3.text[3][c3]);
    o.check(t3.text[0][c3] == "44.162e-20", "table3 inv3 Ek at 0.50 nm kept as printed: " + t3.text[0][c3]);
    o.check(t1.columns == std::vector<std::string>{"temperature_K", "inv2_P", "inv3_P"} &&
                t2.columns == std::vector<std::string>{"gap_nm", "inv2_P", "inv3_P"} &&
                t3.columns == std::vector<std::string>{"gap_nm", "inv2_Ek_J", "inv3_Ek_J"},
            "headers");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* title;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Coulomb constant k e^2 = 23.04e-29 J m", criterion_constant},
        {2, "kink matrix equals brute-force oracle", criterion_oracle},
        {3, "logic contracts", criterion_logic},
        {4, "temperature trend", criterion_temperature},
        {5, "displacement trends", criterion_displacement},
        {6, "coherence steady state and step convergence", criterion_steady_state},
        {7, "CLI determinism", criterion_determinism},
        {8, "reference data integrity", criterion_reference_data},
    };
    bool all = true;
    std::vector<std::string> lines;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.check(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        all = all && outcome.pass;
        char head[160];
        std::snprintf(head, sizeof head, "criterion %d %s: %s (%.2f s)", c.number, outcome.pass ? "PASS" : "FAIL",
                      c.title, seconds);
        lines.emplace_back(head);
        std::cout << head << '\n';
        for (const auto& note : outcome.notes) std::cout << "    " << note << '\n';
        std::cout.flush();
    }
    std::cout << "\nsummary\n";
    for (const auto& l : lines) std::cout << l << '\n';
    return all ? 0 : 1;
}
