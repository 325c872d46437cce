#pragma once
// Trace and report writers. Floats are emitted with %.17g so values
// round-trip exactly and files are bit-identical across runs on one
// platform.

#include "phtrack/simulate.hpp"

#include <cstdio>
#include <fstream>

namespace phtrack {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Fixed trace schema:
/// t, q1..qn, p1..pn, xc1..xcn, qd1..qdn, u1..un, uff1..uffn, qt1..qtn, Hlyap
/// where qt is the position error q - q_d.
inline std::string trace_csv_header(int n) {
    std::string h = "t";
    const auto block = [&](const char* stem) {
        for (int i = 1; i <= n; ++i) h += "," + std::string(stem) + std::to_string(i);
    };
    block("q");
    block("p");
    block("xc");
    block("qd");
    block("u");
    block("uff");
    block("qt");
    h += ",Hlyap";
    return h;
}

inline void write_trace_csv(const SimTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << trace_csv_header(trace.n) << "\n";
    const auto block = [&](const Vec& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) out << "," << format_full(v[i]);
    };
    for (const auto& row : trace.rows) {
        out << format_full(row.t);
        block(row.q);
        block(row.p);
        block(row.x_c);
        block(row.q_d);
        block(row.u);
        block(row.u_ff);
        block(row.q_err);
        out << "," << format_full(row.H_lyap) << "\n";
    }
}

/// Flat key-value metrics report.
inline void write_metrics_report(const SimTrace& trace, const Metrics& m, double t_settle,
                                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_report: cannot open " + path);
    char hash[24];
    std::snprintf(hash, sizeof(hash), "0x%016llx", static_cast<unsigned long long>(trace.config_hash));
    out << "model = " << trace.model_name << "\n";
    out << "gain_profile = " << trace.gain_profile_name << "\n";
    out << "config_hash = " << hash << "\n";
    out << "rows = " << trace.rows.size() << "\n";
    out << "t_settle = " << format_full(t_settle) << "\n";
    for (int i = 0; i < trace.n; ++i)
        out << "settled_error_" << (i + 1) << " = " << format_full(m.settled_error[i]) << "\n";
    for (int i = 0; i < trace.n; ++i)
        out << "peak_control_" << (i + 1) << " = " << format_full(m.peak_control[i]) << "\n";
    out << "lyap_violations = " << m.lyap_violations << "\n";
    if (m.energy_drift) out << "energy_drift = " << format_full(*m.energy_drift) << "\n";
    out << "within_limits = " << (m.within_limits ? "true" : "false") << "\n";
}

}  // namespace phtrack
