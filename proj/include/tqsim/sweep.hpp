#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tqsim/channel.hpp"
#include "tqsim/metrology.hpp"
#include "tqsim/qmatrix.hpp"
#include "tqsim/resources.hpp"
#include "tqsim/specfun.hpp"
#include "tqsim/teleport.hpp"
#include "tqsim/version.hpp"

namespace tqsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& parameter_names() {
    static const std::vector<std::string> n = {"Q1", "Gamma1", "B1",    "Q2",  "Gamma2",
                                               "B2", "theta",  "phi", "vartheta"};
    return n;
}

inline const std::map<std::string, double>& default_parameters() {
    static const std::map<std::string, double> m = {
        {"Q1", 1.0},     {"Gamma1", 1.0}, {"B1", 1.0},
        {"Q2", 1.0},     {"Gamma2", 1.0}, {"B2", 1.0},
        {"theta", std::numbers::pi / 2}, {"phi", 0.0}, {"vartheta", std::numbers::pi / 2}};
    return m;
}

inline const std::vector<std::string>& output_names() {
    static const std::vector<std::string> n = {
        "alpha1",       "alpha2",         "qfi",        "fi",          "f_avg",
        "fidelity",     "concurrence_ch", "concurrence_out", "discord_ch", "discord_out",
        "coherence_ch", "coherence_out",  "hss",        "trace_dist"};
    return n;
}

struct SweepAxis {
    std::string name;
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
};

struct SweepConfig {
    std::map<std::string, double> fixed;  // complete parameter map, defaults applied
    std::vector<SweepAxis> axes;          // at most 3
    std::vector<std::string> outputs;
    double t_start = 0.0;
    double t_stop = 5.0;
    int t_count = 101;

    void validate() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) out.push_back(trim(cur));
    return out;
}

inline double parse_number(const std::string& s, int line, const std::string& what) {
    const std::string t = trim(s);
    double v = 0.0;
    size_t pos = 0;
    bool ok = !t.empty();
    if (ok) {
        try {
            v = std::stod(t, &pos);
        } catch (...) {
            ok = false;
        }
    }
    if (ok && pos != t.size()) ok = false;
    if (!ok || !std::isfinite(v))
        throw ConfigError("line " + std::to_string(line) + ": invalid number '" + s + "' for " +
                          what);
    return v;
}

inline int parse_count(const std::string& s, int line, const std::string& what) {
    const double v = parse_number(s, line, what);
    if (v != std::floor(v) || v < 1 || v > 1e7)
        throw ConfigError("line " + std::to_string(line) + ": invalid count '" + s + "' for " +
                          what);
    return static_cast<int>(v);
}

inline bool is_parameter(const std::string& name) {
    const auto& n = parameter_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

inline bool is_output(const std::string& name) {
    const auto& n = output_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

// Shortest round-trip decimal form; NaN renders as an empty CSV cell.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "";
    std::array<char, 40> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex16(std::uint64_t v) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = d[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace detail

inline void SweepConfig::validate() const {
    if (axes.size() > 3) throw ConfigError("at most 3 sweep axes are supported");
    for (const auto& ax : axes) {
        if (!detail::is_parameter(ax.name))
            throw ConfigError("unknown sweep parameter '" + ax.name + "'");
        if (ax.count < 2) throw ConfigError("sweep axis '" + ax.name + "' needs count >= 2");
    }
    for (const auto& kv : fixed)
        if (!detail::is_parameter(kv.first))
            throw ConfigError("unknown parameter '" + kv.first + "'");
    for (const auto& o : outputs)
        if (!detail::is_output(o)) throw ConfigError("unknown output '" + o + "'");
    if (!(t_start >= 0.0)) throw ConfigError("t_start must be >= 0");
    if (!(t_stop >= t_start)) throw ConfigError("t_stop must be >= t_start");
    if (t_count < 1) throw ConfigError("time grid needs count >= 1");
}

// A parsed config file, with enough bookkeeping to distinguish what the user
// actually wrote from defaults (figure overrides and manifests need this).
struct ParsedConfig {
    SweepConfig cfg;
    std::map<std::string, double> explicit_fixed;
    bool has_time = false;
    bool has_outputs = false;
};

// Line format: `key = value`, `#` comments. Keys are parameter names,
// `time = start,stop,count`, `sweep = name,start,stop,count` (repeatable),
// and `outputs = name,name,...`.
inline ParsedConfig parse_config(std::istream& in) {
    ParsedConfig pc;
    pc.cfg.fixed = default_parameters();
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (const size_t hash = s.find('#'); hash != std::string::npos) s.erase(hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key == "time") {
            if (pc.has_time)
                throw ConfigError("line " + std::to_string(line) + ": duplicate time grid");
            const auto f = detail::split_list(val);
            if (f.size() != 3)
                throw ConfigError("line " + std::to_string(line) +
                                  ": time needs start,stop,count");
            pc.cfg.t_start = detail::parse_number(f[0], line, "time start");
            pc.cfg.t_stop = detail::parse_number(f[1], line, "time stop");
            pc.cfg.t_count = detail::parse_count(f[2], line, "time count");
            if (!(pc.cfg.t_start >= 0.0))
                throw ConfigError("line " + std::to_string(line) + ": t_start must be >= 0");
            if (!(pc.cfg.t_stop >= pc.cfg.t_start))
                throw ConfigError("line " + std::to_string(line) + ": t_stop must be >= t_start");
            pc.has_time = true;
        } else if (key == "sweep") {
            const auto f = detail::split_list(val);
            if (f.size() != 4)
                throw ConfigError("line " + std::to_string(line) +
                                  ": sweep needs name,start,stop,count");
            SweepAxis ax;
            ax.name = f[0];
            if (!detail::is_parameter(ax.name))
                throw ConfigError("line " + std::to_string(line) + ": unknown sweep parameter '" +
                                  ax.name + "'");
            for (const auto& prev : pc.cfg.axes)
                if (prev.name == ax.name)
                    throw ConfigError("line " + std::to_string(line) + ": parameter '" + ax.name +
                                      "' swept twice");
            if (pc.explicit_fixed.count(ax.name))
                throw ConfigError("line " + std::to_string(line) + ": parameter '" + ax.name +
                                  "' is both fixed and swept");
            ax.start = detail::parse_number(f[1], line, "sweep start");
            ax.stop = detail::parse_number(f[2], line, "sweep stop");
            ax.count = detail::parse_count(f[3], line, "sweep count");
            if (ax.count < 2)
                throw ConfigError("line " + std::to_string(line) +
                                  ": sweep count must be >= 2");
            if (pc.cfg.axes.size() == 3)
                throw ConfigError("line " + std::to_string(line) + ": at most 3 sweep axes");
            pc.cfg.axes.push_back(ax);
        } else if (key == "outputs") {
            if (pc.has_outputs)
                throw ConfigError("line " + std::to_string(line) + ": duplicate outputs list");
            for (const auto& o : detail::split_list(val)) {
                if (!detail::is_output(o))
                    throw ConfigError("line " + std::to_string(line) + ": unknown output '" + o +
                                      "'");
                if (std::find(pc.cfg.outputs.begin(), pc.cfg.outputs.end(), o) !=
                    pc.cfg.outputs.end())
                    throw ConfigError("line " + std::to_string(line) + ": duplicate output '" + o +
                                      "'");
                pc.cfg.outputs.push_back(o);
            }
            if (pc.cfg.outputs.empty())
                throw ConfigError("line " + std::to_string(line) + ": outputs list is empty");
            pc.has_outputs = true;
        } else if (detail::is_parameter(key)) {
            if (pc.explicit_fixed.count(key))
                throw ConfigError("line " + std::to_string(line) + ": duplicate parameter '" +
                                  key + "'");
            for (const auto& ax : pc.cfg.axes)
                if (ax.name == key)
                    throw ConfigError("line " + std::to_string(line) + ": parameter '" + key +
                                      "' is both fixed and swept");
            const double v = detail::parse_number(val, line, key);
            pc.cfg.fixed[key] = v;
            pc.explicit_fixed[key] = v;
        } else {
            throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
        }
    }
    pc.cfg.validate();
    return pc;
}

struct Row {
    std::vector<double> vals;
    int flag = 0;  // 0 clean, 1 singular point emitted as continuity value, 2 evaluation error
    std::string note;
};

struct Table {
    std::vector<std::string> columns;  // axes, t, outputs, then flag and note
    std::vector<Row> rows;
};

inline int max_flag(const Table& t) {
    int f = 0;
    for (const auto& r : t.rows) f = std::max(f, r.flag);
    return f;
}

namespace detail {

enum class OutputKind {
    Alpha1,
    Alpha2,
    Qfi,
    Fi,
    Favg,
    Fidelity,
    ConcCh,
    ConcOut,
    DiscCh,
    DiscOut,
    CohCh,
    CohOut,
    Hss,
    TraceDist
};

inline OutputKind output_kind(const std::string& name) {
    static const std::map<std::string, OutputKind> m = {
        {"alpha1", OutputKind::Alpha1},
        {"alpha2", OutputKind::Alpha2},
        {"qfi", OutputKind::Qfi},
        {"fi", OutputKind::Fi},
        {"f_avg", OutputKind::Favg},
        {"fidelity", OutputKind::Fidelity},
        {"concurrence_ch", OutputKind::ConcCh},
        {"concurrence_out", OutputKind::ConcOut},
        {"discord_ch", OutputKind::DiscCh},
        {"discord_out", OutputKind::DiscOut},
        {"coherence_ch", OutputKind::CohCh},
        {"coherence_out", OutputKind::CohOut},
        {"hss", OutputKind::Hss},
        {"trace_dist", OutputKind::TraceDist}};
    return m.at(name);
}

// Evaluates the requested outputs at one grid point. Intermediate objects are
// cached across outputs; a failing output poisons only its own cell.
inline void eval_point(const std::map<std::string, double>& p, double t,
                       const std::vector<OutputKind>& kinds, Row& row, size_t offset) {
    EnvironmentParams env1, env2;
    PureStateParams prm;
    try {
        env1 = {p.at("Q1"), p.at("Gamma1"), p.at("B1")};
        env2 = {p.at("Q2"), p.at("Gamma2"), p.at("B2")};
        prm = {p.at("theta"), p.at("phi"), p.at("vartheta")};
        env1.check();
        env2.check();
        prm.check();
        if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
    } catch (const std::exception& e) {
        row.flag = 2;
        row.note = e.what();
        for (size_t i = 0; i < kinds.size(); ++i)
            row.vals[offset + i] = std::numeric_limits<double>::quiet_NaN();
        return;
    }

    std::optional<DecoherenceFactor> a1, a2;
    std::optional<EstimationReport> rep;
    std::optional<Mat4> ch, outm;
    std::optional<TeleportResult> tp;
    auto get_a1 = [&]() -> const DecoherenceFactor& {
        if (!a1) a1 = alpha(t, env1);
        return *a1;
    };
    auto get_a2 = [&]() -> const DecoherenceFactor& {
        if (!a2) a2 = alpha(t, env2);
        return *a2;
    };
    auto get_rep = [&]() -> const EstimationReport& {
        if (!rep) rep = qfi_b1(t, env1, env2, prm);
        return *rep;
    };
    auto get_ch = [&]() -> const Mat4& {
        if (!ch) ch = channel_elements(get_a1().alpha, get_a2().alpha, prm.vartheta);
        return *ch;
    };
    auto get_out = [&]() -> const Mat4& {
        if (!outm) outm = teleport_closed_elements(get_a1().alpha * get_a2().alpha, prm);
        return *outm;
    };
    auto get_tp = [&]() -> const TeleportResult& {
        if (!tp) tp = teleport_closed(get_a1().alpha * get_a2().alpha, prm);
        return *tp;
    };

    for (size_t i = 0; i < kinds.size(); ++i) {
        double v = std::numeric_limits<double>::quiet_NaN();
        try {
            switch (kinds[i]) {
                case OutputKind::Alpha1: v = get_a1().alpha; break;
                case OutputKind::Alpha2: v = get_a2().alpha; break;
                case OutputKind::Qfi:
                case OutputKind::Fi: {
                    const EstimationReport& r = get_rep();
                    if (r.singular_continuity) row.flag = std::max(row.flag, 1);
                    v = (kinds[i] == OutputKind::Qfi) ? r.qfi : r.fi_optimal_povm;
                    break;
                }
                case OutputKind::Favg:
                    v = average_fidelity(get_a1().alpha * get_a2().alpha, prm.vartheta);
                    break;
                case OutputKind::Fidelity: v = get_tp().fidelity_pointwise; break;
                case OutputKind::ConcCh: v = concurrence_x(get_ch()); break;
                case OutputKind::ConcOut: v = concurrence_x(get_out()); break;
                case OutputKind::DiscCh: v = discord_x(get_ch()); break;
                case OutputKind::DiscOut: v = discord_x(get_out()); break;
                case OutputKind::CohCh: v = coherence_l1<4>(get_ch()); break;
                case OutputKind::CohOut: v = coherence_l1<4>(get_out()); break;
                case OutputKind::Hss: v = hss_witness(t, env1).value; break;
                case OutputKind::TraceDist: v = blp_witness(t, env1).value; break;
            }
        } catch (const std::exception& e) {
            row.flag = 2;
            if (row.note.empty()) row.note = e.what();
            v = std::numeric_limits<double>::quiet_NaN();
        }
        row.vals[offset + i] = v;
    }
}

inline double grid_value(double start, double stop, int count, int i) {
    if (count < 2) return start;
    return start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace detail

// Rows are ordered lexicographically over the axes in declared order, time
// innermost. Work is dealt to threads by row index, so any thread count
// produces identical tables.
inline Table run_sweep(const SweepConfig& cfg, int threads = 1) {
    cfg.validate();
    Table table;
    for (const auto& ax : cfg.axes) table.columns.push_back(ax.name);
    table.columns.push_back("t");
    for (const auto& o : cfg.outputs) table.columns.push_back(o);

    std::vector<detail::OutputKind> kinds;
    kinds.reserve(cfg.outputs.size());
    for (const auto& o : cfg.outputs) kinds.push_back(detail::output_kind(o));

    size_t total = static_cast<size_t>(cfg.t_count);
    for (const auto& ax : cfg.axes) total *= static_cast<size_t>(ax.count);
    table.rows.assign(total, Row{});

    const size_t naxes = cfg.axes.size();
    const size_t width = naxes + 1 + cfg.outputs.size();
    const int nthreads = std::clamp(threads, 1, 256);

    auto worker = [&](int w) {
        std::map<std::string, double> p = cfg.fixed;
        for (size_t idx = static_cast<size_t>(w); idx < total; idx += nthreads) {
            Row& row = table.rows[idx];
            row.vals.assign(width, 0.0);
            size_t rem = idx;
            const int ti = static_cast<int>(rem % cfg.t_count);
            rem /= static_cast<size_t>(cfg.t_count);
            for (size_t a = naxes; a-- > 0;) {
                const auto& ax = cfg.axes[a];
                const int ai = static_cast<int>(rem % ax.count);
                rem /= static_cast<size_t>(ax.count);
                const double v = detail::grid_value(ax.start, ax.stop, ax.count, ai);
                row.vals[a] = v;
                p[ax.name] = v;
            }
            const double t = detail::grid_value(cfg.t_start, cfg.t_stop, cfg.t_count, ti);
            row.vals[naxes] = t;
            detail::eval_point(p, t, kinds, row, naxes + 1);
        }
    };

    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }
    return table;
}

inline std::string canonical_config_string(const SweepConfig& cfg) {
    std::string s = "fixed:";
    for (const auto& kv : cfg.fixed) s += kv.first + "=" + detail::format_double(kv.second) + ";";
    s += "|axes:";
    for (const auto& ax : cfg.axes)
        s += ax.name + "," + detail::format_double(ax.start) + "," +
             detail::format_double(ax.stop) + "," + std::to_string(ax.count) + ";";
    s += "|time:" + detail::format_double(cfg.t_start) + "," + detail::format_double(cfg.t_stop) +
         "," + std::to_string(cfg.t_count);
    s += "|outputs:";
    for (const auto& o : cfg.outputs) s += o + ",";
    return s;
}

inline std::string config_hash(const SweepConfig& cfg) {
    return detail::hex16(detail::fnv1a64(canonical_config_string(cfg)));
}

inline void write_csv(std::ostream& os, const Table& table, const SweepConfig& cfg) {
    os << "# tqsim " << TQSIM_VERSION << "\n";
    os << "# config_hash " << config_hash(cfg) << "\n";
    os << "# fixed";
    for (const auto& kv : cfg.fixed) os << " " << kv.first << "=" << detail::format_double(kv.second);
    os << "\n";
    if (!cfg.axes.empty()) {
        os << "# axes";
        for (const auto& ax : cfg.axes)
            os << " " << ax.name << "=" << detail::format_double(ax.start) << ":"
               << detail::format_double(ax.stop) << ":" << ax.count;
        os << "\n";
    }
    os << "# time " << detail::format_double(cfg.t_start) << "," << detail::format_double(cfg.t_stop)
       << "," << cfg.t_count << "\n";
    os << "# columns";
    for (const auto& c : table.columns) os << " " << c;
    os << " flag note\n";
    for (size_t i = 0; i < table.columns.size(); ++i)
        os << table.columns[i] << ",";
    os << "flag,note\n";
    for (const auto& row : table.rows) {
        for (double v : row.vals) os << detail::format_double(v) << ",";
        os << row.flag << ",";
        if (!row.note.empty()) {
            std::string quoted = "\"";
            for (char c : row.note) {
                quoted += c;
                if (c == '"') quoted += '"';
            }
            quoted += '"';
            os << quoted;
        }
        os << "\n";
    }
}

inline nlohmann::ordered_json table_json(const Table& table, const SweepConfig& cfg) {
    nlohmann::ordered_json j;
    j["version"] = TQSIM_VERSION;
    j["config_hash"] = config_hash(cfg);
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const auto& c : table.columns) cols.push_back(c);
    cols.push_back("flag");
    cols.push_back("note");
    j["columns"] = cols;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (double v : row.vals) {
            if (std::isnan(v))
                r.push_back(nullptr);
            else
                r.push_back(v);
        }
        r.push_back(row.flag);
        r.push_back(row.note);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

// ---------------------------------------------------------------------------
// Figure reproduction

struct FigureFamilyMember {
    double label;
    std::map<std::string, double> set;  // parameters this curve pins
};

struct FigureDef {
    std::string name;
    std::string family_column;               // empty for single-curve / plane figures
    std::vector<FigureFamilyMember> family;  // one sweep per member
    std::vector<SweepAxis> axes;             // plane figures only
    std::map<std::string, double> pinned;    // caption-pinned parameter values
    double t_start = 0.0;
    double t_stop = 5.0;
    int t_count = 201;
    bool time_pinned = false;  // snapshot figures carry a quoted time
    std::vector<std::string> outputs;
    std::vector<std::string> columns;  // emitted column names, in order
};

inline const std::vector<FigureDef>& figure_defs() {
    static const std::vector<FigureDef> defs = [] {
        std::vector<FigureDef> v;
        auto family_of = [](const std::vector<double>& vals,
                            const std::vector<std::string>& params) {
            std::vector<FigureFamilyMember> fam;
            for (double x : vals) {
                FigureFamilyMember m{x, {}};
                for (const auto& pn : params) m.set[pn] = x;
                fam.push_back(std::move(m));
            }
            return fam;
        };

        FigureDef fig1a;
        fig1a.name = "fig1a";
        fig1a.family_column = "Q2";
        fig1a.family = family_of({1, 2, 3, 4}, {"Q2"});
        fig1a.outputs = {"qfi"};
        fig1a.columns = {"t", "Q2", "qfi"};
        v.push_back(fig1a);

        FigureDef fig1b;
        fig1b.name = "fig1b";
        fig1b.family_column = "Gamma2";
        fig1b.family = family_of({0.5, 1, 2, 4}, {"Gamma2"});
        fig1b.outputs = {"qfi"};
        fig1b.columns = {"t", "Gamma2", "qfi"};
        v.push_back(fig1b);

        FigureDef conB2;
        conB2.name = "conB2";
        conB2.family_column = "B2";
        conB2.family = family_of({0.5, 1, 1.5, 2}, {"B2"});
        conB2.outputs = {"concurrence_out"};
        conB2.columns = {"t", "B2", "concurrence_out"};
        v.push_back(conB2);

        FigureDef conQ2;
        conQ2.name = "conQ2";
        conQ2.axes = {{"Q1", 0.1, 4.0, 40}, {"Q2", 0.1, 4.0, 40}};
        conQ2.t_start = conQ2.t_stop = 0.7;
        conQ2.t_count = 1;
        conQ2.time_pinned = true;
        conQ2.outputs = {"concurrence_out"};
        conQ2.columns = {"Q1", "Q2", "concurrence_out"};
        v.push_back(conQ2);

        FigureDef conG2;
        conG2.name = "conG2";
        conG2.axes = {{"Gamma1", 0.25, 4.0, 40}, {"Gamma2", 0.25, 4.0, 40}};
        conG2.t_start = conG2.t_stop = 1.1;
        conG2.t_count = 1;
        conG2.time_pinned = true;
        conG2.outputs = {"concurrence_out"};
        conG2.columns = {"Gamma1", "Gamma2", "concurrence_out"};
        v.push_back(conG2);

        FigureDef fq;
        fq.name = "FQ";
        fq.family_column = "Q";
        fq.family = family_of({0.5, 1, 2, 4}, {"Q1", "Q2"});
        fq.outputs = {"f_avg"};
        fq.columns = {"t", "Q", "f_avg"};
        v.push_back(fq);

        FigureDef fg;
        fg.name = "FG";
        fg.family_column = "Gamma2";
        fg.family = family_of({0.5, 1, 2, 4}, {"Gamma2"});
        fg.outputs = {"f_avg"};
        fg.columns = {"t", "Gamma2", "f_avg"};
        v.push_back(fg);

        FigureDef cmp;
        cmp.name = "comparison";
        cmp.pinned = {{"Q1", 6.0}, {"Q2", 6.0}};
        cmp.t_stop = 6.0;
        cmp.t_count = 301;
        cmp.outputs = {"f_avg",      "concurrence_ch", "concurrence_out", "discord_ch",
                       "discord_out", "coherence_ch",   "coherence_out"};
        cmp.columns = {"t",      "f_avg",  "C_ch",   "C_out", "QD_ch",
                       "QD_out", "coh_ch", "coh_out"};
        v.push_back(cmp);
        return v;
    }();
    return defs;
}

inline const FigureDef& figure_def(const std::string& name) {
    for (const auto& d : figure_defs())
        if (d.name == name) return d;
    std::string known;
    for (const auto& d : figure_defs()) known += (known.empty() ? "" : ", ") + d.name;
    throw ConfigError("unknown figure '" + name + "' (known: " + known + ")");
}

struct FigureData {
    std::string name;
    std::vector<std::string> columns;
    std::vector<Row> rows;
    nlohmann::ordered_json manifest;
    int flag = 0;
};

// Builds one figure's data table. Overrides may retune fixed parameters and
// the time grid; family- and axis-swept parameters stay owned by the figure.
inline FigureData make_figure(const std::string& name, const ParsedConfig* overrides,
                              int threads, bool json_sidecar) {
    const FigureDef& def = figure_def(name);

    std::map<std::string, std::string> source;
    std::map<std::string, double> params = default_parameters();
    for (const auto& kv : params) source[kv.first] = "default";
    for (const auto& kv : def.pinned) {
        params[kv.first] = kv.second;
        source[kv.first] = "pinned";
    }

    std::vector<std::string> varied;  // family- or axis-owned parameter names
    for (const auto& m : def.family)
        for (const auto& kv : m.set)
            if (std::find(varied.begin(), varied.end(), kv.first) == varied.end())
                varied.push_back(kv.first);
    for (const auto& ax : def.axes) varied.push_back(ax.name);

    double t_start = def.t_start, t_stop = def.t_stop;
    int t_count = def.t_count;
    std::string time_source = def.time_pinned ? "pinned" : "default";
    if (overrides) {
        if (overrides->has_outputs || !overrides->cfg.axes.empty())
            throw ConfigError("figure overrides may set parameters and time only");
        for (const auto& kv : overrides->explicit_fixed) {
            if (std::find(varied.begin(), varied.end(), kv.first) != varied.end())
                throw ConfigError("parameter '" + kv.first + "' is swept by figure '" + name +
                                  "' and cannot be overridden");
            params[kv.first] = kv.second;
            source[kv.first] = "override";
        }
        if (overrides->has_time) {
            t_start = overrides->cfg.t_start;
            t_stop = overrides->cfg.t_stop;
            t_count = overrides->cfg.t_count;
            time_source = "override";
        }
    }

    FigureData out;
    out.name = name;
    out.columns = def.columns;

    std::vector<FigureFamilyMember> members = def.family;
    if (members.empty()) members.push_back({0.0, {}});
    const bool has_family = !def.family.empty();

    std::string canon = "figure:" + name + "|";
    SweepConfig last_cfg;
    for (const auto& m : members) {
        SweepConfig cfg;
        cfg.fixed = params;
        for (const auto& kv : m.set) cfg.fixed[kv.first] = kv.second;
        cfg.axes = def.axes;
        cfg.outputs = def.outputs;
        cfg.t_start = t_start;
        cfg.t_stop = t_stop;
        cfg.t_count = t_count;
        canon += canonical_config_string(cfg) + "|";
        const Table tab = run_sweep(cfg, threads);
        const size_t naxes = def.axes.size();
        for (const auto& r : tab.rows) {
            Row fr;
            fr.flag = r.flag;
            fr.note = r.note;
            if (has_family) {
                fr.vals.push_back(r.vals[naxes]);  // t
                fr.vals.push_back(m.label);
            } else if (!def.axes.empty()) {
                for (size_t a = 0; a < naxes; ++a) fr.vals.push_back(r.vals[a]);
            } else {
                fr.vals.push_back(r.vals[naxes]);  // t
            }
            for (size_t k = 0; k < def.outputs.size(); ++k)
                fr.vals.push_back(r.vals[naxes + 1 + k]);
            out.flag = std::max(out.flag, fr.flag);
            out.rows.push_back(std::move(fr));
        }
        last_cfg = cfg;
    }
    const std::string hash = detail::hex16(detail::fnv1a64(canon));

    nlohmann::ordered_json man;
    man["figure"] = name;
    man["version"] = TQSIM_VERSION;
    man["config_hash"] = hash;
    man["time"] = {{"start", t_start}, {"stop", t_stop}, {"count", t_count},
                   {"source", time_source}};
    nlohmann::ordered_json pj;
    for (const auto& kv : params) {
        if (std::find(varied.begin(), varied.end(), kv.first) != varied.end()) continue;
        pj[kv.first] = {{"value", kv.second}, {"source", source[kv.first]}};
    }
    man["parameters"] = std::move(pj);
    if (has_family) {
        nlohmann::ordered_json fam;
        fam["column"] = def.family_column;
        nlohmann::ordered_json fp = nlohmann::ordered_json::array();
        for (const auto& pn : varied) fp.push_back(pn);
        fam["parameters"] = std::move(fp);
        nlohmann::ordered_json fv = nlohmann::ordered_json::array();
        for (const auto& m : def.family) fv.push_back(m.label);
        fam["values"] = std::move(fv);
        man["family"] = std::move(fam);
    }
    if (!def.axes.empty()) {
        nlohmann::ordered_json axes = nlohmann::ordered_json::array();
        for (const auto& ax : def.axes)
            axes.push_back({{"name", ax.name},
                            {"start", ax.start},
                            {"stop", ax.stop},
                            {"count", ax.count}});
        man["axes"] = std::move(axes);
    }
    nlohmann::ordered_json outs = nlohmann::ordered_json::array();
    for (const auto& o : def.outputs) outs.push_back(o);
    man["outputs"] = std::move(outs);
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const auto& c : def.columns) cols.push_back(c);
    man["columns"] = std::move(cols);
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    files.push_back(name + ".csv");
    if (json_sidecar) files.push_back(name + ".json");
    files.push_back(name + "_manifest.json");
    man["files"] = std::move(files);
    out.manifest = std::move(man);
    return out;
}

inline void write_figure_csv(std::ostream& os, const FigureData& fig) {
    os << "# tqsim " << TQSIM_VERSION << "\n";
    os << "# figure " << fig.name << "\n";
    os << "# config_hash " << fig.manifest.at("config_hash").get<std::string>() << "\n";
    os << "# columns";
    for (const auto& c : fig.columns) os << " " << c;
    os << "\n";
    for (size_t i = 0; i < fig.columns.size(); ++i)
        os << fig.columns[i] << (i + 1 < fig.columns.size() ? "," : "\n");
    for (const auto& row : fig.rows) {
        for (size_t i = 0; i < row.vals.size(); ++i)
            os << detail::format_double(row.vals[i]) << (i + 1 < row.vals.size() ? "," : "\n");
    }
}

inline nlohmann::ordered_json figure_json(const FigureData& fig) {
    nlohmann::ordered_json j;
    j["version"] = TQSIM_VERSION;
    j["figure"] = fig.name;
    j["config_hash"] = fig.manifest.at("config_hash");
    nlohmann::ordered_json cols = nlohmann::ordered_json::array();
    for (const auto& c : fig.columns) cols.push_back(c);
    j["columns"] = std::move(cols);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : fig.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (double v : row.vals) {
            if (std::isnan(v))
                r.push_back(nullptr);
            else
                r.push_back(v);
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

}  // namespace tqsim
