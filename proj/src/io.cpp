#include "coxlab/io.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "coxlab/error.hpp"
#include "json.hpp"

namespace coxlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::CONFIG, "key '" + key + "': not a number: '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::CONFIG, "key '" + key + "': not an integer: '" + value + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::int64_t v = parse_int(key, value);
    if (v < 0) throw Error(ErrorCode::CONFIG, "key '" + key + "': must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    std::stringstream ss(value);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) parts.push_back(cur);
    }
    return parts;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& part : split_commas(value)) out.push_back(parse_double(key, part));
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<std::int64_t> out;
    for (const std::string& part : split_commas(value)) out.push_back(parse_int(key, part));
    return out;
}

template <typename T>
std::string join_list(const std::vector<T>& xs, std::string (*fmt)(T)) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += fmt(xs[i]);
    }
    return out;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "variant") {
        try {
            c.model.variant = variant_from_name(value);
        } catch (const Error&) {
            throw Error(ErrorCode::CONFIG, "key 'variant': unknown variant '" + value + "'");
        }
    } else if (key == "M") {
        c.model.M = parse_double(key, value);
    } else if (key == "b_inv") {
        c.model.b_inv = parse_int(key, value);
    } else if (key == "lambda") {
        c.model.lambda = parse_double(key, value);
    } else if (key == "lambda_del") {
        c.model.lambda_del = parse_double(key, value);
    } else if (key == "L") {
        c.model.L = parse_double(key, value);
    } else if (key == "rho") {
        c.model.rho = parse_double(key, value);
    } else if (key == "w0") {
        c.model.w0 = parse_double(key, value);
    } else if (key == "eta") {
        c.model.eta = parse_double(key, value);
    } else if (key == "ball_radius") {
        c.model.ball_radius = parse_double(key, value);
    } else if (key == "n") {
        c.n = parse_int(key, value);
    } else if (key == "n_list") {
        c.n_list = parse_int_list(key, value);
    } else if (key == "lambda_list") {
        c.lambda_list = parse_double_list(key, value);
    } else if (key == "trials") {
        c.trials = parse_uint(key, value);
    } else if (key == "seed") {
        c.seed = parse_uint(key, value);
    } else if (key == "q0") {
        c.q0 = parse_double(key, value);
    } else if (key == "threshold") {
        c.threshold = parse_double(key, value);
    } else if (key == "tol") {
        c.tol = parse_double(key, value);
    } else if (key == "h") {
        c.h = parse_double(key, value);
    } else if (key == "lambda_lo") {
        c.lambda_lo = parse_double(key, value);
    } else if (key == "lambda_hi") {
        c.lambda_hi = parse_double(key, value);
    } else if (key == "z_x") {
        c.z_x = parse_int(key, value);
    } else if (key == "z_y") {
        c.z_y = parse_int(key, value);
    } else if (key == "kind") {
        c.kind = value;
    } else if (key == "table") {
        c.table = value;
    } else if (key == "output_dir") {
        c.output_dir = value;
    } else if (key == "threads") {
        c.threads = parse_int(key, value);
        if (c.threads < 1) throw Error(ErrorCode::CONFIG, "key 'threads': must be >= 1");
    } else if (key == "config_version") {
        c.config_version = parse_int(key, value);
        if (c.config_version != 1) {
            throw Error(ErrorCode::CONFIG, "key 'config_version': unsupported version " + value);
        }
    } else {
        throw Error(ErrorCode::CONFIG, "unknown key '" + key + "'");
    }
}

std::string lookup(const RunConfig& c, const std::string& key) {
    if (key == "variant") return variant_name(c.model.variant);
    if (key == "M") return fmt_double(c.model.M);
    if (key == "b_inv") return std::to_string(c.model.b_inv);
    if (key == "lambda") return fmt_double(c.model.lambda);
    if (key == "lambda_del") return fmt_double(c.model.lambda_del);
    if (key == "L") return fmt_double(c.model.L);
    if (key == "rho") return fmt_double(c.model.rho);
    if (key == "w0") return fmt_double(c.model.w0);
    if (key == "eta") return fmt_double(c.model.eta);
    if (key == "ball_radius") return fmt_double(c.model.ball_radius);
    if (key == "n") return std::to_string(c.n);
    if (key == "n_list") return join_list<std::int64_t>(c.n_list, +[](std::int64_t v) {
        return std::to_string(v);
    });
    if (key == "lambda_list") return join_list<double>(c.lambda_list, +[](double v) {
        return fmt_double(v);
    });
    if (key == "trials") return std::to_string(c.trials);
    if (key == "seed") return std::to_string(c.seed);
    if (key == "q0") return fmt_double(c.q0);
    if (key == "threshold") return fmt_double(c.threshold);
    if (key == "tol") return fmt_double(c.tol);
    if (key == "h") return fmt_double(c.h);
    if (key == "lambda_lo") return fmt_double(c.lambda_lo);
    if (key == "lambda_hi") return fmt_double(c.lambda_hi);
    if (key == "z_x") return std::to_string(c.z_x);
    if (key == "z_y") return std::to_string(c.z_y);
    if (key == "kind") return c.kind;
    if (key == "table") return c.table;
    if (key == "output_dir") return c.output_dir;
    if (key == "threads") return std::to_string(c.threads);
    if (key == "config_version") return std::to_string(c.config_version);
    throw Error(ErrorCode::CONFIG, "unknown key '" + key + "'");
}

constexpr char kThetaHeader[] = "lambda,n,trials,hits,theta,ci_lo,ci_hi,seed";
constexpr char kRevealHeader[] = "block_x,block_y,trials,count,delta";

// Split `text` into data lines, skipping comments/blanks; the first data line
// must equal `header`.
std::vector<std::string> table_rows(const std::string& text, const char* header) {
    std::vector<std::string> rows;
    std::stringstream ss(text);
    std::string line;
    bool seen_header = false;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!seen_header) {
            if (t != header) {
                throw Error(ErrorCode::BAD_HEADER,
                            "expected header '" + std::string(header) + "', got '" + t + "'");
            }
            seen_header = true;
            continue;
        }
        rows.push_back(t);
    }
    if (!seen_header) {
        throw Error(ErrorCode::BAD_HEADER, "missing header '" + std::string(header) + "'");
    }
    return rows;
}

std::vector<std::string> split_row(const std::string& row, std::size_t fields) {
    std::vector<std::string> out = split_commas(row);
    if (out.size() != fields) {
        throw Error(ErrorCode::BAD_HEADER, "row has " + std::to_string(out.size()) +
                                               " fields, expected " + std::to_string(fields) +
                                               ": '" + row + "'");
    }
    return out;
}

}  // namespace

KeyValues parse_kv_text(const std::string& text) {
    KeyValues out;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::CONFIG,
                        "line " + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw Error(ErrorCode::CONFIG, "line " + std::to_string(lineno) + ": empty key");
        }
        out.emplace_back(key, value);
    }
    return out;
}

const std::vector<std::string>& config_schema() {
    static const std::vector<std::string> keys = {
        "variant",   "M",           "b_inv",     "lambda", "lambda_del", "L",
        "rho",       "w0",          "eta",       "ball_radius", "n",     "n_list",
        "lambda_list", "trials",    "seed",      "q0",     "threshold",  "tol",
        "h",         "lambda_lo",   "lambda_hi", "z_x",    "z_y",        "kind",
        "table",     "output_dir",  "threads",   "config_version",
    };
    return keys;
}

RunConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides) {
    RunConfig c;
    for (const auto& [key, value] : file_values) apply_key(c, key, value);
    for (const auto& [key, value] : overrides) apply_key(c, key, value);
    return c;
}

std::string canonical_config_text(const RunConfig& c) {
    std::string out;
    for (const std::string& key : config_schema()) {
        out += key;
        out += "=";
        out += lookup(c, key);
        out += "\n";
    }
    return out;
}

std::uint64_t config_hash(const RunConfig& c) {
    std::string text = canonical_config_text(c);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_comment_block(const RunConfig& c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "# config_hash=%016" PRIx64 "\n", config_hash(c));
    std::string out = buf;
    for (const std::string& key : config_schema()) {
        out += "# " + key + "=" + lookup(c, key) + "\n";
    }
    return out;
}

std::vector<ThetaEstimate> parse_theta_table(const std::string& text) {
    std::vector<ThetaEstimate> out;
    for (const std::string& row : table_rows(text, kThetaHeader)) {
        std::vector<std::string> f = split_row(row, 8);
        ThetaEstimate e;
        e.lambda = parse_double("lambda", f[0]);
        e.n = parse_int("n", f[1]);
        e.trials = parse_uint("trials", f[2]);
        e.hits = parse_uint("hits", f[3]);
        e.theta = parse_double("theta", f[4]);
        e.ci_lo = parse_double("ci_lo", f[5]);
        e.ci_hi = parse_double("ci_hi", f[6]);
        e.seed = parse_uint("seed", f[7]);
        out.push_back(e);
    }
    return out;
}

std::string revealment_table_csv(const RevealmentEstimate& rev) {
    // Sorted by block for a deterministic artifact.
    std::vector<std::pair<BlockId, std::uint64_t>> rows(rev.counts.begin(), rev.counts.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.first.x != b.first.x ? a.first.x < b.first.x : a.first.y < b.first.y;
    });
    std::string out = std::string(kRevealHeader) + "\n";
    for (const auto& [z, count] : rows) {
        out += std::to_string(z.x) + "," + std::to_string(z.y) + "," +
               std::to_string(rev.trials) + "," + std::to_string(count) + "," +
               fmt_double(double(count) / double(rev.trials)) + "\n";
    }
    return out;
}

std::vector<RevealmentRow> parse_revealment_table(const std::string& text) {
    std::vector<RevealmentRow> out;
    for (const std::string& row : table_rows(text, kRevealHeader)) {
        std::vector<std::string> f = split_row(row, 5);
        RevealmentRow r;
        r.x = parse_int("block_x", f[0]);
        r.y = parse_int("block_y", f[1]);
        r.trials = parse_uint("trials", f[2]);
        r.count = parse_uint("count", f[3]);
        r.delta = parse_double("delta", f[4]);
        out.push_back(r);
    }
    return out;
}

std::string lambda_c_report_text(const LambdaCBracket& b) {
    std::string out = "lambda_c_report v1\n";
    out += "note=finite-size estimate: bisection bracket for theta_n at threshold\n";
    out += "lo=" + fmt_double(b.lo) + "\n";
    out += "hi=" + fmt_double(b.hi) + "\n";
    out += "midpoint=" + fmt_double(b.midpoint()) + "\n";
    out += "theta_lo=" + fmt_double(b.theta_lo) + "\n";
    out += "theta_hi=" + fmt_double(b.theta_hi) + "\n";
    out += "n=" + std::to_string(b.n) + "\n";
    out += "trials=" + std::to_string(b.trials) + "\n";
    out += "threshold=" + fmt_double(b.threshold) + "\n";
    out += "seed=" + std::to_string(b.seed) + "\n";
    out += "iterations=" + std::to_string(b.iterations) + "\n";
    return out;
}

std::string influence_report_text(const InfluenceEstimate& e) {
    std::string out = "influence_report v1\n";
    out += "z=" + std::to_string(e.z.x) + "," + std::to_string(e.z.y) + "\n";
    out += "lambda=" + fmt_double(e.lambda) + "\n";
    out += "n=" + std::to_string(e.n) + "\n";
    out += "trials=" + std::to_string(e.trials) + "\n";
    out += "inf_x=" + fmt_double(e.inf_x) + "\n";
    out += "inf_x_se=" + fmt_double(e.inf_x_se) + "\n";
    out += "inf_y=" + fmt_double(e.inf_y) + "\n";
    out += "inf_y_se=" + fmt_double(e.inf_y_se) + "\n";
    out += "inf_joint=" + fmt_double(e.inf_joint) + "\n";
    out += "inf_joint_se=" + fmt_double(e.inf_joint_se) + "\n";
    out += "piv_integral=" + fmt_double(e.piv_integral) + "\n";
    out += "piv_integral_se=" + fmt_double(e.piv_integral_se) + "\n";
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IO, "cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IO, "cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IO, "write failed for '" + path + "'");
}

void append_text_line(const std::string& path, const std::string& line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::IO, "cannot append to '" + path + "'");
    out << line << "\n";
    out.flush();
    if (!out) throw Error(ErrorCode::IO, "append failed for '" + path + "'");
}

std::string run_record_json(const RunRecord& rec) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, rec.config_hash);
    nlohmann::json j;
    j["command"] = rec.command;
    j["config_hash"] = buf;
    j["seed"] = rec.seed;
    j["started_at"] = rec.started_at;
    j["finished_at"] = rec.finished_at;
    j["outputs"] = rec.outputs;
    j["tool_version"] = rec.tool_version;
    return j.dump();
}

}  // namespace coxlab
