#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "coxlab/analysis.hpp"
#include "coxlab/params.hpp"

namespace coxlab {

// Fully resolved run configuration: every model parameter plus the
// command-specific knobs. Unknown keys are rejected by name; overrides
// (--key value) take precedence over file values.
struct RunConfig {
    ModelParams model;

    std::int64_t n = 10;
    std::vector<std::int64_t> n_list;    // comma-separated in the file
    std::vector<double> lambda_list;     // comma-separated in the file
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;
    double q0 = 0.9999;
    double threshold = 0.5;
    double tol = 0.01;
    double h = 0.0;                      // 0 means the default 0.1 * lambda
    double lambda_lo = 0.0;
    double lambda_hi = 4.0;
    std::int64_t z_x = 3;
    std::int64_t z_y = 3;
    std::string kind;                    // verify kind or plot kind
    std::string table;                   // input table path for `plot`
    std::string output_dir;              // empty: $COXLAB_OUTPUT_DIR or "."
    std::int64_t threads = 1;
    std::int64_t config_version = 1;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat `key = value` text with # comments and blank lines. Later entries for
// the same key override earlier ones. CONFIG on a malformed line.
KeyValues parse_kv_text(const std::string& text);

// The documented config schema: every recognized key, in canonical order.
const std::vector<std::string>& config_schema();

// Apply file values then overrides onto the defaults. CONFIG names the first
// unknown key or unparsable value.
RunConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides);

// Canonical serialization: one `key=value` line per schema key, in schema
// order, with %.17g doubles. Hash is FNV-1a over this text.
std::string canonical_config_text(const RunConfig& c);
std::uint64_t config_hash(const RunConfig& c);

// The canonical config as `# key=value` lines for artifact headers.
std::string config_comment_block(const RunConfig& c);

// Theta tables: comma-separated with the fixed header
// lambda,n,trials,hits,theta,ci_lo,ci_hi,seed; leading # comment lines are
// skipped. BAD_HEADER if the header row does not match.
std::vector<ThetaEstimate> parse_theta_table(const std::string& text);

// Revealment tables: header block_x,block_y,trials,count,delta.
struct RevealmentRow {
    std::int64_t x = 0, y = 0;
    std::uint64_t trials = 0, count = 0;
    double delta = 0.0;
};
std::string revealment_table_csv(const RevealmentEstimate& rev);
std::vector<RevealmentRow> parse_revealment_table(const std::string& text);

// Structured-text rendering for reports that lack a to_text of their own.
std::string lambda_c_report_text(const LambdaCBracket& b);
std::string influence_report_text(const InfluenceEstimate& e);

// Filesystem helpers. IO on failure, with the path in the message.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
void append_text_line(const std::string& path, const std::string& line);

// One run-log record as a single JSON object line.
struct RunRecord {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string started_at;   // ISO 8601 UTC
    std::string finished_at;
    std::vector<std::string> outputs;
    std::string tool_version;
};
std::string run_record_json(const RunRecord& rec);

}  // namespace coxlab
