// coxlab: simulation and verification lab for Cox percolation on random
// street systems. One command per process; see --help for the command list.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coxlab/analysis.hpp"
#include "coxlab/environment.hpp"
#include "coxlab/error.hpp"
#include "coxlab/io.hpp"
#include "coxlab/svg.hpp"

namespace {

constexpr char kToolVersion[] = "coxlab 1.0.0";

std::string iso8601_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Ctx {
    coxlab::RunConfig cfg;
    std::string command;
    std::string out_dir;
    std::vector<std::string> outputs;

    std::string path(const std::string& name) const { return out_dir + "/" + name; }

    void emit(const std::string& name, const std::string& body, bool with_header = true) {
        std::string content;
        if (with_header) content = coxlab::config_comment_block(cfg);
        content += body;
        coxlab::write_text_file(path(name), content);
        outputs.push_back(path(name));
        std::printf("wrote %s\n", path(name).c_str());
    }
};

coxlab::ValidatedParams params_of(const coxlab::RunConfig& cfg) {
    return coxlab::validate_params(cfg.model);
}

void run_check_env(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    coxlab::ValidatedParams p = params_of(c);
    coxlab::Environment env(p, coxlab::BlockWindow{std::max<std::int64_t>(c.n, 3)}, c.seed);
    coxlab::ConditionReport rep =
        coxlab::check_conditions(env, c.model.eta, c.q0, c.trials, c.seed);
    ctx.emit("check_env.txt", rep.to_text());
}

void run_theta(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    coxlab::ThetaEstimate est =
        coxlab::estimate_theta(params_of(c), c.model.lambda, c.n, c.trials, c.seed);
    ctx.emit("theta.csv", coxlab::theta_table_csv({est}));
}

void run_sweep(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    if (c.lambda_list.empty()) {
        throw coxlab::Error(coxlab::ErrorCode::CONFIG, "key 'lambda_list': required for sweep");
    }
    std::vector<coxlab::ThetaEstimate> rows =
        coxlab::theta_sweep(params_of(c), c.lambda_list, c.n, c.trials, c.seed);
    ctx.emit("sweep.csv", coxlab::theta_table_csv(rows));
}

void run_lambda_c(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    coxlab::LambdaCBracket b = coxlab::estimate_lambda_c(
        params_of(c), c.n, c.trials, c.threshold, c.tol, c.lambda_lo, c.lambda_hi, c.seed);
    ctx.emit("lambda_c.txt", coxlab::lambda_c_report_text(b));
}

void run_sharpness(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    if (c.lambda_list.empty() || c.n_list.empty()) {
        throw coxlab::Error(coxlab::ErrorCode::CONFIG,
                            "key 'lambda_list': sharpness needs lambda_list and n_list");
    }
    coxlab::SharpnessReport rep =
        coxlab::fit_sharpness(params_of(c), c.lambda_list, c.n_list, c.trials, c.seed);
    ctx.emit("sharpness.txt", rep.to_text());
    ctx.emit("sharpness.csv", coxlab::theta_table_csv(rep.table));
}

void run_influence(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    coxlab::InfluenceEstimate est = coxlab::estimate_influences(
        params_of(c), c.model.lambda, c.n, coxlab::BlockId{c.z_x, c.z_y}, c.trials, c.seed);
    ctx.emit("influence.txt", coxlab::influence_report_text(est));
}

void run_reveal(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    coxlab::RevealmentEstimate rev =
        coxlab::estimate_revealment(params_of(c), c.model.lambda, c.n, c.trials, c.seed);
    ctx.emit("revealment.csv", coxlab::revealment_table_csv(rev));
}

void run_verify(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    coxlab::InequalityKind kind;
    try {
        kind = coxlab::inequality_kind_from_name(c.kind);
    } catch (const coxlab::Error& e) {
        throw coxlab::Error(coxlab::ErrorCode::CONFIG, std::string("key 'kind': ") + e.what());
    }
    coxlab::InequalityReport rep =
        coxlab::verify_inequality(kind, params_of(c), c.model.lambda, c.n, c.trials, c.seed);
    ctx.emit("verify_" + c.kind + ".txt", rep.to_text());
}

void run_plot(Ctx& ctx) {
    const coxlab::RunConfig& c = ctx.cfg;
    if (c.table.empty()) {
        throw coxlab::Error(coxlab::ErrorCode::CONFIG, "key 'table': required for plot");
    }
    coxlab::PlotKind kind = coxlab::plot_kind_from_name(c.kind);
    std::string table_text = coxlab::read_text_file(c.table);
    std::string svg =
        coxlab::render_plot(kind, table_text, coxlab::config_comment_block(c));
    ctx.emit(std::string(coxlab::plot_kind_name(kind)) + ".svg", svg, /*with_header=*/false);
}

int run(const std::string& command, const std::string& config_path,
        const coxlab::KeyValues& overrides) {
    Ctx ctx;
    coxlab::KeyValues file_values;
    if (!config_path.empty()) {
        file_values = coxlab::parse_kv_text(coxlab::read_text_file(config_path));
    }
    ctx.cfg = coxlab::resolve_config(file_values, overrides);
    ctx.command = command;
    // Validate model parameters up front: bad values are config errors.
    if (command != "plot") params_of(ctx.cfg);

    ctx.out_dir = ctx.cfg.output_dir;
    if (ctx.out_dir.empty()) {
        const char* env_dir = std::getenv("COXLAB_OUTPUT_DIR");
        ctx.out_dir = env_dir && *env_dir ? env_dir : ".";
    }
    std::filesystem::create_directories(ctx.out_dir);

    coxlab::RunRecord rec;
    rec.command = command;
    rec.config_hash = coxlab::config_hash(ctx.cfg);
    rec.seed = ctx.cfg.seed;
    rec.started_at = iso8601_now();
    rec.tool_version = kToolVersion;

    if (command == "check-env") run_check_env(ctx);
    else if (command == "theta") run_theta(ctx);
    else if (command == "sweep") run_sweep(ctx);
    else if (command == "lambda-c") run_lambda_c(ctx);
    else if (command == "sharpness") run_sharpness(ctx);
    else if (command == "influence") run_influence(ctx);
    else if (command == "reveal") run_reveal(ctx);
    else if (command == "verify") run_verify(ctx);
    else if (command == "plot") run_plot(ctx);

    rec.finished_at = iso8601_now();
    rec.outputs = ctx.outputs;
    coxlab::append_text_line(ctx.out_dir + "/runs.jsonl", coxlab::run_record_json(rec));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cox percolation on random street systems: simulation and verification"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string verify_kind;
    coxlab::KeyValues overrides;

    auto add_command = [&](const std::string& name, const std::string& desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->set_help_flag("--help", "print this help");  // frees --h for the config key
        cmd->add_option("--config", config_path, "flat key = value config file");
        for (const std::string& key : coxlab::config_schema()) {
            cmd->add_option_function<std::string>(
                "--" + key,
                [&overrides, key](const std::string& value) {
                    overrides.emplace_back(key, value);
                },
                "override config key '" + key + "'");
        }
        return cmd;
    };

    add_command("check-env", "environment condition report (one-dependence, mass bound, ...)");
    add_command("theta", "estimate theta_n(lambda) at a single point");
    add_command("sweep", "coupled theta estimates over lambda_list");
    add_command("lambda-c", "bisection bracket for the finite-size critical intensity");
    add_command("sharpness", "sub/supercritical regression diagnostics");
    add_command("influence", "resampling influences and pivotal integral for one block");
    add_command("reveal", "per-block revealment of the exploration algorithm");
    CLI::App* verify = add_command("verify", "statistical check of a named inequality");
    verify->add_option("inequality", verify_kind,
                       "osss | efron_stein | russo | piv_lemma | inf_lemma | differential");
    add_command("plot", "render an SVG plot from a saved table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;  // bad flags and unknown keys are config errors
    }

    CLI::App* sub = app.get_subcommands().front();
    std::string command = sub->get_name();
    if (command == "verify" && !verify_kind.empty()) {
        overrides.emplace_back("kind", verify_kind);
    }

    try {
        return run(command, config_path, overrides);
    } catch (const coxlab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        bool config_error = e.code() == coxlab::ErrorCode::CONFIG ||
                            e.code() == coxlab::ErrorCode::INVALID_GRID ||
                            e.code() == coxlab::ErrorCode::INVALID_SCALE ||
                            e.code() == coxlab::ErrorCode::NONPOSITIVE;
        return config_error ? 1 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
