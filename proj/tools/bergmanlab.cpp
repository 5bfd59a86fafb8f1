#include "bergmanlab/lab.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

struct Args {
    std::string config;
    std::string out;
    int threads = 0;
    std::uint64_t seed = 0;
};

int threads_from(const Args& a, const CLI::App& sub)
{
    if (sub.count("--threads"))
        return a.threads;
    if (const char* env = std::getenv("BERGMANLAB_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw bergmanlab::ConfigError(std::string("BERGMANLAB_THREADS is not an integer: ") + env);
        }
    }
    return 1;
}

void print_summary(const bergmanlab::RunReport& rep, const std::string& out)
{
    for (const auto& v : rep.payload.at("verdicts"))
        std::cout << (v.at("pass").get<bool>() ? "PASS " : "FAIL ") << v.at("name").get<std::string>() << " "
                  << v.at("value").dump() << " " << v.at("comparison").get<std::string>() << " "
                  << v.at("tolerance").dump() << (v.contains("upper") ? " " + v.at("upper").dump() : "") << "\n";
    const auto& s = rep.payload.at("summary");
    std::cout << s.at("status").get<std::string>() << " " << s.at("passed").get<std::size_t>() << "/"
              << s.at("verdicts").get<std::size_t>() << " verdicts, report in " << out << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bergman space operator lab"};
    app.require_subcommand(1);
    Args args;
    auto add_common = [&](CLI::App* sub, bool with_run_options) {
        sub->add_option("config", args.config, "JSON run config")->required()->check(CLI::ExistingFile);
        if (with_run_options) {
            sub->add_option("--out", args.out, "output directory");
            sub->add_option("--threads", args.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
            sub->add_option("--seed", args.seed, "override the config seed");
        }
    };
    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run an experiment over the sweep values");
    CLI::App* validate_cmd = app.add_subcommand("validate", "check a config without running it");
    add_common(run_cmd, true);
    add_common(sweep_cmd, true);
    add_common(validate_cmd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const bergmanlab::RunConfig cfg = bergmanlab::load_config(args.config);
        if (validate_cmd->parsed()) {
            std::cout << "config OK: experiment " << cfg.experiment << (cfg.sweep ? " (sweep)" : "") << "\n";
            return 0;
        }
        CLI::App* sub = run_cmd->parsed() ? run_cmd : sweep_cmd;
        bergmanlab::RunOptions opts;
        opts.threads = threads_from(args, *sub);
        if (sub->count("--seed"))
            opts.seed = args.seed;
        opts.out_dir = !args.out.empty() ? args.out : (!cfg.out_dir.empty() ? cfg.out_dir : "bergmanlab_out");
        const bergmanlab::RunReport rep =
            sweep_cmd->parsed() ? bergmanlab::sweep(cfg, opts) : bergmanlab::run(cfg, opts);
        print_summary(rep, opts.out_dir);
        return rep.all_passed ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
