// lexlearn: command-line front end for simulation, batch studies, ontology
// validation and the chat service.
//
// Exit codes: simulate returns 0 when the word was committed, 1 when it was
// not; every command returns 2 on input or file errors.

#include <csignal>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexlearn/errors.hpp"
#include "lexlearn/service.hpp"
#include "lexlearn/simulation.hpp"

namespace {

constexpr int kExitError = 2;

std::vector<std::string> split_observations(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        auto first = item.find_first_not_of(" \t");
        auto last = item.find_last_not_of(" \t");
        if (first != std::string::npos) {
            out.push_back(item.substr(first, last - first + 1));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

struct ElicitationFlags {
    std::size_t k = 3;
    std::string strategy = "infogain";
    double threshold = 0.9;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd, bool with_seed = true) {
        cmd->add_option("--k", k, "Candidates shown per elicitation")->capture_default_str();
        cmd->add_option("--strategy", strategy, "Candidate strategy: diverse | infogain")
            ->capture_default_str();
        cmd->add_option("--threshold", threshold, "Commit threshold in (0, 1]")
            ->capture_default_str();
        if (with_seed) {
            cmd->add_option("--seed", seed, "Seed for randomized tie-breaking")->capture_default_str();
        }
    }

    lexlearn::ElicitationConfig config() const {
        lexlearn::ElicitationConfig cfg;
        cfg.k = k;
        cfg.strategy = lexlearn::parse_strategy(strategy);
        cfg.commit_threshold = threshold;
        cfg.seed = seed;
        return cfg;
    }
};

lexlearn::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn the meaning of unknown words from a few user-picked examples"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Posterior trajectory for one word");
    std::string sim_ontology, sim_word, sim_observations, sim_format = "table", sim_out;
    ElicitationFlags sim_flags;
    simulate->add_option("--ontology", sim_ontology, "Ontology JSON file")->required();
    simulate->add_option("--word", sim_word, "Word being learned")->required();
    simulate->add_option("--observations", sim_observations,
                         "Comma-separated entity ids or labels, e.g. \"John Contractor,Mary Lawyer\"");
    sim_flags.attach(simulate);
    simulate->add_option("--format", sim_format, "table | json | csv")->capture_default_str();
    simulate->add_option("--out", sim_out, "Write the report here instead of stdout");

    // batch
    auto* batch = app.add_subcommand("batch", "Observations-to-identify study over many trials");
    std::string batch_ontology, batch_gen, batch_learner = "bayes", batch_target,
                batch_format = "table", batch_out;
    std::size_t batch_trials = 100, batch_max_obs = 10;
    std::uint64_t batch_seed = 0;
    unsigned batch_threads = 1;
    ElicitationFlags batch_flags;
    batch->add_option("--trials", batch_trials, "Number of trials")->capture_default_str();
    batch->add_option("--seed", batch_seed, "Base seed")->capture_default_str();
    batch->add_option("--learner", batch_learner, "bayes | rule_intersection | frequency_baseline")
        ->capture_default_str();
    auto* ont_opt = batch->add_option("--ontology", batch_ontology, "Ontology JSON file");
    auto* gen_opt = batch->add_option("--gen", batch_gen, "Generated tree: depth:D,branch:B,leaves:E");
    ont_opt->excludes(gen_opt);
    batch->add_option("--target", batch_target, "True concept (random per trial when omitted)");
    batch->add_option("--max-obs", batch_max_obs, "Observations drawn per trial")
        ->capture_default_str();
    batch->add_option("--threads", batch_threads, "Worker threads")->capture_default_str();
    batch_flags.attach(batch, false);
    batch->add_option("--format", batch_format, "table | json | csv")->capture_default_str();
    batch->add_option("--out", batch_out, "Write the report here instead of stdout");

    // validate
    auto* validate = app.add_subcommand("validate", "Load and check an ontology document");
    std::string val_ontology;
    validate->add_option("--ontology", val_ontology, "Ontology JSON file")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP chat service");
    std::string serve_config;
    serve->add_option("--config", serve_config, "Service config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }

    try {
        if (*simulate) {
            auto ontology =
                std::make_shared<const lexlearn::Ontology>(lexlearn::Ontology::load_file(sim_ontology));
            auto cfg = sim_flags.config();
            cfg.validate(*ontology);
            auto obs = split_observations(sim_observations);
            auto result = lexlearn::run_scenario(ontology, sim_word, obs, cfg);
            auto text = lexlearn::emit_report(result, lexlearn::parse_report_format(sim_format), sim_out);
            if (sim_out.empty()) std::cout << text;
            return result.commit_step ? 0 : 1;
        }
        if (*batch) {
            if (batch_ontology.empty() == batch_gen.empty()) {
                std::cerr << "batch: exactly one of --ontology or --gen is required\n";
                return kExitError;
            }
            auto ontology = std::make_shared<const lexlearn::Ontology>(
                batch_gen.empty()
                    ? lexlearn::Ontology::load_file(batch_ontology)
                    : lexlearn::generate_tree(lexlearn::GeneratorSpec::parse(batch_gen)));
            lexlearn::BatchOptions opts;
            opts.trials = batch_trials;
            opts.seed = batch_seed;
            opts.learner = lexlearn::parse_learner(batch_learner);
            if (!batch_target.empty()) opts.target = batch_target;
            opts.max_observations = batch_max_obs;
            opts.elicitation = batch_flags.config();
            opts.threads = batch_threads;
            auto report = lexlearn::run_batch(ontology, opts);
            auto text =
                lexlearn::emit_report(report, lexlearn::parse_report_format(batch_format), batch_out);
            if (batch_out.empty()) std::cout << text;
            return 0;
        }
        if (*validate) {
            auto o = lexlearn::Ontology::load_file(val_ontology);
            std::cout << "ok: " << o.concepts().size() << " concepts, " << o.entities().size()
                      << " entities, root '" << o.root() << "'\n";
            return 0;
        }
        if (*serve) {
            lexlearn::ChatService service(lexlearn::ServiceConfig::load_file(serve_config));
            lexlearn::HttpServer server(service);
            int port = server.bind();
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << service.config().host << ":" << port << " ("
                      << service.session_count() << " sessions restored)\n";
            server.listen();
            g_server = nullptr;
            return 0;
        }
    } catch (const lexlearn::ValidationError& e) {
        std::cerr << "invalid ontology (" << e.offending_id() << "): " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
