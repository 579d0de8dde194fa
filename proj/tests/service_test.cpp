#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "lexlearn/service.hpp"
#include "lexlearn/storage.hpp"
#include "test_support.hpp"

using namespace lexlearn;
using lexlearn::testing::TempDir;
using nlohmann::json;

namespace {

ServiceConfig config_in(const TempDir& dir) {
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.ontology = lexlearn::testing::hr1099_path();
    cfg.lexicon = dir / "lexicon.json";
    cfg.log_dir = dir / "logs";
    return cfg;
}

std::string create(ChatService& svc) {
    auto r = svc.create_session();
    EXPECT_EQ(r.status, 201);
    return r.body["session_id"];
}

std::string message(const std::string& text) { return json{{"text", text}}.dump(); }

std::string selection(const std::string& word, const std::string& entity) {
    return json{{"word", word}, {"entity", entity}}.dump();
}

json parse(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

TEST(ServiceConfig, FromJson) {
    auto cfg = ServiceConfig::from_json(
        {{"port", 9000}, {"ontology", "o.json"}, {"lexicon", "l.json"}, {"log_dir", "logs"},
         {"k", 4}, {"strategy", "diverse"}, {"threshold", 0.8}},
        "/srv/lex");
    EXPECT_EQ(cfg.port, 9000);
    EXPECT_EQ(cfg.ontology, std::filesystem::path("/srv/lex/o.json"));
    EXPECT_EQ(cfg.elicitation.k, 4u);
    EXPECT_EQ(cfg.elicitation.strategy, Strategy::diverse);
    EXPECT_DOUBLE_EQ(cfg.elicitation.commit_threshold, 0.8);
    EXPECT_THROW(ServiceConfig::from_json({{"ontology", "o"}, {"lexicon", "l"}}),
                 std::invalid_argument);
    EXPECT_THROW(ServiceConfig::from_json(
                     {{"ontology", "o"}, {"lexicon", "l"}, {"log_dir", "d"}, {"bogus", 1}}),
                 std::invalid_argument);
    EXPECT_THROW(ServiceConfig::from_json(
                     {{"ontology", "o"}, {"lexicon", "l"}, {"log_dir", "d"}, {"port", 70000}}),
                 std::invalid_argument);
}

TEST(ChatService, DialogueAndStatusCodes) {
    TempDir dir;
    ChatService svc(config_in(dir));
    auto a = create(svc);
    auto b = create(svc);
    EXPECT_NE(a, b);

    EXPECT_EQ(svc.post_message("nope", message("hi")).status, 404);
    EXPECT_EQ(svc.post_message(a, message("")).status, 400);
    EXPECT_EQ(svc.post_message(a, "{bad").status, 400);
    EXPECT_EQ(svc.post_message(a, std::string(70 * 1024, 'x')).status, 400);
    EXPECT_EQ(svc.post_message(a, std::string(70 * 1024, 'x')).body["error"], "body_too_large");

    auto none = svc.post_selection(a, selection("external", "john_contractor"));
    EXPECT_EQ(none.status, 409);
    EXPECT_EQ(none.body["error"], "no_active_episode");
    EXPECT_TRUE(none.body.contains("detail"));

    auto answer = svc.post_message(b, message("1099 for contractors"));
    EXPECT_EQ(answer.status, 200);
    EXPECT_EQ(answer.body["type"], "answer");

    auto e = svc.post_message(a, message("1099 for externals"));
    EXPECT_EQ(e.status, 200);
    EXPECT_EQ(e.body["type"], "elicitation");
    EXPECT_EQ(e.body["word"], "external");
    EXPECT_EQ(e.body["candidates"].size(), 3u);
    EXPECT_EQ(e.body["candidates"][0], (json{{"id", "john_contractor"}, {"label", "John Contractor"}}));

    auto prior = svc.get_posterior(a, "external");
    EXPECT_EQ(prior.status, 200);
    EXPECT_EQ(prior.body["n"], 0);
    EXPECT_EQ(prior.body["mass"].size(), 10u);
    EXPECT_EQ(svc.get_posterior(a, "unheard").status, 404);
    EXPECT_EQ(svc.get_posterior(a, std::nullopt).status, 400);
    EXPECT_EQ(svc.get_posterior("nope", "external").status, 404);

    auto offered = svc.post_selection(a, selection("external", "mary_lawyer"));
    EXPECT_EQ(offered.status, 409);
    EXPECT_EQ(offered.body["error"], "candidate_not_offered");
    EXPECT_EQ(svc.post_selection(a, selection("external", "nobody")).status, 400);

    auto s1 = svc.post_selection(a, selection("external", "john_contractor"));
    EXPECT_EQ(s1.status, 200);
    EXPECT_EQ(s1.body["status"], "learning");
    EXPECT_EQ(s1.body["posterior"]["mass"][0]["node"], "john_contractor");
    EXPECT_NEAR(s1.body["posterior"]["mass"][0]["p"].get<double>(), 0.72, 1e-9);

    auto s2 = svc.post_selection(a, selection("external", "mary_lawyer"));
    EXPECT_EQ(s2.status, 200);
    EXPECT_EQ(s2.body["status"], "committed");
    EXPECT_EQ(s2.body["committed_node"], "contractor");
    EXPECT_NEAR(s2.body["confidence"].get<double>(), 12.0 / 13.0, 1e-9);

    auto lex = svc.get_lexicon();
    EXPECT_EQ(lex.body["external"]["node"], "contractor");
    EXPECT_EQ(svc.get_ontology().body, lexlearn::testing::hr1099()->to_json());
    EXPECT_EQ(json::parse(lexlearn::read_file(dir / "lexicon.json")), lex.body);
}

TEST(ChatService, UnwritableLogDirGives503) {
    TempDir dir;
    ChatService svc(config_in(dir));
    std::filesystem::remove_all(dir / "logs");
    auto r = svc.create_session();
    EXPECT_EQ(r.status, 503);
    EXPECT_EQ(r.body["error"], "storage_unavailable");
}

TEST(ChatService, RestartReplaysLogsToIdenticalState) {
    TempDir dir;
    std::string a, b;
    json before_a, before_b, lexicon, ontology;
    {
        ChatService svc(config_in(dir));
        a = create(svc);
        b = create(svc);
        svc.post_message(a, message("1099 for externals and vendors"));
        svc.post_selection(a, selection("external", "john_contractor"));
        svc.post_selection(a, selection("external", "mary_lawyer"));
        svc.post_message(b, message("freelancers please"));
        svc.post_selection(b, selection("freelancer", "john_contractor"));
        before_a = svc.get_posterior(a, "vendor").body;
        before_b = svc.get_posterior(b, "freelancer").body;
        lexicon = svc.get_lexicon().body;
        ontology = svc.get_ontology().body;
    }
    ChatService again(config_in(dir));
    EXPECT_EQ(again.session_count(), 2u);
    EXPECT_EQ(again.get_posterior(a, "vendor").body, before_a);
    EXPECT_EQ(again.get_posterior(b, "freelancer").body, before_b);
    EXPECT_EQ(again.get_lexicon().body, lexicon);
    EXPECT_EQ(again.get_ontology().body, ontology);

    // The restored session keeps going where it left off.
    auto next = again.post_selection(b, selection("freelancer", "mary_lawyer"));
    EXPECT_EQ(next.body["status"], "committed");
}

TEST(HttpServer, GoldenTranscript) {
    TempDir dir;
    ChatService svc(config_in(dir));
    HttpServer server(svc);
    int port = server.start_background();
    httplib::Client cli("127.0.0.1", port);

    auto created = cli.Post("/api/sessions", "", "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    EXPECT_EQ(created->get_header_value("Content-Type"), "application/json");
    std::string id = parse(created)["session_id"];
    std::string base = "/api/sessions/" + id;

    auto e = cli.Post(base + "/messages", message("1099 for externals"), "application/json");
    ASSERT_TRUE(e);
    EXPECT_EQ(e->status, 200);
    EXPECT_EQ(parse(e)["type"], "elicitation");

    auto s1 = cli.Post(base + "/selections", selection("external", "john_contractor"),
                       "application/json");
    EXPECT_EQ(parse(s1)["status"], "learning");
    auto s2 = cli.Post(base + "/selections", selection("external", "mary_lawyer"),
                       "application/json");
    auto j = parse(s2);
    EXPECT_EQ(j["status"], "committed");
    EXPECT_EQ(j["committed_node"], "contractor");
    EXPECT_NEAR(j["confidence"].get<double>(), 12.0 / 13.0, 1e-9);

    auto post = cli.Get(base + "/posterior?word=external");
    EXPECT_EQ(post->status, 200);
    EXPECT_EQ(parse(post)["n"], 2);

    auto lex = cli.Get("/api/lexicon");
    EXPECT_EQ(parse(lex)["external"]["node"], "contractor");
    auto onto = cli.Get("/api/ontology");
    EXPECT_EQ(parse(onto), lexlearn::testing::hr1099()->to_json());

    auto missing = cli.Post("/api/sessions/none/messages", message("hi"), "application/json");
    EXPECT_EQ(missing->status, 404);
    EXPECT_EQ(parse(missing)["error"], "unknown_session");
    auto route = cli.Get("/api/nothing");
    EXPECT_EQ(route->status, 404);
    EXPECT_TRUE(parse(route).contains("error"));
    auto conflict = cli.Post(base + "/selections", selection("external", "john_contractor"),
                             "application/json");
    EXPECT_EQ(conflict->status, 409);
    EXPECT_EQ(parse(conflict)["error"], "no_active_episode");

    server.stop();
}

TEST(HttpServer, ConcurrentSessionsMatchSerialRuns) {
    const std::vector<std::string> words{"external", "freelancer", "vendor",  "consultant",
                                         "partner",  "temp",       "outsider", "agent"};
    auto script = [](httplib::Client& cli, const std::string& word) {
        std::vector<json> replies;
        auto id = parse(cli.Post("/api/sessions", "", "application/json"))["session_id"]
                      .get<std::string>();
        std::string base = "/api/sessions/" + id;
        replies.push_back(parse(cli.Post(base + "/messages", message("1099 for " + word),
                                         "application/json")));
        for (const auto* entity : {"john_contractor", "mary_lawyer"}) {
            replies.push_back(parse(
                cli.Post(base + "/selections", selection(word, entity), "application/json")));
        }
        return replies;
    };

    std::map<std::string, std::vector<json>> serial;
    {
        TempDir dir;
        ChatService svc(config_in(dir));
        HttpServer server(svc);
        httplib::Client cli("127.0.0.1", server.start_background());
        for (const auto& w : words) serial[w] = script(cli, w);
        server.stop();
    }

    TempDir dir;
    ChatService svc(config_in(dir));
    HttpServer server(svc);
    int port = server.start_background();
    std::map<std::string, std::vector<json>> parallel;
    std::mutex mu;
    std::vector<std::thread> threads;
    for (const auto& w : words) {
        threads.emplace_back([&, w] {
            httplib::Client cli("127.0.0.1", port);
            auto r = script(cli, w);
            std::lock_guard lock(mu);
            parallel[w] = std::move(r);
        });
    }
    for (auto& t : threads) t.join();
    server.stop();

    EXPECT_EQ(parallel, serial);
    EXPECT_EQ(svc.session_count(), words.size());
    EXPECT_EQ(svc.get_lexicon().body.size(), words.size());
}
