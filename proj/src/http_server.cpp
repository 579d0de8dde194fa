#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "lexlearn/service.hpp"

namespace lexlearn {

struct HttpServer::Impl {
    ChatService& service;
    httplib::Server server;
    std::thread worker;
    int port = -1;

    explicit Impl(ChatService& s) : service(s) {}

    void reply(httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    }

    void routes() {
        const auto& cfg = service.config();
        // Reject absurd bodies before buffering them; the service enforces the
        // configured limit itself so oversize requests get a JSON 400.
        server.set_payload_max_length(std::max<std::size_t>(cfg.max_body_bytes * 4, 1 << 20));

        if (!cfg.cors_origin.empty()) {
            server.set_default_headers({{"Access-Control-Allow-Origin", cfg.cors_origin},
                                        {"Access-Control-Allow-Headers", "Content-Type"},
                                        {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
            server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
                res.status = 204;
            });
        }

        server.Post("/api/sessions", [this](const httplib::Request&, httplib::Response& res) {
            reply(res, service.create_session());
        });
        server.Post(R"(/api/sessions/([^/]+)/messages)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        reply(res, service.post_message(req.matches[1], req.body));
                    });
        server.Post(R"(/api/sessions/([^/]+)/selections)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        reply(res, service.post_selection(req.matches[1], req.body));
                    });
        server.Get(R"(/api/sessions/([^/]+)/posterior)",
                   [this](const httplib::Request& req, httplib::Response& res) {
                       std::optional<std::string> word;
                       if (req.has_param("word")) {
                           word = req.get_param_value("word");
                       }
                       reply(res, service.get_posterior(req.matches[1], word));
                   });
        server.Get("/api/lexicon", [this](const httplib::Request&, httplib::Response& res) {
            reply(res, service.get_lexicon());
        });
        server.Get("/api/ontology", [this](const httplib::Request&, httplib::Response& res) {
            reply(res, service.get_ontology());
        });

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty()) {
                return;
            }
            nlohmann::json body{{"error", res.status == 404 ? "not_found" : "http_error"},
                                {"detail", "HTTP " + std::to_string(res.status)}};
            res.set_content(body.dump(), "application/json");
        });
        server.set_exception_handler(
            [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
                std::string detail = "internal error";
                try {
                    std::rethrow_exception(ep);
                } catch (const std::exception& e) {
                    detail = e.what();
                } catch (...) {
                }
                res.status = 500;
                res.set_content(nlohmann::json{{"error", "internal"}, {"detail", detail}}.dump(),
                                "application/json");
            });
    }
};

HttpServer::HttpServer(ChatService& service) : impl_(std::make_unique<Impl>(service)) {
    impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    const auto& cfg = impl_->service.config();
    if (cfg.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(cfg.host);
    } else if (impl_->server.bind_to_port(cfg.host, cfg.port)) {
        impl_->port = cfg.port;
    } else {
        impl_->port = -1;
    }
    if (impl_->port < 0) {
        throw std::runtime_error("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    }
    return impl_->port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

int HttpServer::start_background() {
    int port = bind();
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port;
}

void HttpServer::stop() {
    if (!impl_) {
        return;
    }
    impl_->server.stop();
    if (impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

}  // namespace lexlearn
