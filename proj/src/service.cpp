#include "colligo/service.hpp"

#include <optional>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace colligo {

using json = nlohmann::ordered_json;

struct RetrievalService::Impl {
    EmbeddingIndex index;
    EncoderParams params;
    Vocabulary vocab;
    std::int64_t checkpoint_step;
    httplib::Server server;

    Impl(EmbeddingIndex idx, EncoderParams p, Vocabulary v, std::int64_t step)
        : index(std::move(idx)), params(std::move(p)), vocab(std::move(v)), checkpoint_step(step) {
        server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(json{{"status", "ok"},
                                 {"n_products", index.size()},
                                 {"d", index.d},
                                 {"checkpoint_step", checkpoint_step}}
                                .dump(),
                            "application/json");
        });
        server.Get("/retrieve", [this](const httplib::Request& req, httplib::Response& res) {
            const auto fail = [&res](const std::string& message) {
                res.status = 400;
                res.set_content(json{{"error", message}}.dump(), "application/json");
            };
            if (!req.has_param("query")) return fail("missing query parameter");
            const std::string query = req.get_param_value("query");
            std::size_t k = 10;
            if (req.has_param("k")) {
                long long parsed = 0;
                try {
                    parsed = std::stoll(req.get_param_value("k"));
                } catch (const std::exception&) {
                    return fail("k must be an integer");
                }
                if (parsed <= 0) return fail("k must be > 0");
                k = static_cast<std::size_t>(parsed);
            }
            std::optional<std::string> category;
            if (req.has_param("category")) category = req.get_param_value("category");
            const Vec q = embed(params, tokenize(query, vocab));
            json body = json::array();
            for (const auto& [id, score] : retrieve_topk(index, q, k, category)) {
                body.push_back(json{{"product_id", id}, {"score", score}});
            }
            res.set_content(body.dump(), "application/json");
        });
    }
};

RetrievalService::RetrievalService(EmbeddingIndex index, EncoderParams params, Vocabulary vocab,
                                   std::int64_t checkpoint_step)
    : impl_(std::make_unique<Impl>(std::move(index), std::move(params), std::move(vocab),
                                   checkpoint_step)) {}

RetrievalService::~RetrievalService() { stop(); }

int RetrievalService::bind_any(const std::string& host) {
    return impl_->server.bind_to_any_port(host);
}

bool RetrievalService::listen_after_bind() { return impl_->server.listen_after_bind(); }

bool RetrievalService::listen(const std::string& host, int port) {
    return impl_->server.listen(host, port);
}

void RetrievalService::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace colligo
