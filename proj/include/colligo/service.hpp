#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "colligo/retrieval.hpp"

namespace colligo {

// Read-only HTTP retrieval service over a loaded index and checkpoint.
// GET /retrieve?query=...&k=...&category=...  -> JSON array of {product_id, score}
// GET /healthz                                -> index metadata
class RetrievalService {
public:
    RetrievalService(EmbeddingIndex index, EncoderParams params, Vocabulary vocab,
                     std::int64_t checkpoint_step);
    ~RetrievalService();

    // Binds an ephemeral port; returns it (-1 on failure).
    int bind_any(const std::string& host);
    bool listen_after_bind();  // blocking
    bool listen(const std::string& host, int port);  // blocking
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace colligo
