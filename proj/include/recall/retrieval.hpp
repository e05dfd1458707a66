#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "recall/memory.hpp"

namespace recall::retrieval {

inline constexpr int kDefaultDimension = 256;

// L2-normalized unless the text produced no tokens (then all-zero).
struct EmbeddingVector {
    std::vector<double> values;
    double norm = 0.0;  // 1.0 after normalization, 0.0 for the degenerate vector
};

// Deterministic built-in embedder: lowercase, split on non-alphanumerics,
// signed feature hashing (token hashed twice: bucket and sign), L2 normalize.
// A remote embedder can replace it behind the same Embedder interface.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    virtual EmbeddingVector embed(const std::string& text) const = 0;
};

class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(int dimension = kDefaultDimension);
    std::string id() const override;
    EmbeddingVector embed(const std::string& text) const override;
    int dimension() const { return dimension_; }

private:
    int dimension_;
};

// Convenience free function over the default embedder.
EmbeddingVector embed_text(const std::string& text, int dimension = kDefaultDimension);

// Cosine of two embeddings; defined as 0 when either side is the zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Immutable flat index over tasks that have a success trajectory,
// in pool insertion order. Queries are safe to run concurrently.
class RetrievalIndex {
public:
    struct Entry {
        std::string task_id;
        EmbeddingVector vector;
    };

    RetrievalIndex() = default;
    RetrievalIndex(std::vector<Entry> entries, std::string embedder_id);

    const std::vector<Entry>& entries() const { return entries_; }
    const std::string& embedder_id() const { return embedder_id_; }
    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

private:
    std::vector<Entry> entries_;
    std::string embedder_id_;
};

RetrievalIndex build_index(const memory::ExperiencePool& pool, const Embedder& embedder);
RetrievalIndex build_index(const memory::ExperiencePool& pool,
                           int dimension = kDefaultDimension);

// Top-k by cosine similarity, descending; ties broken by insertion order.
// Result length is min(k, index size).
std::vector<std::pair<std::string, double>> query_topk(const RetrievalIndex& index,
                                                       const std::string& query_text,
                                                       int k,
                                                       const Embedder& embedder);
std::vector<std::pair<std::string, double>> query_topk(const RetrievalIndex& index,
                                                       const std::string& query_text,
                                                       int k);

}  // namespace recall::retrieval
