#include "recall/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "recall/error.hpp"

namespace recall::retrieval {

namespace {

// FNV-1a, fixed 64-bit, so vectors are stable across platforms.
uint64_t fnv1a64(const std::string& s, uint64_t seed) {
    uint64_t h = 14695981039346656037ull ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

constexpr uint64_t kBucketSeed = 0x9e3779b97f4a7c15ull;
constexpr uint64_t kSignSeed = 0xc2b2ae3d27d4eb4full;

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace

HashingEmbedder::HashingEmbedder(int dimension) : dimension_(dimension) {
    if (dimension <= 0) {
        throw Error("embedder dimension must be positive");
    }
}

std::string HashingEmbedder::id() const {
    return "fnv-signed-hash-" + std::to_string(dimension_) + "/1";
}

EmbeddingVector HashingEmbedder::embed(const std::string& text) const {
    EmbeddingVector v;
    v.values.assign(static_cast<size_t>(dimension_), 0.0);
    for (const auto& token : tokenize(text)) {
        const size_t bucket = fnv1a64(token, kBucketSeed) % static_cast<uint64_t>(dimension_);
        const double sign = (fnv1a64(token, kSignSeed) & 1ull) ? 1.0 : -1.0;
        v.values[bucket] += sign;
    }
    double sumsq = 0.0;
    for (double x : v.values) sumsq += x * x;
    if (sumsq > 0.0) {
        const double inv = 1.0 / std::sqrt(sumsq);
        for (double& x : v.values) x *= inv;
        v.norm = 1.0;
    } else {
        v.norm = 0.0;
    }
    return v;
}

EmbeddingVector embed_text(const std::string& text, int dimension) {
    return HashingEmbedder(dimension).embed(text);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
    if (a.values.size() != b.values.size()) {
        throw Error("cosine: dimension mismatch");
    }
    double dot = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot;
}

RetrievalIndex::RetrievalIndex(std::vector<Entry> entries, std::string embedder_id)
    : entries_(std::move(entries)), embedder_id_(std::move(embedder_id)) {}

RetrievalIndex build_index(const memory::ExperiencePool& pool, const Embedder& embedder) {
    const auto solved = memory::success_view(pool);
    std::vector<RetrievalIndex::Entry> entries;
    for (const auto& task : pool.tasks()) {
        if (solved.count(task.id)) {
            entries.push_back({task.id, embedder.embed(task.instruction)});
        }
    }
    return RetrievalIndex(std::move(entries), embedder.id());
}

RetrievalIndex build_index(const memory::ExperiencePool& pool, int dimension) {
    return build_index(pool, HashingEmbedder(dimension));
}

std::vector<std::pair<std::string, double>> query_topk(const RetrievalIndex& index,
                                                       const std::string& query_text,
                                                       int k,
                                                       const Embedder& embedder) {
    if (k < 0) {
        throw Error("query_topk: k must be >= 0");
    }
    const EmbeddingVector q = embedder.embed(query_text);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(index.size());
    for (const auto& entry : index.entries()) {
        scored.emplace_back(entry.task_id, cosine(q, entry.vector));
    }
    // stable sort keeps insertion order on ties
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    const size_t n = std::min<size_t>(static_cast<size_t>(k), scored.size());
    scored.resize(n);
    return scored;
}

std::vector<std::pair<std::string, double>> query_topk(const RetrievalIndex& index,
                                                       const std::string& query_text,
                                                       int k) {
    const int dim = index.empty() ? kDefaultDimension
                                  : static_cast<int>(index.entries().front().vector.values.size());
    return query_topk(index, query_text, k, HashingEmbedder(dim));
}

}  // namespace recall::retrieval
