#pragma once

/// Exact dot-product retrieval over an embedding matrix, the PFEMB1 file
/// format, and a deterministic feature-hashing embedder.

#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "parafuse/error.hpp"
#include "parafuse/io.hpp"
#include "parafuse/scored_list.hpp"
#include "parafuse/text.hpp"

namespace parafuse::dense {

class EmbeddingMatrix {
   public:
    EmbeddingMatrix() = default;

    /// Validates shape, id uniqueness and finiteness of every value.
    EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> values)
        : dim_(dim), ids_(std::move(ids)), values_(std::move(values))
    {
        if (dim_ == 0) {
            throw Error("embedding dimension must be positive");
        }
        if (values_.size() != ids_.size() * dim_) {
            throw Error("embedding matrix has " + std::to_string(values_.size()) +
                        " values for " + std::to_string(ids_.size()) + " rows of dim " +
                        std::to_string(dim_));
        }
        for (std::size_t r = 0; r < ids_.size(); ++r) {
            if (!row_index_.emplace(ids_[r], r).second) {
                throw Error("duplicate embedding id '" + ids_[r] + "'");
            }
            for (auto const v : row(r)) {
                if (!std::isfinite(v)) {
                    throw Error("non-finite value in embedding row '" + ids_[r] + "'");
                }
            }
        }
    }

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t rows() const { return ids_.size(); }
    [[nodiscard]] std::vector<std::string> const& ids() const { return ids_; }
    [[nodiscard]] std::vector<float> const& values() const { return values_; }

    [[nodiscard]] std::span<float const> row(std::size_t r) const
    {
        return {values_.data() + r * dim_, dim_};
    }

    [[nodiscard]] std::optional<std::size_t> find(std::string const& id) const
    {
        auto it = row_index_.find(id);
        if (it == row_index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Row for `id`; throws naming the id when absent.
    [[nodiscard]] std::span<float const> at(std::string const& id) const
    {
        auto r = find(id);
        if (!r) {
            throw Error("no embedding for '" + id + "'");
        }
        return row(*r);
    }

    friend bool operator==(EmbeddingMatrix const& a, EmbeddingMatrix const& b)
    {
        return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.values_ == b.values_;
    }

   private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> values_;
    std::unordered_map<std::string, std::size_t> row_index_;
};

/// Sum of float products accumulated in double.
inline double dot(std::span<float const> a, std::span<float const> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

/// Exhaustive top-`n` by raw dot product. Every row is scored, so rows with
/// zero or negative scores are still returned when n allows.
inline ScoredList dense_topn(EmbeddingMatrix const& matrix, std::span<float const> query,
                             std::size_t n, std::string query_id = {})
{
    if (query.size() != matrix.dim()) {
        throw Error("query vector has dim " + std::to_string(query.size()) +
                    " but the matrix has dim " + std::to_string(matrix.dim()));
    }
    if (n == 0) {
        throw ValidationError("query depth n must be >= 1");
    }
    std::vector<ScoredEntry> entries;
    entries.reserve(matrix.rows());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        entries.push_back({matrix.ids()[r], dot(matrix.row(r), query)});
    }
    return ScoredList::top_n(std::move(query_id), std::move(entries), n);
}

// ---- embedders ----------------------------------------------------------------

template <typename E>
concept Embedder = requires(E const& e, std::string_view text) {
    { e.dim() } -> std::convertible_to<std::size_t>;
    { e.embed(text) } -> std::same_as<std::vector<float>>;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char const c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Signed feature hashing of tokens, L2-normalized. Stand-in for a neural
/// encoder; identical across platforms because the hash is fixed.
class ReferenceEmbedder {
   public:
    explicit ReferenceEmbedder(std::size_t dim = 256, std::uint64_t seed = 13,
                               std::size_t max_tokens = 0)
        : dim_(dim), seed_(seed), max_tokens_(max_tokens)
    {
        if (dim_ < 8) {
            throw ValidationError("reference embedder needs dim >= 8");
        }
    }

    [[nodiscard]] std::size_t dim() const { return dim_; }

    /// `max_tokens` > 0 truncates the token stream before hashing.
    [[nodiscard]] std::vector<float> embed(std::string_view s) const
    {
        std::vector<double> acc(dim_, 0.0);
        auto tokens = text::tokenize(s);
        if (max_tokens_ > 0 && tokens.size() > max_tokens_) {
            tokens.resize(max_tokens_);
        }
        for (auto const& t : tokens) {
            auto const h = detail::splitmix64(detail::fnv1a(t) ^ seed_);
            auto const bucket = h % dim_;
            auto const sign = (detail::splitmix64(h) & 1U) != 0 ? 1.0 : -1.0;
            acc[bucket] += sign;
        }
        double norm = 0.0;
        for (auto const v : acc) {
            norm += v * v;
        }
        norm = std::sqrt(norm);
        std::vector<float> out(dim_, 0.0F);
        if (norm > 0.0) {
            for (std::size_t i = 0; i < dim_; ++i) {
                out[i] = static_cast<float>(acc[i] / norm);
            }
        }
        return out;
    }

   private:
    std::size_t dim_;
    std::uint64_t seed_;
    std::size_t max_tokens_;
};

inline std::vector<float> reference_embed(std::string_view s, std::size_t dim = 256,
                                          std::uint64_t seed = 13)
{
    return ReferenceEmbedder(dim, seed).embed(s);
}

/// Embeds every (id, text) item into a matrix.
template <Embedder E>
EmbeddingMatrix embed_all(E const& embedder,
                          std::vector<std::pair<std::string, std::string>> const& items)
{
    std::vector<std::string> ids;
    std::vector<float> values;
    ids.reserve(items.size());
    values.reserve(items.size() * embedder.dim());
    for (auto const& [id, body] : items) {
        ids.push_back(id);
        auto const v = embedder.embed(body);
        values.insert(values.end(), v.begin(), v.end());
    }
    return EmbeddingMatrix(embedder.dim(), std::move(ids), std::move(values));
}

// ---- PFEMB1 file format ------------------------------------------------------
//
//   "PFEMB1" | u32 dim | u32 count | count*dim float32 | UTF-8 JSON array of ids
//   all integers and floats little-endian

inline constexpr std::string_view embedding_magic = "PFEMB1";

inline std::string serialize_embeddings(EmbeddingMatrix const& m)
{
    std::string out(embedding_magic);
    auto const put_u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            out.push_back(static_cast<char>(v & 0xFF));
            v >>= 8;
        }
    };
    put_u32(static_cast<std::uint32_t>(m.dim()));
    put_u32(static_cast<std::uint32_t>(m.rows()));
    for (auto const v : m.values()) {
        put_u32(std::bit_cast<std::uint32_t>(v));
    }
    out += nlohmann::json(m.ids()).dump();
    return out;
}

inline EmbeddingMatrix deserialize_embeddings(std::string_view data)
{
    if (data.size() < embedding_magic.size() || data.substr(0, embedding_magic.size()) != embedding_magic) {
        throw Error("not a PFEMB1 embedding file (bad magic)");
    }
    std::size_t pos = embedding_magic.size();
    auto const get_u32 = [&]() {
        if (data.size() - pos < 4) {
            throw Error("embedding file truncated");
        }
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) {
            v = (v << 8) | static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)]);
        }
        pos += 4;
        return v;
    };
    auto const dim = get_u32();
    auto const count = get_u32();
    if (dim == 0) {
        throw Error("embedding file declares dim 0");
    }
    auto const n_values = static_cast<std::uint64_t>(dim) * count;
    if ((data.size() - pos) / 4 < n_values) {
        throw Error("embedding file truncated: expected " + std::to_string(count) + " rows of dim " +
                    std::to_string(dim));
    }
    std::vector<float> values;
    values.reserve(n_values);
    for (std::uint64_t i = 0; i < n_values; ++i) {
        values.push_back(std::bit_cast<float>(get_u32()));
    }
    std::vector<std::string> ids;
    try {
        ids = nlohmann::json::parse(data.substr(pos)).get<std::vector<std::string>>();
    } catch (nlohmann::json::exception const& e) {
        throw Error(std::string("embedding file: bad id array: ") + e.what());
    }
    if (ids.size() != count) {
        throw Error("embedding file lists " + std::to_string(ids.size()) + " ids for " +
                    std::to_string(count) + " rows");
    }
    for (std::size_t r = 0; r < count; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if (!std::isfinite(values[r * dim + c])) {
                throw Error("non-finite value in embedding row '" + ids[r] + "'");
            }
        }
    }
    return EmbeddingMatrix(dim, std::move(ids), std::move(values));
}

inline void save_embeddings(EmbeddingMatrix const& m, std::filesystem::path const& path)
{
    io::write_file(path, serialize_embeddings(m));
}

inline EmbeddingMatrix load_embeddings(std::filesystem::path const& path)
{
    return deserialize_embeddings(io::read_file(path));
}

}  // namespace parafuse::dense
