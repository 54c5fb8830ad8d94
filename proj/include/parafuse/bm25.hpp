#pragma once

/// In-memory BM25 inverted index (Lucene-style idf) over documents or paragraphs.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "parafuse/corpus.hpp"
#include "parafuse/error.hpp"
#include "parafuse/scored_list.hpp"
#include "parafuse/text.hpp"

namespace parafuse::lexical {

enum class Granularity : std::uint8_t { document = 0, paragraph = 1 };

inline std::string_view to_string(Granularity g)
{
    return g == Granularity::document ? "document" : "paragraph";
}

inline Granularity parse_granularity(std::string_view s)
{
    if (s == "document") {
        return Granularity::document;
    }
    if (s == "paragraph") {
        return Granularity::paragraph;
    }
    throw ValidationError("granularity must be 'document' or 'paragraph', got '" +
                          std::string(s) + "'");
}

struct Posting {
    std::uint32_t ordinal = 0;
    std::uint32_t tf = 0;

    friend bool operator==(Posting const&, Posting const&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const
    {
        if (!(k1 >= 0.0) || !std::isfinite(k1)) {
            throw ValidationError("bm25 k1 must be finite and >= 0");
        }
        if (!(b >= 0.0 && b <= 1.0)) {
            throw ValidationError("bm25 b must lie in [0, 1]");
        }
    }
};

/// Index items for a corpus. Paragraph granularity yields one item per
/// segment (intro and summary count as paragraphs) keyed by ParagraphRef;
/// document granularity yields the concatenated case text keyed by case id.
inline std::vector<std::pair<std::string, std::string>> index_items(
    std::vector<corpus::Case> const& cases, Granularity granularity)
{
    std::vector<std::pair<std::string, std::string>> items;
    for (auto const& c : cases) {
        if (granularity == Granularity::document) {
            items.emplace_back(c.case_id, c.full_text());
        } else {
            for (auto const& [ref, segment] : c.segments()) {
                items.emplace_back(ref.str(), std::string(segment));
            }
        }
    }
    return items;
}

namespace detail {

inline void put_varint(std::string& out, std::uint64_t v)
{
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7F) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

inline void put_f64(std::string& out, double v)
{
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>(bits & 0xFF));
        bits >>= 8;
    }
}

inline void put_bytes(std::string& out, std::string_view s)
{
    put_varint(out, s.size());
    out.append(s);
}

class Reader {
   public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint64_t varint()
    {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            auto const byte = static_cast<unsigned char>(take(1)[0]);
            v |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
            if ((byte & 0x80) == 0) {
                return v;
            }
        }
        throw Error("index file: varint overflow");
    }

    double f64()
    {
        auto const bytes = take(8);
        std::uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) {
            bits = (bits << 8) | static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]);
        }
        return std::bit_cast<double>(bits);
    }

    std::string_view bytes() { return take(varint()); }

    std::string_view take(std::uint64_t n)
    {
        if (n > data_.size() - pos_) {
            throw Error("index file truncated");
        }
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    [[nodiscard]] bool done() const { return pos_ == data_.size(); }

   private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline constexpr std::string_view index_magic = "PFIX1";

class Bm25Index {
   public:
    /// Throws on duplicate ids or when no item has any token.
    static Bm25Index build(std::vector<std::pair<std::string, std::string>> const& items,
                           Granularity granularity, Bm25Params params = {})
    {
        params.validate();
        Bm25Index index;
        index.granularity_ = granularity;
        index.params_ = params;
        std::unordered_set<std::string> seen;
        bool any_tokens = false;
        for (auto const& [id, body] : items) {
            if (!seen.insert(id).second) {
                throw Error("duplicate item id '" + id + "' while building index");
            }
            auto const ordinal = static_cast<std::uint32_t>(index.ids_.size());
            index.ids_.push_back(id);
            auto const tokens = text::tokenize(body);
            index.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
            any_tokens = any_tokens || !tokens.empty();
            std::unordered_map<std::string_view, std::uint32_t> tf;
            for (auto const& t : tokens) {
                ++tf[t];
            }
            for (auto const& [term, count] : tf) {
                index.postings_[std::string(term)].push_back({ordinal, count});
            }
        }
        if (!any_tokens) {
            throw Error("cannot build an index where no item has any token");
        }
        index.finish();
        return index;
    }

    [[nodiscard]] Granularity granularity() const { return granularity_; }
    [[nodiscard]] Bm25Params const& params() const { return params_; }
    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] double avg_length() const { return avg_length_; }
    [[nodiscard]] std::string const& item_id(std::size_t ordinal) const { return ids_.at(ordinal); }
    [[nodiscard]] std::uint32_t item_length(std::size_t ordinal) const
    {
        return lengths_.at(ordinal);
    }
    [[nodiscard]] std::size_t term_count() const { return postings_.size(); }

    [[nodiscard]] std::vector<Posting> const* postings(std::string const& term) const
    {
        auto it = postings_.find(term);
        return it == postings_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t document_frequency(std::string const& term) const
    {
        auto const* p = postings(term);
        return p == nullptr ? 0 : p->size();
    }

    /// ln(1 + (N - df + 0.5) / (df + 0.5))
    [[nodiscard]] double idf(std::size_t df) const
    {
        auto const n = static_cast<double>(ids_.size());
        auto const d = static_cast<double>(df);
        return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
    }

    /// Per-occurrence contribution of a term with document frequency `df`
    /// appearing `tf` times in an item of `length` tokens.
    [[nodiscard]] double term_score(std::size_t df, std::uint32_t tf, std::uint32_t length) const
    {
        auto const f = static_cast<double>(tf);
        auto const norm = 1.0 - params_.b + params_.b * static_cast<double>(length) / avg_length_;
        return idf(df) * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
    }

    /// BM25 score of one item. Repeated query tokens contribute once per occurrence.
    [[nodiscard]] double score(std::vector<std::string> const& query_tokens,
                               std::size_t ordinal) const
    {
        if (ordinal >= ids_.size()) {
            throw Error("item ordinal " + std::to_string(ordinal) + " out of range");
        }
        double total = 0.0;
        for (auto const& [term, count] : group_terms(query_tokens)) {
            auto const* list = postings(term);
            if (list == nullptr) {
                continue;
            }
            auto it = std::lower_bound(
                list->begin(), list->end(), ordinal,
                [](Posting const& p, std::size_t o) { return p.ordinal < o; });
            if (it != list->end() && it->ordinal == ordinal) {
                total += static_cast<double>(count) *
                         term_score(list->size(), it->tf, lengths_[ordinal]);
            }
        }
        return total;
    }

    /// Top-`n` items with a positive score, in ranking order.
    [[nodiscard]] ScoredList query_topn(std::string_view query_text, std::size_t n,
                                        std::string query_id = {}) const
    {
        return query_tokens_topn(text::tokenize(query_text), n, std::move(query_id));
    }

    [[nodiscard]] ScoredList query_tokens_topn(std::vector<std::string> const& query_tokens,
                                               std::size_t n, std::string query_id = {}) const
    {
        if (n == 0) {
            throw ValidationError("query depth n must be >= 1");
        }
        std::vector<double> acc(ids_.size(), 0.0);
        std::vector<std::uint32_t> touched;
        // Term-at-a-time in the same term order as score(), so the sums are bit-identical.
        for (auto const& [term, count] : group_terms(query_tokens)) {
            auto const* list = postings(term);
            if (list == nullptr) {
                continue;
            }
            for (auto const& p : *list) {
                if (acc[p.ordinal] == 0.0) {
                    touched.push_back(p.ordinal);
                }
                acc[p.ordinal] +=
                    static_cast<double>(count) * term_score(list->size(), p.tf, lengths_[p.ordinal]);
            }
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        std::vector<ScoredEntry> entries;
        entries.reserve(touched.size());
        for (auto const o : touched) {
            if (acc[o] > 0.0) {
                entries.push_back({ids_[o], acc[o]});
            }
        }
        return ScoredList::top_n(std::move(query_id), std::move(entries), n);
    }

    /// Versioned little-endian binary form; terms are written in sorted order so
    /// equal indexes serialize to identical bytes.
    [[nodiscard]] std::string serialize() const
    {
        std::string out(index_magic);
        out.push_back(static_cast<char>(granularity_));
        detail::put_f64(out, params_.k1);
        detail::put_f64(out, params_.b);
        detail::put_varint(out, ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            detail::put_bytes(out, ids_[i]);
            detail::put_varint(out, lengths_[i]);
        }
        std::vector<std::string const*> terms;
        terms.reserve(postings_.size());
        for (auto const& [term, list] : postings_) {
            terms.push_back(&term);
        }
        std::sort(terms.begin(), terms.end(), [](auto a, auto b) { return *a < *b; });
        detail::put_varint(out, terms.size());
        for (auto const* term : terms) {
            auto const& list = postings_.at(*term);
            detail::put_bytes(out, *term);
            detail::put_varint(out, list.size());
            std::uint32_t prev = 0;
            for (std::size_t i = 0; i < list.size(); ++i) {
                detail::put_varint(out, i == 0 ? list[i].ordinal : list[i].ordinal - prev);
                detail::put_varint(out, list[i].tf);
                prev = list[i].ordinal;
            }
        }
        return out;
    }

    static Bm25Index deserialize(std::string_view data)
    {
        detail::Reader in(data);
        if (in.take(index_magic.size()) != index_magic) {
            throw Error("not a PFIX1 index file (bad magic)");
        }
        Bm25Index index;
        auto const g = static_cast<std::uint8_t>(in.take(1)[0]);
        if (g > 1) {
            throw Error("index file: unknown granularity byte " + std::to_string(g));
        }
        index.granularity_ = static_cast<Granularity>(g);
        index.params_.k1 = in.f64();
        index.params_.b = in.f64();
        try {
            index.params_.validate();
        } catch (ValidationError const& e) {
            throw Error(std::string("index file: ") + e.what());
        }
        auto const n_items = in.varint();
        std::unordered_set<std::string_view> seen;
        for (std::uint64_t i = 0; i < n_items; ++i) {
            index.ids_.emplace_back(in.bytes());
            index.lengths_.push_back(static_cast<std::uint32_t>(in.varint()));
        }
        for (auto const& id : index.ids_) {
            if (!seen.insert(id).second) {
                throw Error("index file: duplicate item id '" + id + "'");
            }
        }
        auto const n_terms = in.varint();
        for (std::uint64_t t = 0; t < n_terms; ++t) {
            std::string term(in.bytes());
            auto const n_postings = in.varint();
            std::vector<Posting> list;
            list.reserve(n_postings);
            std::uint64_t ordinal = 0;
            for (std::uint64_t i = 0; i < n_postings; ++i) {
                auto const gap = in.varint();
                if (i > 0 && gap == 0) {
                    throw Error("index file: postings of '" + term + "' not strictly increasing");
                }
                ordinal += gap;
                auto const tf = in.varint();
                if (ordinal >= n_items || tf == 0) {
                    throw Error("index file: corrupt posting for '" + term + "'");
                }
                list.push_back({static_cast<std::uint32_t>(ordinal), static_cast<std::uint32_t>(tf)});
            }
            index.postings_.emplace(std::move(term), std::move(list));
        }
        if (!in.done()) {
            throw Error("index file: trailing bytes");
        }
        index.finish();
        return index;
    }

    void save(std::ostream& out) const
    {
        auto const bytes = serialize();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error("failed to write index");
        }
    }

    static Bm25Index load(std::istream& in)
    {
        std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
        return deserialize(data);
    }

   private:
    static std::vector<std::pair<std::string, std::size_t>> group_terms(
        std::vector<std::string> const& tokens)
    {
        std::vector<std::pair<std::string, std::size_t>> grouped;
        std::unordered_map<std::string_view, std::size_t> position;
        for (auto const& t : tokens) {
            auto [it, inserted] = position.emplace(t, grouped.size());
            if (inserted) {
                grouped.emplace_back(t, 1);
            } else {
                ++grouped[it->second].second;
            }
        }
        return grouped;
    }

    void finish()
    {
        double total = 0.0;
        for (auto const len : lengths_) {
            total += len;
        }
        avg_length_ = ids_.empty() ? 0.0 : total / static_cast<double>(ids_.size());
        if (!(avg_length_ > 0.0)) {
            throw Error("index has no tokens");
        }
    }

    Granularity granularity_ = Granularity::paragraph;
    Bm25Params params_;
    std::vector<std::string> ids_;
    std::vector<std::uint32_t> lengths_;
    double avg_length_ = 0.0;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

}  // namespace parafuse::lexical
