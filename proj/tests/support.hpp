#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "parafuse/scored_list.hpp"

namespace parafuse::testing {

// Fixed-seed generator; uses modulo rather than std distributions so sequences
// do not depend on the standard library implementation.
class Rng {
   public:
    explicit Rng(std::uint32_t seed) : gen_(seed) {}

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
    std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
    bool coin() { return (gen_() & 1U) != 0; }
    double unit() { return static_cast<double>(gen_() % 1000001U) / 1000000.0; }

    template <typename T>
    T const& pick(std::vector<T> const& v)
    {
        return v[below(v.size())];
    }

   private:
    std::mt19937 gen_;
};

inline std::filesystem::path source_dir() { return PARAFUSE_SOURCE_DIR; }

inline std::filesystem::path fresh_dir(std::string const& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("parafuse-test-" + std::to_string(::getpid()) + "-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::vector<std::string> ids_of(ScoredList const& list) { return list.ids(); }

}  // namespace parafuse::testing
