#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "parafuse/error.hpp"

namespace parafuse::io {

inline std::string read_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw Error("error while reading " + path.string());
    }
    return buffer.str();
}

inline std::ifstream open_input(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return in;
}

/// Opens `path` for writing, creating parent directories.
inline std::ofstream open_output(std::filesystem::path const& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

inline void write_file(std::filesystem::path const& path, std::string const& content)
{
    auto out = open_output(path);
    out << content;
    if (!out) {
        throw Error("error while writing " + path.string());
    }
}

}  // namespace parafuse::io
