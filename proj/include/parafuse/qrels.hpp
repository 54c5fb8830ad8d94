#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "parafuse/error.hpp"

namespace parafuse {

/// Query id -> set of relevant item ids. Sets are never empty.
using Qrels = std::map<std::string, std::set<std::string>>;

/// Reads "qid 0 docid rel" lines; rel <= 0 lines are ignored.
inline Qrels read_qrels(std::istream& in)
{
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        std::string qid;
        std::string iter;
        std::string docid;
        int rel = 0;
        std::string extra;
        if (!(fields >> qid >> iter >> docid >> rel) || (fields >> extra)) {
            throw Error("malformed qrels line " + std::to_string(line_no) + ": '" + line + "'");
        }
        if (rel > 0) {
            qrels[qid].insert(docid);
        }
    }
    return qrels;
}

inline void write_qrels(std::ostream& out, Qrels const& qrels)
{
    for (auto const& [qid, relevant] : qrels) {
        for (auto const& docid : relevant) {
            out << qid << " 0 " << docid << " 1\n";
        }
    }
}

}  // namespace parafuse
