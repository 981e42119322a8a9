#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pxmix/util.hpp"

namespace pxmix {

struct CorpusDoc {
    std::string id;
    std::string text;
};

// Corpus format: JSONL, one {"id": string, "text": string} object per line.
inline std::vector<CorpusDoc> load_corpus_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open corpus: " + path);
    std::vector<CorpusDoc> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
        }
        if (!j.contains("id") || !j.contains("text"))
            throw DataError(path + ":" + std::to_string(lineno) + ": corpus record needs \"id\" and \"text\"");
        docs.push_back({j["id"].get<std::string>(), j["text"].get<std::string>()});
    }
    return docs;
}

inline void save_corpus_jsonl(const std::string& path, const std::vector<CorpusDoc>& docs) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw UsageError("cannot write corpus: " + path);
    for (const CorpusDoc& d : docs) {
        nlohmann::json j;
        j["id"] = d.id;
        j["text"] = d.text;
        f << j.dump() << "\n";
    }
    if (!f) throw DataError("short write: " + path);
}

}  // namespace pxmix
