#pragma once

// Deterministic synthetic corpus of small Python-like source files, shared
// by the unit and acceptance suites. Seeded generation only; no wall clock,
// no global state.

#include <string>
#include <vector>

#include "pxmix/corpus.hpp"
#include "pxmix/rng.hpp"

namespace test_fixtures {

inline const char* kNouns[] = {"value", "total", "result", "count", "index", "buffer", "node",  "item",
                               "score", "width", "height", "offset", "weight", "name",  "entry", "cache"};
inline const char* kVerbs[] = {"compute", "update", "merge", "scan", "build", "filter", "reduce", "parse"};

inline std::string identifier(pxmix::SplitMix64& rng) {
    std::string s = kVerbs[rng.bounded(std::size(kVerbs))];
    s += "_";
    s += kNouns[rng.bounded(std::size(kNouns))];
    return s;
}

inline std::string variable(pxmix::SplitMix64& rng) { return kNouns[rng.bounded(std::size(kNouns))]; }

inline std::string number(pxmix::SplitMix64& rng) { return std::to_string(rng.bounded(100)); }

inline std::string function_block(pxmix::SplitMix64& rng) {
    std::string fn = identifier(rng);
    std::string a = variable(rng);
    std::string b = variable(rng);
    while (b == a) b = variable(rng);
    std::string acc = variable(rng);
    std::string out;
    switch (rng.bounded(4)) {
        case 0:
            out += "def " + fn + "(" + a + ", " + b + "):\n";
            out += "    \"\"\"Return the " + fn + " of " + a + " and " + b + ".\"\"\"\n";
            out += "    " + acc + " = " + a + " * " + number(rng) + " + " + b + "\n";
            out += "    if " + acc + " > " + number(rng) + ":\n";
            out += "        return " + acc + " - " + number(rng) + "\n";
            out += "    return " + acc + "\n";
            break;
        case 1:
            out += "def " + fn + "(" + a + "):\n";
            out += "    " + acc + " = 0\n";
            out += "    for i in range(len(" + a + ")):\n";
            out += "        " + acc + " += " + a + "[i] * " + number(rng) + "\n";
            out += "    return " + acc + "\n";
            break;
        case 2:
            out += "def " + fn + "(" + a + ", " + b + "=" + number(rng) + "):\n";
            out += "    if not " + a + ":\n";
            out += "        raise ValueError(\"empty " + a + "\")\n";
            out += "    return [" + b + " + x for x in " + a + "]\n";
            break;
        default:
            out += "class " + fn + ":\n";
            out += "    def __init__(self, " + a + "):\n";
            out += "        self." + a + " = " + a + "\n";
            out += "        self." + acc + " = " + number(rng) + "\n";
            out += "    def " + b + "(self):\n";
            out += "        return self." + a + " + self." + acc + "\n";
            break;
    }
    return out;
}

inline std::string table_block(pxmix::SplitMix64& rng) {
    std::string name = variable(rng);
    std::string out = name + " = {\n";
    std::size_t rows = 6 + rng.bounded(8);
    for (std::size_t i = 0; i < rows; ++i)
        out += "    \"" + identifier(rng) + "\": " + number(rng) + ",\n";
    out += "}\n";
    return out;
}

inline std::string code_doc(pxmix::SplitMix64& rng) {
    std::string out = "import os\nimport sys\n\n";
    std::size_t blocks = 3 + rng.bounded(4);
    for (std::size_t i = 0; i < blocks; ++i) {
        out += rng.bounded(4) == 0 ? table_block(rng) : function_block(rng);
        out += "\n";
    }
    if (rng.bounded(2) == 0) {
        out += "if __name__ == '__main__':\n";
        out += "    print(" + variable(rng) + ")\n";
    }
    return out;
}

inline std::vector<pxmix::CorpusDoc> code_corpus(std::size_t n, std::uint64_t seed) {
    std::vector<pxmix::CorpusDoc> docs;
    docs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        pxmix::SplitMix64 rng(pxmix::mix64(seed) ^ i);
        docs.push_back({"doc-" + std::to_string(i), code_doc(rng)});
    }
    return docs;
}

inline std::vector<std::string> code_texts(std::size_t n, std::uint64_t seed) {
    std::vector<std::string> out;
    out.reserve(n);
    for (auto& d : code_corpus(n, seed)) out.push_back(std::move(d.text));
    return out;
}

}  // namespace test_fixtures
