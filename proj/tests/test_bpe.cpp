#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <string>
#include <vector>

#include "pxmix/bpe.hpp"
#include "pxmix/rng.hpp"

using namespace pxmix;

namespace {
// Brute-force most-frequent adjacent pair inside pretokens, with the
// lexicographic tie-break on (left bytes, right bytes).
std::pair<std::string, std::string> best_pair_oracle(const std::vector<std::string>& corpus, Pretokenizer p) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
    for (const auto& doc : corpus)
        for (auto pre : pretokenize(doc, p))
            for (std::size_t i = 0; i + 1 < pre.size(); ++i)
                ++counts[{std::string(1, pre[i]), std::string(1, pre[i + 1])}];
    std::pair<std::string, std::string> best;
    std::uint64_t best_count = 0;
    for (const auto& [pair, count] : counts) {
        if (count > best_count || (count == best_count && pair < best)) {
            best = pair;
            best_count = count;
        }
    }
    return best;
}
}  // namespace

TEST_CASE("single merge on aaaa") {
    std::vector<std::string> corpus{"aaaa"};
    BpeTrainStats stats;
    BpeTokenizer tok = bpe_train(corpus, 257, Pretokenizer::DefaultRegex, &stats);
    CHECK(stats.reached_vocab == 257);
    CHECK(!stats.stopped_early);
    REQUIRE(tok.merges().size() == 1);
    CHECK(tok.merges()[0] == std::make_pair(BpeTokenizer::TokenId('a'), BpeTokenizer::TokenId('a')));
    CHECK(tok.token_bytes(256) == "aa");
    auto oracle = best_pair_oracle(corpus, Pretokenizer::DefaultRegex);
    CHECK(oracle == std::make_pair(std::string("a"), std::string("a")));
}

TEST_CASE("first merge matches the brute-force pair count oracle") {
    std::vector<std::string> corpus{"the cat sat on the mat", "the cat ate the rat"};
    BpeTokenizer tok = bpe_train(corpus, 257, Pretokenizer::DefaultRegex);
    REQUIRE(tok.merges().size() == 1);
    auto [a, b] = tok.merges()[0];
    auto oracle = best_pair_oracle(corpus, Pretokenizer::DefaultRegex);
    CHECK(tok.token_bytes(a) == oracle.first);
    CHECK(tok.token_bytes(b) == oracle.second);
}

TEST_CASE("ties merge the lexicographically smallest pair") {
    // "xy" and "ab" both appear twice; "ab" < "xy"
    std::vector<std::string> corpus{"xy ab xy ab"};
    BpeTokenizer tok = bpe_train(corpus, 257, Pretokenizer::DefaultRegex);
    REQUIRE(tok.merges().size() == 1);
    CHECK(tok.token_bytes(256) == "ab");
}

TEST_CASE("training stops early when no pair repeats") {
    std::vector<std::string> corpus{"abcdefg"};
    BpeTrainStats stats;
    BpeTokenizer tok = bpe_train(corpus, 400, Pretokenizer::DefaultRegex, &stats);
    CHECK(stats.stopped_early);
    CHECK(stats.reached_vocab == tok.vocab_size());
    CHECK(tok.vocab_size() < 400);
}

TEST_CASE("encode/decode roundtrip on arbitrary bytes") {
    std::vector<std::string> corpus{"def f(x):\n    return x + 1\n", "def g(y):\n    return y * 2\n"};
    for (Pretokenizer p : {Pretokenizer::DefaultRegex, Pretokenizer::LineSeparated}) {
        BpeTokenizer tok = bpe_train(corpus, 300, p);
        SplitMix64 rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            std::string doc;
            std::size_t len = rng.bounded(200);
            for (std::size_t i = 0; i < len; ++i) doc.push_back(static_cast<char>(rng.bounded(256)));
            auto ids = tok.encode(doc);
            CHECK(tok.decode(ids) == doc);
        }
        // in-distribution docs too
        for (const auto& doc : corpus) CHECK(tok.decode(tok.encode(doc)) == doc);
    }
}

TEST_CASE("merges never cross pretoken boundaries") {
    // 'a','b' always adjacent across a space boundary; with default
    // pretokenization "a b" never produces an "ab"-spanning token
    std::vector<std::string> corpus{"a b a b a b a b"};
    BpeTokenizer tok = bpe_train(corpus, 300, Pretokenizer::DefaultRegex);
    for (const auto& [l, r] : tok.merges()) {
        std::string merged = tok.token_bytes(l) + tok.token_bytes(r);
        bool has_word = merged.find_first_of("ab") != std::string::npos;
        bool has_space = merged.find(' ') != std::string::npos;
        CHECK(!(has_word && has_space));
    }
}

TEST_CASE("line pretokenizer keeps newlines attached") {
    auto pres = pretokenize("one\ntwo\nthree", Pretokenizer::LineSeparated);
    REQUIRE(pres.size() == 3);
    CHECK(pres[0] == "one\n");
    CHECK(pres[1] == "two\n");
    CHECK(pres[2] == "three");
}

TEST_CASE("default pretokenizer splits words, spaces, punctuation") {
    auto pres = pretokenize("foo_bar(x) + 1", Pretokenizer::DefaultRegex);
    std::vector<std::string> got(pres.begin(), pres.end());
    std::vector<std::string> want{"foo_bar", "(", "x", ")", " ", "+", " ", "1"};
    CHECK(got == want);
}

TEST_CASE("tokenizer json roundtrip") {
    std::vector<std::string> corpus{"roundtrip roundtrip roundtrip"};
    BpeTokenizer tok = bpe_train(corpus, 280, Pretokenizer::DefaultRegex);
    nlohmann::json j = tok.to_json();
    BpeTokenizer back = BpeTokenizer::from_json(j);
    CHECK(back.vocab_size() == tok.vocab_size());
    CHECK(back.to_json() == j);
    std::string doc = "roundtrip me please";
    CHECK(back.decode(back.encode(doc)) == doc);
}

TEST_CASE("training is deterministic") {
    std::vector<std::string> corpus{"some corpus with repeated repeated words words"};
    BpeTokenizer a = bpe_train(corpus, 290, Pretokenizer::DefaultRegex);
    BpeTokenizer b = bpe_train(corpus, 290, Pretokenizer::DefaultRegex);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("target vocab must exceed the byte alphabet") {
    std::vector<std::string> corpus{"abc"};
    CHECK_THROWS_AS(bpe_train(corpus, 256, Pretokenizer::DefaultRegex), UsageError);
}
