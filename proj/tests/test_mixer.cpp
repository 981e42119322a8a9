#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "pxmix/bpe.hpp"
#include "pxmix/mixer.hpp"
#include "pxmix/rng.hpp"

#include "fixtures.hpp"

using namespace pxmix;

namespace {
MixConfig warmup_config() {
    MixConfig cfg;
    cfg.rate_final = 0.9;
    cfg.warmup = WarmupConfig{0.4, 0.9, 10000};
    return cfg;
}

// Closed-form piecewise integral average of the per-step pairing multiplier,
// used as an independent oracle for the summation implementation.
double warmup_average_integral(double a, double b, double c) {
    double m = c - 1.0;
    auto low_antideriv = [&](double r) { return (c / m) * (r + std::log(c - m * r) / m); };
    auto high_antideriv = [&](double r) { return -(c * c / (m * m)) * std::log(c - m * r) - (c / m) * r; };
    double integral = 0.0;
    if (a < 0.5) integral += low_antideriv(std::min(0.5, b)) - low_antideriv(a);
    if (b > 0.5) integral += high_antideriv(b) - high_antideriv(std::max(0.5, a));
    return integral / (b - a);
}
}  // namespace

TEST_CASE("mixing rate schedule endpoints") {
    MixConfig cfg = warmup_config();
    CHECK(mix_rate(0, cfg) == Catch::Approx(0.4).epsilon(1e-12));
    CHECK(mix_rate(10000, cfg) == Catch::Approx(0.9).epsilon(1e-12));
    CHECK(mix_rate(5000, cfg) == Catch::Approx(0.65).epsilon(1e-12));
    CHECK(mix_rate(10001, cfg) == Catch::Approx(0.9).epsilon(1e-12));
    CHECK(mix_rate(1000000, cfg) == Catch::Approx(0.9).epsilon(1e-12));

    MixConfig flat;
    flat.rate_final = 0.7;
    CHECK(mix_rate(0, flat) == Catch::Approx(0.7));
    CHECK(mix_rate(123, flat) == Catch::Approx(0.7));
}

TEST_CASE("calibrated pairing rate closed form") {
    CHECK(calibrated_pair_rate(0.9) == Catch::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(calibrated_pair_rate(0.5) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(calibrated_pair_rate(0.25) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    // branch continuity at 0.5
    CHECK(calibrated_pair_rate(0.5 - 1e-9) == Catch::Approx(calibrated_pair_rate(0.5 + 1e-9)).margin(1e-7));
    CHECK_THROWS_AS(calibrated_pair_rate(0.0), UsageError);
    CHECK_THROWS_AS(calibrated_pair_rate(1.0), UsageError);
}

TEST_CASE("effective multiplier") {
    CHECK(effective_multiplier(0.9, 3.7) == Catch::Approx(2.913).margin(0.005));
    CHECK(effective_multiplier(0.0, 3.7) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(effective_multiplier(1.0, 3.7) == Catch::Approx(3.7).epsilon(1e-12));
}

TEST_CASE("pairing multiplier") {
    CHECK(pairing_multiplier(0.9, 3.7) == Catch::Approx(2.622).margin(0.005));
    // both branch formulas agree at r = 0.5 for any C
    for (double c : {1.0, 2.0, 3.7, 10.0}) {
        double high = 1.0 / (1.0 / c + 1.0 / 0.5 - 1.0);
        double low = 1.0 / (1.0 + (0.5 / 0.5) / c);
        CHECK(high == Catch::Approx(low).epsilon(1e-12));
        CHECK(pairing_multiplier(0.5, c) == Catch::Approx(low).epsilon(1e-12));
    }
    // C = 1: pairs double the data, so throughput drops to r
    for (double r : {0.6, 0.75, 0.9}) CHECK(pairing_multiplier(r, 1.0) == Catch::Approx(r).epsilon(1e-12));
    CHECK_THROWS_AS(pairing_multiplier(0.0, 3.7), UsageError);
    CHECK_THROWS_AS(pairing_multiplier(1.0, 3.7), UsageError);
}

TEST_CASE("warmup average multiplier") {
    MixConfig cfg = warmup_config();
    double avg = warmup_average_multiplier(cfg, 3.7);
    CHECK(avg == Catch::Approx(1.38).margin(0.02));
    CHECK(avg == Catch::Approx(warmup_average_integral(0.4, 0.9, 3.7)).margin(1e-3));

    MixConfig zero;
    zero.rate_final = 0.0;
    zero.warmup = WarmupConfig{0.0, 0.0, 100};
    CHECK(warmup_average_multiplier(zero, 3.7) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(pairing_step_multiplier(1e-6, 3.7) == Catch::Approx(1.0).margin(1e-5));

    MixConfig no_warmup;
    CHECK_THROWS_AS(warmup_average_multiplier(no_warmup, 3.7), UsageError);
}

TEST_CASE("assignment: rate 0 yields raw only, rate 1 compressed only") {
    MixConfig cfg;
    cfg.rate_final = 0.0;
    for (int i = 0; i < 200; ++i) CHECK(assign_view_kind("doc-" + std::to_string(i), 0, cfg) == ViewKind::Raw);
    cfg.rate_final = 1.0;
    for (int i = 0; i < 200; ++i) CHECK(assign_view_kind("doc-" + std::to_string(i), 0, cfg) == ViewKind::Comp);
}

TEST_CASE("assignment fraction approaches the mixing rate") {
    MixConfig cfg;
    cfg.rate_final = 0.9;
    cfg.seed = 7;
    int comp = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i)
        if (assign_view_kind("doc-" + std::to_string(i), 0, cfg) == ViewKind::Comp) ++comp;
    CHECK(static_cast<double>(comp) / n == Catch::Approx(0.9).margin(0.01));
}

TEST_CASE("pairing keeps the effective compressed fraction on target") {
    MixConfig cfg;
    cfg.rate_final = 0.9;
    cfg.pairing = PairingMode::AlwaysOn;
    cfg.seed = 11;
    const int n = 50000;
    std::uint64_t comp_samples = 0;
    std::uint64_t raw_samples = 0;
    for (int i = 0; i < n; ++i) {
        ViewKind k = assign_view_kind("doc-" + std::to_string(i), 0, cfg);
        switch (k) {
            case ViewKind::Raw: ++raw_samples; break;
            case ViewKind::Comp: ++comp_samples; break;
            default:
                ++raw_samples;
                ++comp_samples;
        }
    }
    double fraction = static_cast<double>(comp_samples) / static_cast<double>(comp_samples + raw_samples);
    CHECK(fraction == Catch::Approx(0.9).margin(0.009));
}

TEST_CASE("pairing below 0.5 mixes pairs with raw") {
    MixConfig cfg;
    cfg.rate_final = 0.25;
    cfg.pairing = PairingMode::AlwaysOn;
    cfg.seed = 3;
    int pair = 0, raw = 0, comp = 0;
    for (int i = 0; i < 20000; ++i) {
        switch (assign_view_kind("d" + std::to_string(i), 0, cfg)) {
            case ViewKind::Raw: ++raw; break;
            case ViewKind::Comp: ++comp; break;
            default: ++pair;
        }
    }
    CHECK(comp == 0);  // pairs mix with raw below 0.5
    double fraction = static_cast<double>(pair) / static_cast<double>(pair + raw + comp);
    CHECK(fraction == Catch::Approx(1.0 / 3.0).margin(0.01));
}

TEST_CASE("warmup-only pairing switches off exactly at step T") {
    MixConfig cfg;
    cfg.rate_final = 0.9;
    cfg.warmup = WarmupConfig{0.4, 0.9, 100};
    cfg.pairing = PairingMode::WarmupOnly;
    cfg.seed = 5;
    bool pair_during = false;
    for (int i = 0; i < 3000; ++i)
        if (assign_view_kind("w" + std::to_string(i), 99, cfg) != ViewKind::Raw &&
            assign_view_kind("w" + std::to_string(i), 99, cfg) != ViewKind::Comp)
            pair_during = true;
    CHECK(pair_during);
    for (int i = 0; i < 3000; ++i) {
        ViewKind k = assign_view_kind("w" + std::to_string(i), 100, cfg);
        CHECK((k == ViewKind::Raw || k == ViewKind::Comp));
    }
}

TEST_CASE("pairing at extreme rates is an error") {
    MixConfig cfg;
    cfg.rate_final = 1.0;
    cfg.pairing = PairingMode::AlwaysOn;
    CHECK_THROWS_AS(assign_view_kind("x", 0, cfg), UsageError);
}

TEST_CASE("view framing") {
    VocabLayout layout = VocabLayout::layout_for(256);
    std::vector<std::uint32_t> comp{5, 6, 7};
    std::string doc = "hi";

    DocumentView raw = render_view("d", doc, ViewKind::Raw, comp, layout);
    REQUIRE(raw.symbols.size() == 4);
    CHECK(raw.symbols.front() == id_of(Sentinel::RawOpen));
    CHECK(raw.symbols[1] == byte_to_symbol('h'));
    CHECK(raw.symbols[2] == byte_to_symbol('i'));
    CHECK(raw.symbols.back() == id_of(Sentinel::RawClose));

    DocumentView cv = render_view("d", doc, ViewKind::Comp, comp, layout);
    REQUIRE(cv.symbols.size() == 5);
    CHECK(cv.symbols.front() == id_of(Sentinel::CompOpen));
    CHECK(cv.symbols[1] == 320 + 5);
    CHECK(cv.symbols.back() == id_of(Sentinel::CompClose));

    DocumentView pair = render_view("d", doc, ViewKind::PairRawFirst, comp, layout);
    REQUIRE(pair.symbols.size() == 9);
    CHECK(pair.symbols.front() == id_of(Sentinel::RawOpen));
    CHECK(pair.symbols[3] == id_of(Sentinel::RawClose));
    CHECK(pair.symbols[4] == id_of(Sentinel::CompOpen));
    CHECK(pair.symbols.back() == id_of(Sentinel::CompClose));

    DocumentView pair2 = render_view("d", doc, ViewKind::PairCompFirst, comp, layout);
    CHECK(pair2.symbols.front() == id_of(Sentinel::CompOpen));
    CHECK(pair2.symbols.back() == id_of(Sentinel::RawClose));
}

TEST_CASE("context packing worked examples") {
    ContextPacker packer(8);
    std::vector<PackedContext> out;
    auto sink = [&](PackedContext&& c) { out.push_back(std::move(c)); };

    DocumentView v1{"a", ViewKind::Raw, {0, 64, 65, 1}, 2, 0};
    DocumentView v2{"b", ViewKind::Raw, {0, 66, 67, 1}, 2, 0};
    packer.add(v1, sink);
    packer.add(v2, sink);
    packer.flush(sink);
    REQUIRE(out.size() == 1);
    CHECK(out[0].fill == 8);
    REQUIRE(out[0].spans.size() == 2);
    CHECK(out[0].spans[0].start == 0);
    CHECK(out[0].spans[0].end == 4);
    CHECK(out[0].spans[1].start == 4);
    CHECK(out[0].spans[1].end == 8);
    CHECK(!out[0].spans[1].continued);

    // 10-symbol view split 8 + 2 across two contexts
    out.clear();
    ContextPacker packer2(8);
    DocumentView big{"c", ViewKind::Comp, {2, 320, 321, 322, 323, 324, 325, 326, 327, 3}, 8, 8};
    packer2.add(big, sink);
    packer2.flush(sink);
    REQUIRE(out.size() == 2);
    CHECK(out[0].fill == 8);
    CHECK(out[1].fill == 2);
    REQUIRE(out[1].spans.size() == 1);
    CHECK(out[1].spans[0].continued);
    // padding is DocSep
    for (std::uint32_t i = out[1].fill; i < 8; ++i) CHECK(out[1].symbols[i] == id_of(Sentinel::DocSep));
}

TEST_CASE("boundary spans tile the fill on random streams") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        std::uint32_t context_len = 4 + static_cast<std::uint32_t>(rng.bounded(60));
        ContextPacker packer(context_len);
        std::vector<PackedContext> out;
        auto sink = [&](PackedContext&& c) { out.push_back(std::move(c)); };
        std::uint64_t total_symbols = 0;
        int views = 1 + static_cast<int>(rng.bounded(20));
        for (int v = 0; v < views; ++v) {
            DocumentView view;
            view.doc_id = "v" + std::to_string(v);
            view.kind = ViewKind::Raw;
            std::size_t len = 1 + rng.bounded(3 * context_len);
            for (std::size_t i = 0; i < len; ++i) view.symbols.push_back(byte_to_symbol(static_cast<std::uint8_t>(rng.bounded(256))));
            total_symbols += len;
            packer.add(view, sink);
        }
        packer.flush(sink);
        std::uint64_t covered = 0;
        for (const auto& ctx : out) {
            REQUIRE(ctx.fill <= context_len);
            std::uint32_t pos = 0;
            for (const auto& span : ctx.spans) {
                CHECK(span.start == pos);
                CHECK(span.end > span.start);
                pos = span.end;
                covered += span.end - span.start;
            }
            CHECK(pos == ctx.fill);
        }
        CHECK(covered == total_symbols);
    }
}

TEST_CASE("oracle translation prompt structure") {
    VocabLayout layout = VocabLayout::layout_for(256);
    IdentityCompressor id;
    std::string p = "def solve(x):";
    std::string s = "    return x";
    auto prompt = build_oracle_translation_prompt(p, s, id, layout);
    REQUIRE(prompt.size() == p.size() + s.size() + p.size() + 3);
    CHECK(prompt.front() == id_of(Sentinel::CompOpen));
    std::size_t close_at = 1 + p.size() + s.size();
    CHECK(prompt[close_at] == id_of(Sentinel::CompClose));
    CHECK(prompt[close_at + 1] == id_of(Sentinel::RawOpen));
    CHECK(prompt.back() != id_of(Sentinel::RawClose));  // left open for the model
    // raw span reproduces the problem bytes
    for (std::size_t i = 0; i < p.size(); ++i)
        CHECK(prompt[close_at + 2 + i] == byte_to_symbol(static_cast<std::uint8_t>(p[i])));
}

TEST_CASE("oracle prompt comp span decodes back to problem and solution") {
    auto corpus = test_fixtures::code_texts(20, 19);
    BpeTokenizer tok = bpe_train(corpus, 400, Pretokenizer::DefaultRegex);
    TokenizerCompressor comp(tok, TokenEncoding::TokenIndex);
    VocabLayout layout = VocabLayout::layout_for(comp.comp_vocab_size());
    std::string p = corpus[0];
    std::string s = corpus[1];
    auto prompt = build_oracle_translation_prompt(p, s, comp, layout);
    // extract comp span between CompOpen and CompClose
    std::vector<std::uint32_t> local;
    std::size_t i = 1;
    for (; prompt[i] != id_of(Sentinel::CompClose); ++i) local.push_back(layout.symbol_to_comp(prompt[i]));
    CHECK(comp.decompress(local) == p + s);
}

TEST_CASE("assignments are deterministic per (seed, doc id)") {
    MixConfig cfg;
    cfg.rate_final = 0.5;
    cfg.seed = 99;
    for (int i = 0; i < 100; ++i) {
        std::string id = "doc-" + std::to_string(i);
        CHECK(assign_view_kind(id, 0, cfg) == assign_view_kind(id, 0, cfg));
    }
    MixConfig other = cfg;
    other.seed = 100;
    int diff = 0;
    for (int i = 0; i < 200; ++i) {
        std::string id = "doc-" + std::to_string(i);
        if (assign_view_kind(id, 0, cfg) != assign_view_kind(id, 0, other)) ++diff;
    }
    CHECK(diff > 0);
}
