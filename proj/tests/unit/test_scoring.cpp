#include "zeroprobe/error.hpp"
#include "zeroprobe/scoring.hpp"
#include "zeroprobe/text.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>

using namespace zeroprobe;

namespace {

const char* kText = "Quando Maria ha chiamato Mario, era contenta.";

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::Io;
}

StimulusSet pair_set() {
    std::vector<Stimulus> v;
    v.push_back(Stimulus{"s1", ExperimentId::Exp1, "f1", {{"antecedent", "subject"}}, kText, 32});
    v.push_back(Stimulus{"s2", ExperimentId::Exp1, "f1", {{"antecedent", "object"}},
                         "Quando Maria ha chiamato Mario, era contento.", 32});
    return StimulusSet(std::move(v));
}

// Sentencepiece-style pieces of kText with their scalar offsets.
std::string sp_record(const std::string& model, const std::string& id, double main_logprob) {
    return R"({"stimulus_id":")" + id + R"(","model_id":")" + model +
           R"(","scoring_mode":"autoregressive","tokens":[)"
           R"({"surface":"▁Quando","char_start":0,"char_end":6,"logprob":null},)"
           R"({"surface":"▁Maria","char_start":6,"char_end":12,"logprob":-3.0},)"
           R"({"surface":"▁ha","char_start":12,"char_end":15,"logprob":-1.5},)"
           R"({"surface":"▁chiam","char_start":15,"char_end":21,"logprob":-4.0},)"
           R"({"surface":"ato","char_start":21,"char_end":24,"logprob":-0.5},)"
           R"({"surface":"▁Mario","char_start":24,"char_end":30,"logprob":-2.0},)"
           R"({"surface":",","char_start":30,"char_end":31,"logprob":-1.0},)"
           R"({"surface":"▁era","char_start":31,"char_end":35,"logprob":)" +
           std::to_string(main_logprob) + R"(},)"
           R"({"surface":"▁content","char_start":35,"char_end":43,"logprob":-6.0},)"
           R"({"surface":"a.","char_start":43,"char_end":45,"logprob":-0.25}]})";
}

TokenScore tok(double lp) { return TokenScore{"x", 0, 1, lp}; }

// Independent tokenizer over UTF-8 bytes: ASCII alnum and any byte >= 0x80
// form words, other visible ASCII bytes are single tokens.
std::vector<std::string> oracle_words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    auto wordish = [](unsigned char c) { return c >= 0x80 || std::isalnum(c); };
    for (unsigned char c : s) {
        if (wordish(c)) {
            cur += static_cast<char>(c);
            continue;
        }
        if (!cur.empty()) out.push_back(cur), cur.clear();
        if (!std::isspace(c)) out.emplace_back(1, static_cast<char>(c));
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

TEST_CASE("subword record tiling the minimal pair is accepted") {
    auto set = pair_set();
    auto scores = parse_token_scores(sp_record("m", "s1", -0.75) + "\n", set);
    REQUIRE(scores.size() == 1);
    const auto* r = scores.find("m", "s1");
    REQUIRE(r);
    CHECK_FALSE(r->tokens[0].logprob.has_value());
    auto mc = main_clause_surprisal(*set.find("s1"), *r);
    CHECK(mc.token_count == 3);
    CHECK(mc.surprisal == doctest::Approx(0.75 + 6.0 + 0.25).epsilon(1e-15));
}

TEST_CASE("ingest errors") {
    auto set = pair_set();
    SUBCASE("positive logprob") {
        CHECK(kind_of([&] { parse_token_scores(sp_record("m", "s1", 0.3), set); }) == ErrorKind::NonFiniteLogprob);
    }
    SUBCASE("duplicate record") {
        auto jsonl = sp_record("m", "s1", -1) + "\n" + sp_record("m", "s1", -2) + "\n";
        CHECK(kind_of([&] { parse_token_scores(jsonl, set); }) == ErrorKind::DuplicateRecord);
    }
    SUBCASE("same stimulus, two models is fine") {
        auto jsonl = sp_record("a", "s1", -1) + "\n" + sp_record("b", "s1", -2) + "\n";
        CHECK(parse_token_scores(jsonl, set).models() == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("unknown stimulus") {
        CHECK(kind_of([&] { parse_token_scores(sp_record("m", "nope", -1), set); }) == ErrorKind::UnknownStimulus);
    }
    SUBCASE("malformed json") {
        CHECK(kind_of([&] { parse_token_scores("{\"stimulus_id\": ", set); }) == ErrorKind::Parse);
    }
    SUBCASE("surface disagrees with text") {
        auto bad = sp_record("m", "s1", -1);
        bad.replace(bad.find("▁Mario"), std::string("▁Mario").size(), "▁Marco");
        CHECK(kind_of([&] { parse_token_scores(bad, set); }) == ErrorKind::SpanMismatch);
    }
    SUBCASE("gap over visible text") {
        auto bad = sp_record("m", "s1", -1);
        bad.replace(bad.find(R"({"surface":",","char_start":30,"char_end":31,"logprob":-1.0},)"),
                    std::string(R"({"surface":",","char_start":30,"char_end":31,"logprob":-1.0},)").size(), "");
        CHECK(kind_of([&] { parse_token_scores(bad, set); }) == ErrorKind::SpanMismatch);
    }
}

TEST_CASE("validate_record logprob rules") {
    auto set = pair_set();
    const auto& s = *set.find("s1");
    auto record = toy_score(set).records().begin()->second;
    CHECK_NOTHROW(validate_record(record, s));

    auto r = record;
    r.tokens[0].logprob.reset();
    CHECK_NOTHROW(validate_record(r, s));
    r.mode = ScoringMode::MaskedPll;
    CHECK(kind_of([&] { validate_record(r, s); }) == ErrorKind::NonFiniteLogprob);

    r = record;
    r.tokens[1].logprob.reset();
    CHECK(kind_of([&] { validate_record(r, s); }) == ErrorKind::NonFiniteLogprob);

    r = record;
    r.tokens[2].logprob = std::nan("");
    CHECK(kind_of([&] { validate_record(r, s); }) == ErrorKind::NonFiniteLogprob);

    r = record;
    r.tokens[2].logprob = -INFINITY;
    CHECK(kind_of([&] { validate_record(r, s); }) == ErrorKind::NonFiniteLogprob);

    r = record;
    std::swap(r.tokens[1], r.tokens[2]);
    CHECK(kind_of([&] { validate_record(r, s); }) == ErrorKind::SpanMismatch);
}

TEST_CASE("boundary assignment") {
    const auto t = text::decode_utf8(kText);
    CHECK(classify_token(t, 32, 32, 35) == Region::MainClause);   // "era"
    CHECK(classify_token(t, 32, 31, 35) == Region::MainClause);   // " era"
    CHECK(classify_token(t, 32, 30, 35) == Region::Subordinate);  // ", era"
    CHECK(classify_token(t, 32, 24, 30) == Region::Subordinate);
}

TEST_CASE("region surprisal sums") {
    std::vector<TokenScore> two{tok(std::log(0.5)), tok(std::log(0.25))};
    CHECK(summed_surprisal(two) == doctest::Approx(std::log(8.0)).epsilon(1e-15));
    CHECK(std::fabs(summed_surprisal(two) - 2.0794415416798357) < 1e-12);

    std::vector<TokenScore> one{tok(0.0)};
    CHECK(summed_surprisal(one) == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-12.0, 0.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TokenScore> a, b, ab;
        for (int i = 0; i < 1 + trial % 7; ++i) a.push_back(tok(u(rng)));
        for (int i = 0; i < 1 + trial % 5; ++i) b.push_back(tok(u(rng)));
        ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        CHECK(std::fabs(summed_surprisal(ab) - summed_surprisal(a) - summed_surprisal(b)) < 1e-12);
    }
}

TEST_CASE("partition is total and the unscored first token stays subordinate") {
    const auto& corpus = builtin_corpus();
    const auto scores = toy_score(corpus);
    for (const auto& [key, record] : scores.records()) {
        const auto& s = *corpus.find(key.second);
        auto part = assign_regions(s, record);
        CHECK(part.subordinate.size() + part.main_clause.size() == record.tokens.size());
        CHECK(part.subordinate.front() == 0);

        auto dropped = record;
        dropped.tokens[0].logprob.reset();
        CHECK(main_clause_surprisal(s, dropped).surprisal == main_clause_surprisal(s, record).surprisal);
    }
}

TEST_CASE("empty main clause") {
    auto set = pair_set();
    auto record = toy_score(set).records().begin()->second;
    // Collapse every token into the subordinate clause by merging the tail.
    record.tokens.resize(6);
    record.tokens.back().char_end = 45;
    record.tokens.back().surface = ", era contenta.";
    auto part_kind = kind_of([&] { assign_regions(*set.find(record.stimulus_id), record); });
    CHECK(part_kind == ErrorKind::EmptyMainClause);
}

TEST_CASE("toy scorer matches an independent unigram count table") {
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& s : builtin_corpus().stimuli()) {
        for (const auto& w : oracle_words(s.text)) ++counts[w], ++total;
    }
    const double denom = static_cast<double>(total + counts.size());
    CHECK(builtin_unigram_table().total_tokens() == total);
    CHECK(builtin_unigram_table().vocabulary_size() == counts.size());

    std::string once;
    for (const auto& [w, c] : counts) {
        if (c == 1) {
            once = w;
            break;
        }
    }
    REQUIRE_FALSE(once.empty());
    CHECK(builtin_unigram_table().logprob(once) == doctest::Approx(std::log(2.0 / denom)).epsilon(1e-14));

    const auto scores = toy_score(builtin_corpus());
    for (const auto& s : builtin_corpus().stimuli()) {
        double oracle = 0.0;
        for (const auto& w : oracle_words(s.main_clause())) oracle -= std::log((counts[w] + 1.0) / denom);
        const auto got = main_clause_surprisal(s, *scores.find(kToyModelId, s.stimulus_id));
        CHECK(std::fabs(got.surprisal - oracle) < 1e-12 * std::max(1.0, oracle));
        CHECK(got.token_count == oracle_words(s.main_clause()).size());
    }

    const auto* ex1 = builtin_corpus().find("e1-02-subj");
    REQUIRE(ex1);
    CHECK(main_clause_surprisal(*ex1, *scores.find(kToyModelId, "e1-02-subj")).token_count == 3);
}

TEST_CASE("toy scorer is deterministic and round-trips through jsonl") {
    const auto a = toy_score(builtin_corpus());
    const auto b = toy_score(builtin_corpus());
    CHECK(a == b);
    const auto text = to_jsonl(a);
    CHECK(text == to_jsonl(b));
    const auto back = parse_token_scores(text, builtin_corpus());
    CHECK(back == a);
    CHECK(to_jsonl(back) == text);
}
