#include "zeroprobe/corpus.hpp"
#include "zeroprobe/error.hpp"
#include "zeroprobe/text.hpp"

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>

using namespace zeroprobe;

namespace {

const char* kHeader = "stimulus_id,experiment_id,frame_id,factors,text,main_clause_start\n";

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::Io;
}

std::string pair_csv(std::size_t start) {
    return std::string(kHeader) + "s1,EXP1,f1,antecedent=subject,\"Quando Maria ha chiamato Mario, era contenta.\"," +
           std::to_string(start) + "\n" + "s2,EXP1,f1,antecedent=object,\"Quando Maria ha chiamato Mario, era contento.\"," +
           std::to_string(start) + "\n";
}

}  // namespace

TEST_CASE("minimal pair loads with main clause at 'era'") {
    auto set = parse_stimuli_csv(pair_csv(32));
    REQUIRE(set.size() == 2);
    const auto* s = set.find("s1");
    REQUIRE(s);
    CHECK(s->experiment == ExperimentId::Exp1);
    CHECK(s->level("antecedent") == "subject");
    CHECK(s->main_clause() == "era contenta.");
    CHECK(text::slice(s->text, 0, s->main_clause_start) == "Quando Maria ha chiamato Mario, ");
}

TEST_CASE("main_clause_start 0 and past the end are rejected") {
    CHECK(kind_of([] { parse_stimuli_csv(pair_csv(0)); }) == ErrorKind::Validation);
    CHECK(kind_of([] { parse_stimuli_csv(pair_csv(45)); }) == ErrorKind::Validation);
    CHECK(kind_of([] { parse_stimuli_csv(pair_csv(400)); }) == ErrorKind::Validation);
}

TEST_CASE("boundary on whitespace advances to the next visible char") {
    auto set = parse_stimuli_csv(pair_csv(31));
    CHECK(set.find("s1")->main_clause_start == 32);
}

TEST_CASE("offsets count scalar values, not bytes") {
    const std::string csv = std::string(kHeader) + "a,EXP1,f,antecedent=subject,\"Perché è così, è tardi.\",15\n" +
                            "b,EXP1,f,antecedent=object,\"Perché è così, è tardi.\",15\n";
    auto set = parse_stimuli_csv(csv);
    CHECK(set.find("a")->main_clause() == "è tardi.");
}

TEST_CASE("invalid rows") {
    SUBCASE("unknown factor level") {
        auto csv = std::string(kHeader) + "a,EXP1,f,antecedent=agent,\"Quando x, y.\",9\n";
        CHECK(kind_of([&] { parse_stimuli_csv(csv); }) == ErrorKind::Validation);
    }
    SUBCASE("duplicate id") {
        auto csv = std::string(kHeader) + "a,EXP1,f,antecedent=subject,\"Quando x, y.\",9\n" +
                   "a,EXP1,g,antecedent=object,\"Quando x, y.\",9\n";
        CHECK(kind_of([&] { parse_stimuli_csv(csv); }) == ErrorKind::Validation);
    }
    SUBCASE("frame across experiments") {
        auto csv = std::string(kHeader) + "a,EXP1,f,antecedent=subject,\"Quando x, y.\",9\n" +
                   "b,EXP2_ARG,f,antecedent=object,\"Quando x, y.\",9\n";
        CHECK(kind_of([&] { parse_stimuli_csv(csv); }) == ErrorKind::Validation);
    }
    SUBCASE("unknown experiment") {
        auto csv = std::string(kHeader) + "a,EXP3,f,antecedent=subject,\"Quando x, y.\",9\n";
        CHECK(kind_of([&] { parse_stimuli_csv(csv); }) == ErrorKind::Parse);
    }
    SUBCASE("unterminated quote") {
        auto csv = std::string(kHeader) + "a,EXP1,f,antecedent=subject,\"Quando x, y.,9\n";
        CHECK(kind_of([&] { parse_stimuli_csv(csv); }) == ErrorKind::Parse);
    }
    SUBCASE("bad utf-8") {
        auto csv = std::string(kHeader) + "a,EXP1,f,antecedent=subject,\"Quando \xff, y.\",9\n";
        CHECK_THROWS_AS(parse_stimuli_csv(csv), Error);
    }
}

TEST_CASE("json stimuli match csv") {
    const std::string json = R"([
      {"stimulus_id": "s1", "experiment_id": "EXP1", "frame_id": "f1", "factors": {"antecedent": "subject"},
       "text": "Quando Maria ha chiamato Mario, era contenta.", "main_clause_start": 32},
      {"stimulus_id": "s2", "experiment_id": "EXP1", "frame_id": "f1", "factors": "antecedent=object",
       "text": "Quando Maria ha chiamato Mario, era contento.", "main_clause_start": 32}
    ])";
    CHECK(parse_stimuli_json(json) == parse_stimuli_csv(pair_csv(32)));
}

TEST_CASE("builtin corpus") {
    const auto& set = builtin_corpus();
    CHECK(set.experiments().size() == 4);
    CHECK(set.experiment(ExperimentId::Exp1).size() == 32);
    CHECK(set.experiment(ExperimentId::Exp2Arg).size() == 32);
    CHECK(set.experiment(ExperimentId::Exp2Form).size() == 32);
    CHECK(set.experiment(ExperimentId::Exp4).size() == 84);
    CHECK(&builtin_corpus() == &set);
    CHECK(parse_stimuli_csv(builtin_corpus_csv()) == set);

    for (auto id : all_experiments()) {
        auto balance = validate_balance(set, design(id));
        CHECK(balance.all_complete());
    }

    bool has_pronoun = false;
    for (const auto& s : set.stimuli()) {
        if (s.text == "Quando Maria lo cerca, diventa ansioso.") {
            has_pronoun = s.level("object_form") == "pronoun";
        }
    }
    CHECK(has_pronoun);
    CHECK(set.find("e1-02-subj")->text == "Quando Maria ha chiamato Mario, era contenta.");
}

TEST_CASE("balance report") {
    SUBCASE("missing cell") {
        auto csv = std::string(kHeader) + "a,EXP1,f1,antecedent=subject,\"Quando x, y.\",9\n" +
                   "b,EXP1,f2,antecedent=subject,\"Quando x, y.\",9\n" +
                   "c,EXP1,f2,antecedent=object,\"Quando x, z.\",9\n";
        auto report = validate_balance(parse_stimuli_csv(csv), design(ExperimentId::Exp1));
        REQUIRE(report.frames.size() == 2);
        CHECK_FALSE(report.all_complete());
        CHECK(report.incomplete_count() == 1);
        CHECK(report.frames[0].missing == std::vector<std::string>{"antecedent=object"});
        CHECK(report.frames[1].complete);
    }
    SUBCASE("duplicate cell within a frame is rejected on load") {
        auto csv = std::string(kHeader) + "a,EXP1,f1,antecedent=subject,\"Quando x, y.\",9\n" +
                   "b,EXP1,f1,antecedent=subject,\"Quando x, z.\",9\n";
        CHECK(kind_of([&] { parse_stimuli_csv(csv); }) == ErrorKind::Validation);
    }
    SUBCASE("EXP4 frames need all four cells") {
        std::vector<Stimulus> kept;
        for (const auto* s : builtin_corpus().experiment(ExperimentId::Exp4)) {
            if (s->stimulus_id != "e4-03-obj-3") kept.push_back(*s);
        }
        auto report = validate_balance(StimulusSet(kept), design(ExperimentId::Exp4));
        CHECK(report.incomplete_count() == 1);
    }
}

TEST_CASE("csv round trip on shuffled builtin subsets") {
    std::mt19937 rng(7);
    auto all = builtin_corpus().stimuli();
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<Stimulus> subset(all.begin(), all.begin() + 1 + static_cast<long>(rng() % all.size()));
        StimulusSet set(subset);
        CHECK(parse_stimuli_csv(to_csv(set)) == set);
    }
}

TEST_CASE("cell labels") {
    FactorAssignment cell{{"person", "third"}, {"argument", "object"}};
    CHECK(cell_label(cell) == "argument=object;person=third");
    CHECK(parse_factor_assignment("argument=object;person=third") == cell);
    CHECK(design(ExperimentId::Exp4).cells().size() == 4);
    CHECK(design(ExperimentId::Exp4).tests.size() == 2);
}
