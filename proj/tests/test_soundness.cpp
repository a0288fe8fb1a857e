#include <doctest.h>

#include <algorithm>
#include <set>

#include "support.hpp"

using namespace owhile;
using namespace owhile::testing;

namespace {

void all_pass(const char* text) {
    INFO(text);
    for (const CheckReport& r : check_all(*P(text), 100'000, text)) {
        INFO(r.check);
        CHECK(r.status == CheckStatus::Pass);
        CHECK(r.witnesses.empty());
        CHECK(r.program == text);
    }
}

} // namespace

TEST_CASE("reference programs pass every check") {
    all_pass(kCopyProgram);
    all_pass(kBranchProgram);
    all_pass("skip");
    all_pass("x = {}; y = x; y.f = x");
    all_pass("x = {}; x.f = true; delete x.f; x.f = {}; z = x.f");
    all_pass("x = {}; y = x == {}");
}

TEST_CASE("obligation counts") {
    // Five normal rules, each checked on entry and exit.
    CHECK(check_prop1(*P(kCopyProgram), 1000).obligations == 10);
    CHECK(check_prop1(*P("skip"), 1000).obligations == 2);
    CHECK(check_soundness(*P(kCopyProgram), 1000).obligations == 1);
    CHECK(check_soundness(*P("skip"), 1000).obligations == 0);
    // The stored location is attested once when written and once at the end.
    CHECK(check_prop4(*P("x = {}; y = x; y.f = x"), 1000).obligations == 2);
    CHECK(check_prop4(*P("skip"), 1000).obligations == 0);
}

TEST_CASE("runs that end in an error are still checked") {
    auto reports = check_all(*P("x = {}; x.f = {}; y = x.f.g"), 1000);
    for (const CheckReport& r : reports) {
        CHECK(r.status == CheckStatus::Pass);
    }
    CHECK(reports[0].obligations > 0);
}

TEST_CASE("runs out of fuel are skipped") {
    for (const CheckReport& r : check_all(*P("while true do { skip }"), 500)) {
        CHECK(r.status == CheckStatus::Skipped);
        CHECK(r.passed());
        CHECK(r.witnesses.empty());
    }
    CHECK(to_string(CheckStatus::Skipped) == "skipped-nonterminating");
}

TEST_CASE("loop records from the analysis are handed back") {
    std::vector<LoopRecord> loops;
    check_soundness(*P("x = true; while x do { x = false }; while false do { skip }"), 1000, "", &loops);
    CHECK(loops.size() == 2);
}

TEST_CASE("generated programs") {
    std::size_t terminated = 0;
    for (const StatPtr& s : samples(150, 9000)) {
        for (const CheckReport& r : check_all(*s, 10'000)) {
            INFO(pretty(*s), " ", r.check);
            CHECK(r.status != CheckStatus::Fail);
            CHECK((r.status == CheckStatus::Fail) == !r.witnesses.empty());
            terminated += r.check == "soundness" && r.status == CheckStatus::Pass;
        }
    }
    CHECK(terminated >= 120);
}

TEST_CASE("generator is a pure function of its configuration") {
    GenConfig cfg;
    cfg.seed = 123;
    CHECK(pretty(*gen_program(cfg)) == pretty(*gen_program(cfg)));
    GenConfig other = cfg;
    other.seed = 124;
    CHECK(pretty(*gen_program(cfg)) != pretty(*gen_program(other)));
}

namespace {

void identifiers(const Expr& e, std::set<Ident>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr::Var>) {
                out.insert(n.name);
            } else if constexpr (std::is_same_v<T, expr::Bin>) {
                identifiers(*n.lhs, out);
                identifiers(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, expr::Fld>) {
                identifiers(*n.base, out);
                out.insert(n.field);
            }
        },
        e.node);
}

void identifiers(const Stat& s, std::set<Ident>& out, int depth, int& max_depth) {
    max_depth = std::max(max_depth, depth);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, stmt::Seq>) {
                identifiers(*n.first, out, depth, max_depth);
                identifiers(*n.second, out, depth, max_depth);
            } else if constexpr (std::is_same_v<T, stmt::If>) {
                identifiers(*n.cond, out);
                identifiers(*n.then_branch, out, depth + 1, max_depth);
                identifiers(*n.else_branch, out, depth + 1, max_depth);
            } else if constexpr (std::is_same_v<T, stmt::While>) {
                identifiers(*n.cond, out);
                identifiers(*n.body, out, depth + 1, max_depth);
            } else if constexpr (std::is_same_v<T, stmt::Asg>) {
                out.insert(n.var);
                identifiers(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, stmt::FldAsg>) {
                identifiers(*n.target, out);
                out.insert(n.field);
                identifiers(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, stmt::Del>) {
                identifiers(*n.target, out);
                out.insert(n.field);
            }
        },
        s.node);
}

} // namespace

TEST_CASE("generator respects its pools and bounds") {
    GenConfig cfg;
    cfg.var_pool = {"a"};
    cfg.field_pool = {"k"};
    for (int depth : {1, 2, 4}) {
        cfg.max_depth = depth;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            cfg.seed = seed;
            std::set<Ident> ids;
            int nesting = 0;
            identifiers(*gen_program(cfg), ids, 0, nesting);
            for (const Ident& id : ids) {
                CHECK((id == "a" || id == "k"));
            }
            CHECK(nesting < depth);
        }
    }
}

TEST_CASE("invalid generator configurations are rejected") {
    GenConfig cfg;
    cfg.var_pool.clear();
    CHECK_THROWS_AS(gen_program(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.field_pool.clear();
    CHECK_THROWS_AS(gen_program(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.max_depth = 0;
    CHECK_THROWS_AS(gen_program(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.max_stmts = 0;
    CHECK_THROWS_AS(gen_program(cfg), std::invalid_argument);
    cfg = GenConfig{};
    cfg.while_probability = 1.5;
    CHECK_THROWS_AS(gen_program(cfg), std::invalid_argument);
}
