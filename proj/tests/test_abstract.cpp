#include <doctest.h>

#include <random>

#include "owhile/abstract.hpp"
#include "support.hpp"

using namespace owhile;
using namespace owhile::testing;

namespace {

ProgramPoint pp(const char* t) { return *parse_program_point(t); }

const ProgramPoint p1 = pp("Seq1/AsgE/Obj");
const ProgramPoint p2 = pp("Seq2/Seq1/FldAsg2/Obj");
const ProgramPoint p3 = pp("Seq2/Seq2/If2/AsgE/Obj");

AbsFlow flow(AbsSource s, AbsStore d) { return {std::move(s), std::move(d)}; }

const Expr& rhs_of(const Stat& s) { return *std::get<stmt::Asg>(s.node).rhs; }

} // namespace

TEST_CASE("expression rules") {
    StatPtr s = annotate_pp({}, *P("x = {}"));
    CHECK(analyze_expr({}, {}, rhs_of(*s)) == AbsVal{{pp("AsgE/Obj")}, {}});

    AbsEnv e1{{"x", AbsVal{{p1}, {}}}};
    StatPtr read = annotate_pp({}, *P("y = x"));
    ProgramPoint use = pp("AsgE/Var");
    CHECK(analyze_expr(e1, {}, rhs_of(*read)) == AbsVal{{p1}, {AbsVarAt{"x", use}}});

    AbsHeap h1{{{p1, "f"}, AbsVal{{p2}, {}}}};
    StatPtr fld = annotate_pp({}, *P("y = x.f"));
    AbsVal v = analyze_expr(e1, h1, rhs_of(*fld));
    CHECK(v.locs == AbsLoc{p2});
    CHECK(v.deps == AbsDeps{AbsVarAt{"x", pp("AsgE/FldE/Var")}, AbsFieldAt{p1, "f", pp("AsgE/Fld")}});

    StatPtr cst = annotate_pp({}, *P("y = true"));
    CHECK(analyze_expr(e1, h1, rhs_of(*cst)).is_bottom());
}

TEST_CASE("binary operators drop locations but keep objects created in operands as sources") {
    AbsEnv env{{"x", AbsVal{{p1}, {}}}};
    StatPtr s = annotate_pp({}, *P("y = x == {}"));
    AbsVal v = analyze_expr(env, {}, rhs_of(*s));
    CHECK(v.locs.empty());
    CHECK(v.deps == AbsDeps{AbsVarAt{"x", pp("AsgE/Bin1/Var")}, ObjAt{p1}, ObjAt{pp("AsgE/Bin2/Obj")}});
}

TEST_CASE("abstract heap reads and writes") {
    CHECK(heap_read({}, {p1}, "f").is_bottom());
    AbsHeap h1 = heap_write({}, {p1}, "f", AbsVal{{p2}, {}});
    CHECK(h1 == AbsHeap{{{p1, "f"}, AbsVal{{p2}, {}}}});
    CHECK(heap_read(h1, {p1}, "f") == AbsVal{{p2}, {}});
    CHECK(heap_read(h1, {p1, pp("Obj")}, "f") == AbsVal{{p2}, {}});
    AbsHeap h2 = heap_write(h1, {p1}, "f", AbsVal{{p3}, {}});
    CHECK(heap_read(h2, {p1}, "f") == AbsVal{{p2, p3}, {}});
    CHECK(val_leq(AbsVal{{p3}, {}}, heap_read(h2, {p1}, "f")));
}

TEST_CASE("the worked example program") {
    StatPtr s = annotate_pp({}, *P(kBranchProgram));
    AnalysisResult r = analyze_program(*s);

    CHECK(r.env.at("x") == AbsVal{{p1}, {}});
    CHECK(r.env.at("y").locs == AbsLoc{p2, p3});
    CHECK(r.heap == AbsHeap{{{p1, "f"}, AbsVal{{p2}, {}}}});

    AbsVarAt x_use{"x", pp("Seq2/Seq2/If1/AsgE/FldE/Var")};
    AbsFieldAt f_use{p1, "f", pp("Seq2/Seq2/If1/AsgE/Fld")};
    CHECK(r.env.at("y").deps == AbsDeps{x_use, f_use});
    AbsFlowSet want = {
        flow(ObjAt{p1}, AbsVarAt{"x", pp("Seq1")}),
        flow(ObjAt{p2}, AbsFieldAt{p1, "f", pp("Seq2/Seq1")}),
        flow(ObjAt{p2}, AbsVarAt{"y", pp("Seq2/Seq2/If1")}),
        flow(ObjAt{p3}, AbsVarAt{"y", pp("Seq2/Seq2/If2")}),
        flow(x_use, AbsVarAt{"y", pp("Seq2/Seq2/If1")}),
        flow(f_use, AbsVarAt{"y", pp("Seq2/Seq2/If1")}),
    };
    CHECK(r.flows == want);
}

TEST_CASE("statement rules") {
    StatPtr skip = annotate_pp({}, *P("skip"));
    AbsEnv env{{"q", AbsVal{{p1}, {}}}};
    AnalysisResult r = analyze_stat(env, {}, *skip);
    CHECK(r.env == env);
    CHECK(r.flows.empty());

    StatPtr asg = annotate_pp({}, *P("x = {}"));
    r = analyze_program(*asg);
    CHECK(r.env == AbsEnv{{"x", AbsVal{{pp("AsgE/Obj")}, {}}}});
    CHECK(r.flows == AbsFlowSet{flow(ObjAt{pp("AsgE/Obj")}, AbsVarAt{"x", {}})});

    // Deletion reports the target's dependencies as flowing into the field.
    StatPtr del = annotate_pp({}, *P("delete x.f"));
    r = analyze_stat(AbsEnv{{"x", AbsVal{{p1}, {}}}}, {}, *del);
    CHECK(r.flows == AbsFlowSet{flow(AbsVarAt{"x", pp("DelE/Var")}, AbsFieldAt{p1, "f", {}})});
}

TEST_CASE("loop invariants") {
    std::vector<LoopRecord> loops;
    AnalysisOptions opts;
    opts.loops = &loops;

    StatPtr idle = annotate_pp({}, *P("while false do { skip }"));
    AbsEnv env{{"x", AbsVal{{p1}, {}}}};
    AnalysisResult r = analyze_stat(env, {}, *idle, opts);
    CHECK(r.env == env);
    CHECK(r.flows.empty());
    REQUIRE(loops.size() == 1);
    CHECK(loops[0].rounds == 1);

    loops.clear();
    StatPtr alloc = annotate_pp({}, *P("while b do { x = {} }"));
    r = analyze_program(*alloc, opts);
    ProgramPoint site = pp("WhileS/AsgE/Obj");
    CHECK(r.env == AbsEnv{{"x", AbsVal{{site}, {}}}});
    CHECK(r.flows == AbsFlowSet{flow(ObjAt{site}, AbsVarAt{"x", pp("WhileS")})});
    CHECK(loops.at(0).rounds <= 2);

    loops.clear();
    StatPtr shift = annotate_pp({}, *P("x = {}; while b do { y = x; x = {} }"));
    r = analyze_program(*shift, opts);
    CHECK(r.env.at("y").locs == AbsLoc{pp("Seq1/AsgE/Obj"), pp("Seq2/WhileS/Seq2/AsgE/Obj")});
    CHECK(loops.at(0).rounds == 3);
    CHECK(loops.at(0).input_below);
    CHECK(loops.at(0).body_below);
}

TEST_CASE("the iteration cap is reported") {
    StatPtr shift = annotate_pp({}, *P("x = {}; while b do { y = x; x = {} }"));
    AnalysisOptions opts;
    opts.max_rounds = 2;
    CHECK_THROWS_AS(analyze_program(*shift, opts), FixpointError);
}

TEST_CASE("undecorated input is rejected") {
    CHECK_THROWS_AS(analyze_program(*P("skip")), std::invalid_argument);
}

TEST_CASE("lattice laws") {
    AbsVal a{{p1}, {AbsVarAt{"x", {}}}}, b{{p2}, {}}, bot;
    CHECK(val_join(a, bot) == a);
    CHECK(val_join(a, b) == val_join(b, a));
    CHECK(val_leq(a, val_join(a, b)));
    CHECK(val_leq(bot, a));
    CHECK_FALSE(val_leq(a, b));
    AbsEnv e1{{"x", a}}, e2{{"x", b}, {"y", a}};
    CHECK(env_leq(e1, env_join(e1, e2)));
    CHECK(env_leq({}, e1));
    CHECK_FALSE(env_leq(e2, e1));
}

TEST_CASE("analysis is monotone in its input state") {
    std::mt19937_64 rng(7);
    auto coin = [&] { return std::bernoulli_distribution(0.4)(rng); };
    std::vector<ProgramPoint> sites = {p1, p2, p3, pp("Obj")};
    std::vector<Ident> vars = {"x", "y", "z"};
    std::vector<Ident> fields = {"f", "g"};
    auto random_val = [&] {
        AbsVal v;
        for (const auto& s : sites) {
            if (coin()) {
                v.locs.insert(s);
            }
        }
        if (coin()) {
            v.deps.insert(AbsVarAt{"x", sites[0]});
        }
        return v;
    };
    auto random_state = [&](AbsEnv& env, AbsHeap& heap) {
        for (const auto& x : vars) {
            if (AbsVal v = random_val(); !v.is_bottom() && coin()) {
                env[x] = val_join(env[x], v);
            }
        }
        for (const auto& s : sites) {
            for (const auto& f : fields) {
                if (AbsVal v = random_val(); !v.is_bottom() && coin()) {
                    heap[{s, f}] = val_join(heap[{s, f}], v);
                }
            }
        }
    };
    int checked = 0;
    for (const StatPtr& raw : samples(80, 300)) {
        StatPtr s = annotate_pp({}, *raw);
        AbsEnv e1;
        AbsHeap h1;
        random_state(e1, h1);
        AbsEnv e2 = e1;
        AbsHeap h2 = h1;
        random_state(e2, h2);
        REQUIRE(env_leq(e1, e2));
        REQUIRE(heap_leq(h1, h2));
        AnalysisResult lo = analyze_stat(e1, h1, *s);
        AnalysisResult hi = analyze_stat(e2, h2, *s);
        INFO(pretty(*raw));
        CHECK(env_leq(lo.env, hi.env));
        CHECK(heap_leq(lo.heap, hi.heap));
        CHECK(std::includes(hi.flows.begin(), hi.flows.end(), lo.flows.begin(), lo.flows.end()));
        ++checked;
    }
    CHECK(checked == 80);
}
