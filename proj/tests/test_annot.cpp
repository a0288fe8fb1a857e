#include <doctest.h>

#include <functional>
#include <random>

#include "support.hpp"

using namespace owhile;
using namespace owhile::testing;

namespace {

// Logs every hook call as "<hook> <rule>".
struct Recorder {
    std::vector<std::pair<std::string, RuleName>>* log;

    using Left = Unit;
    using Right = Unit;
    Left initial() const { return {}; }
    template <class F>
    Left init(const RuleData& d, const Left&, const F&) const {
        log->emplace_back("init", d.rule);
        return {};
    }
    template <class L, class F>
    Right axiom(const RuleData& d, const Left&, const L&, const F&) const {
        log->emplace_back("axiom", d.rule);
        return {};
    }
    template <class L, class F>
    Left up(const RuleData& d, const Left&, const L&, const F&) const {
        log->emplace_back("up", d.rule);
        return {};
    }
    template <class L, class R, class F>
    Left next(const RuleData& d, const Left&, const Right&, const L&, const R&, const F&) const {
        log->emplace_back("next", d.rule);
        return {};
    }
    template <class L, class R, class F>
    Right down(const RuleData& d, const Left&, const Right&, const L&, const R&, const F&) const {
        log->emplace_back("down", d.rule);
        return {};
    }
};

// Parses one derivation from the log: init, then axiom, or up, child,
// optionally next and a second child, then down. Returns false on any
// deviation.
bool derivation(const std::vector<std::pair<std::string, RuleName>>& log, std::size_t& i) {
    if (i >= log.size() || log[i].first != "init") {
        return false;
    }
    RuleName r = log[i++].second;
    if (i < log.size() && log[i].first == "axiom" && log[i].second == r) {
        ++i;
        return true;
    }
    if (i >= log.size() || log[i].first != "up" || log[i].second != r) {
        return false;
    }
    ++i;
    if (!derivation(log, i)) {
        return false;
    }
    if (i < log.size() && log[i].first == "next" && log[i].second == r) {
        ++i;
        if (!derivation(log, i)) {
            return false;
        }
    }
    if (i >= log.size() || log[i].first != "down" || log[i].second != r) {
        return false;
    }
    ++i;
    return true;
}

template <class Pass>
auto run_pass(const char* text, const Pass& pass) {
    StatPtr s = P(text);
    return eval_stat(State{}, *s, 100'000, pass);
}

} // namespace

TEST_CASE("hooks fire in derivation order") {
    std::vector<std::pair<std::string, RuleName>> log;
    run_pass("x = true", Recorder{&log});
    std::vector<std::pair<std::string, RuleName>> want = {
        {"init", RuleName::Asg},  {"up", RuleName::Asg},      {"init", RuleName::Cst},
        {"axiom", RuleName::Cst}, {"next", RuleName::Asg},    {"init", RuleName::Asg1},
        {"axiom", RuleName::Asg1}, {"down", RuleName::Asg},
    };
    CHECK(log == want);

    for (const StatPtr& s : samples(100)) {
        log.clear();
        auto ev = eval_stat(State{}, *s, 10'000, Recorder{&log});
        if (ev.outcome.exhausted()) {
            continue;
        }
        std::size_t i = 0;
        INFO(pretty(*s));
        CHECK(derivation(log, i));
        CHECK(i == log.size());
    }
}

TEST_CASE("trace pass") {
    CHECK(run_pass("skip", TracePass{}).annotation->atoms() == atoms_of({"i:Skip", "o:Skip"}));
    CHECK(run_pass(kCopyProgram, TracePass{}).annotation->atoms() == atoms_of(kCopyTrace));
    CHECK(run_pass("x = true", TracePass{}).annotation->atoms() ==
          atoms_of({"i:Asg", "i:Cst", "o:Cst", "i:Asg1", "o:Asg1", "o:Asg"}));
}

TEST_CASE("trace of every run is balanced and has one atom pair per fuel unit") {
    for (const StatPtr& s : samples(100)) {
        auto ev = eval_stat(State{}, *s, 10'000, TracePass{});
        if (ev.outcome.exhausted()) {
            continue;
        }
        auto atoms = ev.annotation->atoms();
        CHECK(well_balanced(atoms));
        CHECK(atoms.size() == 2 * ev.steps);
    }
}

TEST_CASE("last-modification pass") {
    Trace copy = trace_of(kCopyTrace);
    auto ev = run_pass(kCopyProgram, LastModStack{});
    const ModMap& m = layer<ModMap>(*ev.annotation);
    CHECK(m.size() == 2);
    CHECK(m.at(Ident("x")) == copy.prefix(6));
    CHECK(m.at(Ident("y")) == copy.prefix(13));

    auto obj = run_pass("x = {}", LastModStack{});
    const ModMap& mo = layer<ModMap>(*obj.annotation);
    CHECK(mo.at(Location{0}) == trace_of({"i:Asg", "i:Obj", "o:Obj"}));
    CHECK(mo.at(Ident("x")) == trace_of({"i:Asg", "i:Obj", "o:Obj", "i:Asg1", "o:Asg1"}));

    CHECK(layer<ModMap>(*run_pass("skip", LastModStack{}).annotation).size() == 0);

    auto fld = run_pass("x = {}; x.f = true", LastModStack{});
    const ModMap& mf = layer<ModMap>(*fld.annotation);
    Trace alloc = mf.at(Location{0});
    Trace written = mf.at(FieldKey{Location{0}, alloc, "f"});
    CHECK(written.back() == exit(RuleName::FldAsg2));
    CHECK(alloc.is_prefix_of(written));
}

TEST_CASE("dependency pass on expressions") {
    using Left = DepStack::Left;
    Trace t6 = trace_of(kCopyTrace).prefix(6);
    State st;
    st.env["x"] = true;

    Left in{{Trace{}, ModMap{}.set(Ident("x"), t6)}, DepSet{}};
    auto var = eval_expr(st, *parse_expr("x"), 100, DepStack{}, in);
    const DepSet& dv = layer<DepSet>(*var.annotation);
    CHECK(dv.size() == 1);
    CHECK(dv.contains(VarAt{"x", t6}));

    CHECK(layer<DepSet>(*eval_expr(st, *parse_expr("true"), 100, DepStack{}).annotation).empty());

    auto obj = eval_expr(State{}, *parse_expr("{}"), 100, DepStack{});
    const DepSet& dobj = layer<DepSet>(*obj.annotation);
    CHECK(dobj.size() == 1);
    CHECK(dobj.contains(AllocAt{Location{0}, trace_of({"i:Obj", "o:Obj"})}));

    // Both operands contribute.
    st.env["y"] = false;
    in.first.second = in.first.second.set(Ident("y"), t6);
    auto bin = eval_expr(st, *parse_expr("x || y"), 100, DepStack{}, in);
    CHECK(layer<DepSet>(*bin.annotation).size() == 2);
}

TEST_CASE("dependency pass: field reads depend on the last write of the field") {
    auto ev = run_pass("x = {}; x.f = true; y = x.f", FullStack{});
    const auto& ann = *ev.annotation;
    const ModMap& m = layer<ModMap>(ann);
    Trace alloc = m.at(Location{0});
    Trace written = m.at(FieldKey{Location{0}, alloc, "f"});
    std::set<Flow> flows = layer<FlowSet>(ann).to_set();
    Trace y_at = m.at(Ident("y"));
    CHECK(flows.count(Flow{FieldAt{Location{0}, alloc, "f", written}, VarAt{"y", y_at}}));
    CHECK(flows.count(Flow{VarAt{"x", m.at(Ident("x"))}, VarAt{"y", y_at}}));
}

TEST_CASE("flow pass") {
    Trace copy = trace_of(kCopyTrace);
    auto ev = run_pass(kCopyProgram, full_stack());
    auto flows = layer<FlowSet>(*ev.annotation).items();
    REQUIRE(flows.size() == 1);
    CHECK(flows[0] == Flow{VarAt{"x", copy.prefix(6)}, VarAt{"y", copy.prefix(13)}});

    CHECK(layer<FlowSet>(*run_pass("skip", full_stack()).annotation).empty());

    auto branch = run_pass(kBranchProgram, full_stack());
    const ModMap& m = layer<ModMap>(*branch.annotation);
    std::set<Flow> got = layer<FlowSet>(*branch.annotation).to_set();
    Trace a0 = m.at(Location{0}), a1 = m.at(Location{1}), a2 = m.at(Location{2});
    CHECK(got.count(Flow{AllocAt{Location{0}, a0}, VarAt{"x", m.at(Ident("x"))}}));
    CHECK(got.count(Flow{AllocAt{Location{1}, a1}, FieldAt{Location{0}, a0, "f", m.at(FieldKey{Location{0}, a0, "f"})}}));
    CHECK(got.count(Flow{AllocAt{Location{2}, a2}, VarAt{"y", m.at(Ident("y"))}}));
    // The FldAsg target's own dependency on x is not a direct flow.
    CHECK(got.size() == 3);
}

TEST_CASE("composition laws") {
    for (const char* text : {kCopyProgram, kBranchProgram, "x = {}; while false do { skip }; delete x.f"}) {
        auto solo = run_pass(text, TracePass{});
        auto left_unit = run_pass(text, compose(UnitPass{}, TracePass{}));
        CHECK(layer<Trace>(*left_unit.annotation) == *solo.annotation);
        CHECK(left_unit.outcome == solo.outcome);

        auto stacked = run_pass(text, LastModStack{});
        CHECK(layer<Trace>(*stacked.annotation) == *solo.annotation);

        auto left = run_pass(text, compose(compose(TracePass{}, LastModPass{}), DepPass{}));
        auto right = run_pass(text, compose(TracePass{}, compose(LastModPass{}, DepPass{})));
        CHECK(layer<Trace>(*left.annotation) == layer<Trace>(*right.annotation));
        CHECK(layer<ModMap>(*left.annotation) == layer<ModMap>(*right.annotation));
        CHECK(layer<DepSet>(*left.annotation) == layer<DepSet>(*right.annotation));
    }
}

TEST_CASE("flow log only grows") {
    FlowSet a;
    FlowSet b = a.add(Flow{VarAt{"x", {}}, VarAt{"y", {}}});
    FlowSet c = b.add(Flow{VarAt{"y", {}}, VarAt{"z", {}}});
    CHECK(a.is_prefix_of(c));
    CHECK(b.is_prefix_of(c));
    CHECK_FALSE(c.is_prefix_of(b));
    FlowSet other = a.add(Flow{VarAt{"q", {}}, VarAt{"y", {}}});
    CHECK_FALSE(other.is_prefix_of(c));
    CHECK(c.items().front() == Flow{VarAt{"x", {}}, VarAt{"y", {}}});
    CHECK(c.contains(Flow{VarAt{"y", {}}, VarAt{"z", {}}}));
}

TEST_CASE("persistent map behaves like std::map and keeps old versions") {
    std::mt19937 rng(3);
    std::vector<PersistentMap<int, int>> versions{{}};
    std::vector<std::map<int, int>> oracle{{}};
    for (int i = 0; i < 3000; ++i) {
        std::size_t from = rng() % versions.size();
        int k = static_cast<int>(rng() % 500), v = static_cast<int>(rng());
        versions.push_back(versions[from].set(k, v));
        oracle.push_back(oracle[from]);
        oracle.back()[k] = v;
    }
    for (std::size_t i = 0; i < versions.size(); i += 97) {
        CHECK(versions[i].to_map() == oracle[i]);
        CHECK(versions[i].size() == oracle[i].size());
        for (int k = 0; k < 500; k += 7) {
            const int* got = versions[i].find(k);
            auto want = oracle[i].find(k);
            CHECK((got == nullptr) == (want == oracle[i].end()));
            if (got && want != oracle[i].end()) {
                CHECK(*got == want->second);
            }
        }
    }
    auto a = versions.back().set(-1, 0);
    CHECK(a == versions.back().set(-1, 0));
    CHECK_FALSE(a.same_as(versions.back().set(-1, 0)));
    CHECK_FALSE(a == versions.back());
}
