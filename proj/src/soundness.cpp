#include "owhile/soundness.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "owhile/annot.hpp"
#include "owhile/interp.hpp"
#include "owhile/parser.hpp"
#include "owhile/ppmap.hpp"

namespace owhile {

std::string_view to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped-nonterminating";
    }
    return "?";
}

namespace {

constexpr std::size_t kMaxWitnesses = 20;
constexpr std::size_t kShownAtoms = 6;

class Report {
public:
    Report(std::string program, std::string check) {
        r_.program = std::move(program);
        r_.check = std::move(check);
    }

    void ok() { ++r_.obligations; }

    void fail(std::string w) {
        ++r_.obligations;
        r_.status = CheckStatus::Fail;
        if (r_.witnesses.size() < kMaxWitnesses) {
            r_.witnesses.push_back(std::move(w));
        }
    }

    void expect(bool cond, const std::function<std::string()>& w) { cond ? ok() : fail(w()); }

    CheckReport skipped() {
        r_.status = CheckStatus::Skipped;
        r_.witnesses.clear();
        return r_;
    }

    CheckReport done() { return r_; }

private:
    CheckReport r_;
};

const PointPair& node_points(const RuleData& d) {
    const std::optional<PointPair>* p = d.stat ? &d.stat->points : &d.expr->points;
    if (!*p) {
        throw std::logic_error("checked program lost its program points");
    }
    return **p;
}

std::string show(const Trace& t) { return render(t, kShownAtoms); }

std::string show(const PPResult& r) {
    std::string out = render(r.pp);
    if (!r.leftover.empty()) {
        out += " leaving [";
        for (std::size_t i = 0; i < r.leftover.size(); ++i) {
            out += (i ? ", o:" : "o:") + std::string(to_string(r.leftover[i]));
        }
        out += "]";
    }
    return out;
}

// ---- Prop 1 -----------------------------------------------------------------

struct PointSink {
    struct Obligation {
        Trace trace;
        ProgramPoint expected;
        RuleName rule;
        bool at_exit;
    };
    std::vector<Obligation> obligations;
    std::vector<std::string> shape_errors;

    template <class V>
    void on_enter(const RuleData& d, const V& fresh) {
        if (!is_normal(d.rule)) {
            return;
        }
        const PointPair& pp = node_points(d);
        ProgramPoint extended = pp.before;
        extended.push_back(construct_atom(d.rule));
        if (extended != pp.after) {
            shape_errors.push_back(std::string(to_string(d.rule)) + " at " + render(pp.before) +
                                   ": after-point " + render(pp.after) + " is not the before-point extended by " +
                                   std::string(to_string(construct_atom(d.rule))));
        }
        obligations.push_back({layer<Trace>(fresh).pop(), pp.before, d.rule, false});
    }

    template <class L, class R>
    void on_exit(const RuleData& d, const L&, const R& fresh) {
        if (is_normal(d.rule)) {
            obligations.push_back({layer<Trace>(fresh), node_points(d).after, d.rule, true});
        }
    }
};

// ---- Props 2 to 4 -----------------------------------------------------------

class ValidationSink {
public:
    ValidationSink(Report& p2, Report& p3, Report& p4) : p2_(p2), p3_(p3), p4_(p4) {}

    template <class V>
    void on_enter(const RuleData& d, const V& fresh) {
        if (d.rule == RuleName::Asg1 || d.rule == RuleName::FldAsg2) {
            entry_m_ = layer<ModMap>(fresh);
        }
    }

    template <class L, class R>
    void on_exit(const RuleData& d, const L& lower, const R& fresh) {
        const FlowSet& before = layer<FlowSet>(lower);
        const FlowSet& after = layer<FlowSet>(fresh);
        p3_.expect(before.is_prefix_of(after), [&] {
            return std::string(to_string(d.rule)) + " exit at " + show(layer<Trace>(fresh)) + ": flows shrank";
        });

        if (d.rule == RuleName::Asg1 || d.rule == RuleName::FldAsg2) {
            std::vector<Flow> added;
            std::size_t fresh_count = after.size() - before.size();
            after.for_each_reverse([&](const Flow& f) {
                if (added.size() == fresh_count) {
                    return false;
                }
                added.push_back(f);
                return true;
            });
            for (const Flow& f : added) {
                check_source_time(f);
                link(f);
            }
        }
        if (d.rule == RuleName::FldAsg2) {
            const Trace& now = layer<Trace>(fresh);
            written_[now.identity()] = {now, *d.value};
            if (const auto* l = std::get_if<Location>(&*d.value)) {
                check_chain(*l, *d.loc, *d.name, "write");
            }
        }
        if (d.rule == RuleName::Obj || d.rule == RuleName::FldAsg2 || d.rule == RuleName::Del1) {
            check_fields(layer<ModMap>(fresh), *d.state);
        }
    }

    void finish(const ModMap& m, const State& s) {
        check_fields(m, s);
        for (const auto& [l, obj] : s.heap) {
            for (const auto& [f, v] : obj) {
                if (const auto* target = std::get_if<Location>(&v)) {
                    check_chain(*target, l, f, "final heap");
                }
            }
        }
    }

private:
    void check_source_time(const Flow& f) {
        std::visit(
            [&](const auto& src) {
                using T = std::decay_t<decltype(src)>;
                const Trace* recorded = nullptr;
                std::string key;
                Trace when;
                if constexpr (std::is_same_v<T, VarAt>) {
                    recorded = entry_m_.find(src.var);
                    key = src.var;
                    when = src.when;
                } else if constexpr (std::is_same_v<T, FieldAt>) {
                    recorded = entry_m_.find(FieldKey{src.loc, src.alloc, src.field});
                    key = render(src.loc) + "." + src.field;
                    when = src.when;
                } else {
                    recorded = entry_m_.find(src.loc);
                    key = render(src.loc);
                    when = src.when;
                }
                p3_.expect(recorded && *recorded == when, [&] {
                    return render(f, kShownAtoms) + ": M[" + key + "] was " +
                           (recorded ? show(*recorded) : std::string("unbound")) + " when the store began";
                });
            },
            f.src);
    }

    void link(const Flow& f) {
        Source dst = as_source(f.dst);
        if (const auto* a = std::get_if<AllocAt>(&f.src)) {
            auto& roots = allocs_[a->loc];
            if (std::find(roots.begin(), roots.end(), f.src) == roots.end()) {
                roots.push_back(f.src);
            }
        }
        succ_[f.src].push_back(std::move(dst));
    }

    void check_fields(const ModMap& m, const State& s) {
        m.for_each([&](const ModKey& key, const Trace& t1) {
            const auto* fk = std::get_if<FieldKey>(&key);
            if (!fk) {
                return true;
            }
            const Trace* created = m.find(fk->loc);
            p2_.expect(created && *created == fk->alloc, [&] {
                return "field key " + render(fk->loc) + "." + fk->field + " carries creation time " +
                       show(fk->alloc) + " but M[" + render(fk->loc) + "] is " +
                       (created ? show(*created) : std::string("unbound"));
            });
            auto obj = s.heap.find(fk->loc);
            if (obj == s.heap.end()) {
                return true;
            }
            auto cell = obj->second.find(fk->field);
            if (cell == obj->second.end()) {
                return true; // deleted since: nothing to compare
            }
            auto w = written_.find(t1.identity());
            p2_.expect(w != written_.end() && w->second.second == cell->second, [&] {
                return render(fk->loc) + "." + fk->field + " holds " + render(cell->second) +
                       " but the write at " + show(t1) + " stored " +
                       (w == written_.end() ? std::string("nothing recorded") : render(w->second.second));
            });
            return true;
        });
    }

    void check_chain(Location l, Location holder, const Ident& f, const char* when) {
        std::set<Source> seen;
        std::deque<Source> todo;
        if (auto it = allocs_.find(l); it != allocs_.end()) {
            for (const Source& s : it->second) {
                seen.insert(s);
                todo.push_back(s);
            }
        }
        bool found = false;
        while (!todo.empty() && !found) {
            Source cur = std::move(todo.front());
            todo.pop_front();
            auto it = succ_.find(cur);
            if (it == succ_.end()) {
                continue;
            }
            for (const Source& nxt : it->second) {
                if (const auto* fa = std::get_if<FieldAt>(&nxt); fa && fa->loc == holder && fa->field == f) {
                    found = true;
                    break;
                }
                if (seen.insert(nxt).second) {
                    todo.push_back(nxt);
                }
            }
        }
        p4_.expect(found, [&] {
            return std::string(when) + ": " + render(holder) + "." + f + " = " + render(l) + " without a chain of flows from " +
                   render(l) + "'s allocation";
        });
    }

    Report& p2_;
    Report& p3_;
    Report& p4_;
    ModMap entry_m_;
    std::unordered_map<const void*, std::pair<Trace, Value>> written_;
    std::map<Location, std::vector<Source>> allocs_;
    std::map<Source, std::vector<Source>> succ_;
};

std::vector<CheckReport> check_props234(const Stat& s, std::uint64_t fuel, const std::string& program) {
    Report p2(program, "prop2"), p3(program, "prop3"), p4(program, "prop4");
    StatPtr decorated = annotate_pp({}, s);
    ValidationSink sink(p2, p3, p4);
    auto pass = compose(full_stack(), MonitorPass<ValidationSink>{&sink});
    auto ev = eval_stat(State{}, *decorated, fuel, pass);
    if (ev.outcome.exhausted()) {
        return {p2.skipped(), p3.skipped(), p4.skipped()};
    }
    sink.finish(layer<ModMap>(*ev.annotation), ev.outcome.result->state);
    return {p2.done(), p3.done(), p4.done()};
}

} // namespace

CheckReport check_prop1(const Stat& s, std::uint64_t fuel, const std::string& program) {
    Report rep(program, "prop1");
    StatPtr decorated = annotate_pp({}, s);
    PointSink sink;
    auto pass = compose(TracePass{}, MonitorPass<PointSink>{&sink});
    auto ev = eval_stat(State{}, *decorated, fuel, pass);
    if (ev.outcome.exhausted()) {
        return rep.skipped();
    }
    for (std::string& e : sink.shape_errors) {
        rep.fail(std::move(e));
    }
    PPResolver resolver(layer<Trace>(*ev.annotation));
    for (const auto& ob : sink.obligations) {
        PPResult got = resolver.resolve(ob.trace);
        rep.expect(got.pp == ob.expected && got.leftover.empty(), [&] {
            return std::string(to_string(ob.rule)) + (ob.at_exit ? " exit " : " entry ") + show(ob.trace) +
                   " maps to " + show(got) + ", decoration says " + render(ob.expected);
        });
    }
    return rep.done();
}

CheckReport check_prop2(const Stat& s, std::uint64_t fuel, const std::string& program) {
    return check_props234(s, fuel, program)[0];
}

CheckReport check_prop3(const Stat& s, std::uint64_t fuel, const std::string& program) {
    return check_props234(s, fuel, program)[1];
}

CheckReport check_prop4(const Stat& s, std::uint64_t fuel, const std::string& program) {
    return check_props234(s, fuel, program)[2];
}

CheckReport check_soundness(const Stat& s, std::uint64_t fuel, const std::string& program,
                            std::vector<LoopRecord>* loops) {
    Report rep(program, "soundness");
    StatPtr decorated = annotate_pp({}, s);
    auto ev = eval_stat(State{}, *decorated, fuel, full_stack());
    if (ev.outcome.exhausted()) {
        return rep.skipped();
    }
    AnalysisOptions opts;
    opts.loops = loops;
    AnalysisResult abs = analyze_program(*decorated, opts);

    std::map<AbsStore, std::vector<const AbsSource*>> by_store;
    for (const AbsFlow& f : abs.flows) {
        by_store[f.dst].push_back(&f.src);
    }
    auto matches = [](const AbsSource& concrete, const AbsSource& candidate) {
        if (concrete.index() != candidate.index()) {
            return false;
        }
        if (const auto* o = std::get_if<ObjAt>(&concrete)) {
            return o->site == std::get<ObjAt>(candidate).site;
        }
        if (const auto* v = std::get_if<AbsVarAt>(&concrete)) {
            return v->var == std::get<AbsVarAt>(candidate).var;
        }
        const auto& f = std::get<AbsFieldAt>(concrete);
        const auto& g = std::get<AbsFieldAt>(candidate);
        return f.site == g.site && f.field == g.field;
    };

    const auto& ann = *ev.annotation;
    PPResolver resolver(layer<Trace>(ann));
    for (const Flow& f : layer<FlowSet>(ann).items()) {
        AbsFlow lifted = abstract_flow(f, resolver);
        bool found = false;
        if (auto it = by_store.find(lifted.dst); it != by_store.end()) {
            for (const AbsSource* cand : it->second) {
                if (matches(lifted.src, *cand)) {
                    found = true;
                    break;
                }
            }
        }
        rep.expect(found, [&] {
            return "concrete " + render(f, kShownAtoms) + " lifts to " + render(lifted) +
                   ", which no analysed flow covers";
        });
    }
    return rep.done();
}

std::vector<CheckReport> check_all(const Stat& s, std::uint64_t fuel, const std::string& program,
                                   std::vector<LoopRecord>* loops) {
    std::vector<CheckReport> out;
    out.push_back(check_prop1(s, fuel, program));
    for (CheckReport& r : check_props234(s, fuel, program)) {
        out.push_back(std::move(r));
    }
    out.push_back(check_soundness(s, fuel, program, loops));
    return out;
}

// ---- generator --------------------------------------------------------------

namespace {

class Generator {
public:
    explicit Generator(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    StatPtr program() {
        std::vector<StatPtr> parts;
        // Most programs start by binding every variable so that runs get
        // past their first read.
        if (chance(0.8)) {
            for (const Ident& x : cfg_.var_pool) {
                parts.push_back(build::asg(x, chance(0.6) ? build::obj() : build::cst(chance(0.5))));
            }
        }
        parts.push_back(block(cfg_.max_depth));
        return build::seq(std::move(parts));
    }

private:
    bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

    int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(static_cast<int>(v.size())))];
    }

    StatPtr block(int depth) {
        int n = 1 + below(cfg_.max_stmts);
        std::vector<StatPtr> parts;
        for (int i = 0; i < n; ++i) {
            parts.push_back(statement(depth));
        }
        return build::seq(std::move(parts));
    }

    StatPtr statement(int depth) {
        if (depth > 1 && chance(cfg_.while_probability)) {
            return loop(depth);
        }
        int k = below(depth > 1 ? 10 : 8);
        switch (k) {
        case 0: return build::skip();
        case 1:
        case 2:
        case 3: return build::asg(pick(cfg_.var_pool), expression(2));
        case 4:
        case 5: return build::fld_asg(object_expr(), pick(cfg_.field_pool), expression(2));
        case 6: return build::del(object_expr(), pick(cfg_.field_pool));
        case 7: return build::asg(pick(cfg_.var_pool), build::obj());
        default:
            return build::if_(condition(), block(depth - 1), block(depth - 1));
        }
    }

    // Loops count down a guard variable that the body clears with high
    // probability, so most samples terminate.
    StatPtr loop(int depth) {
        const Ident& guard = pick(cfg_.var_pool);
        StatPtr body = block(depth - 1);
        if (chance(0.85)) {
            body = build::seq(std::move(body), build::asg(guard, build::cst(false)));
        }
        ExprPtr cond = chance(0.8) ? build::var(guard) : condition();
        return build::seq(build::asg(guard, build::cst(true)), build::while_(std::move(cond), std::move(body)));
    }

    ExprPtr object_expr() {
        switch (below(4)) {
        case 0: return build::obj();
        case 1: return build::fld(build::var(pick(cfg_.var_pool)), pick(cfg_.field_pool));
        default: return build::var(pick(cfg_.var_pool));
        }
    }

    ExprPtr condition() {
        switch (below(4)) {
        case 0: return build::cst(chance(0.5));
        case 1: return build::var(pick(cfg_.var_pool));
        default: return expression(2);
        }
    }

    ExprPtr expression(int depth) {
        int k = below(depth > 0 ? 7 : 4);
        switch (k) {
        case 0: return build::cst(chance(0.5));
        case 1:
        case 2: return build::var(pick(cfg_.var_pool));
        case 3: return build::obj();
        case 4:
        case 5: return build::fld(expression(depth - 1), pick(cfg_.field_pool));
        default: {
            static const BinOp ops[] = {BinOp::Eq, BinOp::And, BinOp::Or};
            return build::bin(ops[below(3)], expression(depth - 1), expression(depth - 1));
        }
        }
    }

    const GenConfig& cfg_;
    std::mt19937_64 rng_;
};

} // namespace

StatPtr gen_program(const GenConfig& cfg) {
    if (cfg.var_pool.empty() || cfg.field_pool.empty()) {
        throw std::invalid_argument("generator pools must be nonempty");
    }
    if (cfg.max_depth < 1 || cfg.max_stmts < 1) {
        throw std::invalid_argument("generator bounds must be at least 1");
    }
    if (cfg.while_probability < 0 || cfg.while_probability > 1) {
        throw std::invalid_argument("while probability must lie in [0, 1]");
    }
    return Generator(cfg).program();
}

} // namespace owhile
