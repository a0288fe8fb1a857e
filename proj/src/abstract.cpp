#include "owhile/abstract.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace owhile {

namespace {

template <class T>
std::set<T> set_union(const std::set<T>& a, const std::set<T>& b) {
    if (a.empty()) {
        return b;
    }
    std::set<T> out = a;
    out.insert(b.begin(), b.end());
    return out;
}

template <class T>
bool subset(const std::set<T>& a, const std::set<T>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

template <class K>
std::map<K, AbsVal> map_join(const std::map<K, AbsVal>& a, const std::map<K, AbsVal>& b) {
    std::map<K, AbsVal> out = a;
    for (const auto& [k, v] : b) {
        auto [it, inserted] = out.emplace(k, v);
        if (!inserted) {
            it->second = val_join(it->second, v);
        }
    }
    return out;
}

template <class K>
bool map_leq(const std::map<K, AbsVal>& a, const std::map<K, AbsVal>& b) {
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        if (it == b.end() ? !v.is_bottom() : !val_leq(v, it->second)) {
            return false;
        }
    }
    return true;
}

const PointPair& points(const Expr& e) {
    if (!e.points) {
        throw std::invalid_argument("analysis needs program points on every expression");
    }
    return *e.points;
}

const PointPair& points(const Stat& s) {
    if (!s.points) {
        throw std::invalid_argument("analysis needs program points on every statement");
    }
    return *s.points;
}

void add_flows(AbsFlowSet& out, const AbsVal& from, const AbsStore& to) {
    for (const ProgramPoint& site : from.locs) {
        out.insert(AbsFlow{ObjAt{site}, to});
    }
    for (const AbsSource& src : from.deps) {
        out.insert(AbsFlow{src, to});
    }
}

void add_flows(AbsFlowSet& out, const AbsDeps& from, const AbsStore& to) {
    for (const AbsSource& src : from) {
        out.insert(AbsFlow{src, to});
    }
}

} // namespace

AbsVal val_join(const AbsVal& a, const AbsVal& b) { return {set_union(a.locs, b.locs), set_union(a.deps, b.deps)}; }

bool val_leq(const AbsVal& a, const AbsVal& b) { return subset(a.locs, b.locs) && subset(a.deps, b.deps); }

AbsEnv env_join(const AbsEnv& a, const AbsEnv& b) { return map_join(a, b); }
bool env_leq(const AbsEnv& a, const AbsEnv& b) { return map_leq(a, b); }
AbsHeap heap_join(const AbsHeap& a, const AbsHeap& b) { return map_join(a, b); }
bool heap_leq(const AbsHeap& a, const AbsHeap& b) { return map_leq(a, b); }

AbsVal heap_read(const AbsHeap& h, const AbsLoc& l, const Ident& f) {
    AbsVal out;
    for (const ProgramPoint& site : l) {
        auto it = h.find({site, f});
        if (it != h.end()) {
            out = val_join(out, it->second);
        }
    }
    return out;
}

AbsHeap heap_write(AbsHeap h, const AbsLoc& l, const Ident& f, const AbsVal& v) {
    if (v.is_bottom()) {
        return h;
    }
    for (const ProgramPoint& site : l) {
        auto [it, inserted] = h.emplace(std::make_pair(site, f), v);
        if (!inserted) {
            it->second = val_join(it->second, v);
        }
    }
    return h;
}

AbsVal analyze_expr(const AbsEnv& env, const AbsHeap& heap, const Expr& e) {
    const PointPair& pp = points(e);
    return std::visit(
        [&](const auto& n) -> AbsVal {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, expr::Cst>) {
                return {};
            } else if constexpr (std::is_same_v<T, expr::Var>) {
                AbsVal out;
                if (auto it = env.find(n.name); it != env.end()) {
                    out = it->second;
                }
                out.deps.insert(AbsVarAt{n.name, pp.after});
                return out;
            } else if constexpr (std::is_same_v<T, expr::Bin>) {
                // Every operator yields a boolean, so no locations. The
                // concrete result still depends on objects created inside
                // the operands, hence their sites become sources.
                AbsVal a = analyze_expr(env, heap, *n.lhs);
                AbsVal b = analyze_expr(env, heap, *n.rhs);
                AbsVal out{{}, set_union(a.deps, b.deps)};
                for (const AbsLoc* l : {&a.locs, &b.locs}) {
                    for (const ProgramPoint& site : *l) {
                        out.deps.insert(ObjAt{site});
                    }
                }
                return out;
            } else if constexpr (std::is_same_v<T, expr::Obj>) {
                return {{pp.after}, {}};
            } else {
                AbsVal base = analyze_expr(env, heap, *n.base);
                AbsVal field = heap_read(heap, base.locs, n.field);
                AbsVal out{field.locs, set_union(base.deps, field.deps)};
                for (const ProgramPoint& site : base.locs) {
                    out.deps.insert(AbsFieldAt{site, n.field, pp.after});
                }
                return out;
            }
        },
        e.node);
}

AnalysisResult analyze_stat(const AbsEnv& env, const AbsHeap& heap, const Stat& s, const AnalysisOptions& opts) {
    const PointPair& pp = points(s);
    return std::visit(
        [&](const auto& n) -> AnalysisResult {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, stmt::Skip>) {
                return {env, heap, {}};
            } else if constexpr (std::is_same_v<T, stmt::Seq>) {
                AnalysisResult a = analyze_stat(env, heap, *n.first, opts);
                AnalysisResult b = analyze_stat(a.env, a.heap, *n.second, opts);
                b.flows.insert(a.flows.begin(), a.flows.end());
                return b;
            } else if constexpr (std::is_same_v<T, stmt::If>) {
                AnalysisResult a = analyze_stat(env, heap, *n.then_branch, opts);
                AnalysisResult b = analyze_stat(env, heap, *n.else_branch, opts);
                a.env = env_join(a.env, b.env);
                a.heap = heap_join(a.heap, b.heap);
                a.flows.insert(b.flows.begin(), b.flows.end());
                return a;
            } else if constexpr (std::is_same_v<T, stmt::While>) {
                return while_fixpoint(env, heap, s, opts);
            } else if constexpr (std::is_same_v<T, stmt::Asg>) {
                AbsVal v = analyze_expr(env, heap, *n.rhs);
                AnalysisResult out{env, heap, {}};
                add_flows(out.flows, v, AbsVarAt{n.var, pp.before});
                if (v.is_bottom()) {
                    out.env.erase(n.var);
                } else {
                    out.env[n.var] = std::move(v);
                }
                return out;
            } else if constexpr (std::is_same_v<T, stmt::FldAsg>) {
                AbsVal target = analyze_expr(env, heap, *n.target);
                AbsVal v = analyze_expr(env, heap, *n.rhs);
                AnalysisResult out{env, heap_write(heap, target.locs, n.field, v), {}};
                for (const ProgramPoint& site : target.locs) {
                    add_flows(out.flows, v, AbsFieldAt{site, n.field, pp.before});
                }
                return out;
            } else {
                AbsVal target = analyze_expr(env, heap, *n.target);
                AnalysisResult out{env, heap, {}};
                for (const ProgramPoint& site : target.locs) {
                    add_flows(out.flows, target.deps, AbsFieldAt{site, n.field, pp.before});
                }
                return out;
            }
        },
        s.node);
}

AnalysisResult while_fixpoint(const AbsEnv& env, const AbsHeap& heap, const Stat& loop, const AnalysisOptions& opts) {
    const auto* w = std::get_if<stmt::While>(&loop.node);
    if (!w) {
        throw std::invalid_argument("while_fixpoint expects a loop");
    }
    AnalysisResult inv{env, heap, {}};
    AnalysisResult body;
    std::size_t rounds = 0;
    while (true) {
        if (rounds == opts.max_rounds) {
            throw FixpointError("loop at " + render(points(loop).before) + " not stable after " +
                                std::to_string(rounds) + " rounds");
        }
        ++rounds;
        body = analyze_stat(inv.env, inv.heap, *w->body, opts);
        inv.flows.insert(body.flows.begin(), body.flows.end());
        if (env_leq(body.env, inv.env) && heap_leq(body.heap, inv.heap)) {
            break;
        }
        inv.env = env_join(inv.env, body.env);
        inv.heap = heap_join(inv.heap, body.heap);
    }
    LoopRecord rec;
    rec.at = points(loop).before;
    rec.rounds = rounds;
    rec.input_below = env_leq(env, inv.env) && heap_leq(heap, inv.heap);
    rec.body_below = env_leq(body.env, inv.env) && heap_leq(body.heap, inv.heap);
    if (!rec.input_below || !rec.body_below) {
        throw std::logic_error("loop invariant at " + render(rec.at) + " violates its own premises");
    }
    if (opts.loops) {
        opts.loops->push_back(std::move(rec));
    }
    return inv;
}

AnalysisResult analyze_program(const Stat& decorated, const AnalysisOptions& opts) {
    return analyze_stat({}, {}, decorated, opts);
}

} // namespace owhile
