#pragma once

// Annotation passes over derivations. A pass decorates every rule
// application with a left annotation (before the rule) and a right one
// (after it), built by five hooks:
//
//   init   every rule: incoming annotation -> left annotation
//   axiom  leaf rules: left -> right
//   up     rules with premises: left -> incoming of the first premise
//   next   two-premise rules: left, right of premise 1 -> incoming of premise 2
//   down   rules with premises: left, right of the last premise -> right
//
// Each hook also receives views of the passes stacked underneath: the lower
// left annotation of the same rule and the lower result of the same hook
// ("fresh"). Compose<P, Q> runs P first and hands its fresh output to Q.

#include <map>
#include <memory>
#include <set>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "owhile/ast.hpp"
#include "owhile/flow.hpp"
#include "owhile/trace.hpp"
#include "owhile/pmap.hpp"

namespace owhile {

// ---------------------------------------------------------------------------
// Per-rule data handed to hooks
// ---------------------------------------------------------------------------

enum class ErrorCause : std::uint8_t {
    Propagated,     // a premise already failed
    UnboundVar,
    NonBoolCond,
    NonBoolOperand,
    NotALocation,
    UnboundLocation,
    FieldAbsent,
};
std::string_view to_string(ErrorCause c);

// What each rule fills in beyond `rule`, `state` and the term node:
//   Var        name = x, value = E[x]
//   Cst, Bin2  value
//   Obj        loc = fresh location, value = loc
//   Fld1       loc, name = f, value = H[loc][f]
//   Asg1       name = x, value stored
//   FldAsg1    loc = target
//   FldAsg2    loc, name = f, value stored
//   Del1       loc, name = f
//   Abort      cause, site (normal rule whose sub-derivation failed)
// `state` is the state at the hook being called: the incoming state for
// init/up/next, the outgoing one for axiom/down.
struct RuleData {
    RuleName rule = RuleName::Skip;
    const Stat* stat = nullptr;
    const Expr* expr = nullptr;
    const Ident* name = nullptr;
    std::optional<Location> loc;
    std::optional<Value> value;
    const State* state = nullptr;
    ErrorCause cause = ErrorCause::Propagated;
    RuleName site = RuleName::Abort;
};

// ---------------------------------------------------------------------------
// Layer lookup through stacked views
// ---------------------------------------------------------------------------

struct Unit {
    bool operator==(const Unit&) const = default;
};

// View of a lower annotation stack: `lower` below, `self` on top.
template <class Lo, class Self>
struct Stack {
    const Lo& lower;
    const Self& self;
};

namespace detail {

template <class T, class X>
struct holds : std::is_same<T, X> {};
template <class T, class A, class B>
struct holds<T, std::pair<A, B>> : std::bool_constant<holds<T, A>::value || holds<T, B>::value> {};
template <class T, class Lo, class S>
struct holds<T, Stack<Lo, S>> : std::bool_constant<holds<T, S>::value || holds<T, Lo>::value> {};

template <class>
inline constexpr bool always_false = false;

} // namespace detail

template <class T, class X>
inline constexpr bool has_layer = detail::holds<T, X>::value;

// Finds the annotation of type T inside a (possibly nested) view or pair,
// preferring the topmost one.
template <class T, class X>
const T& layer(const X& x) {
    if constexpr (std::is_same_v<T, X>) {
        return x;
    } else if constexpr (has_layer<T, X>) {
        if constexpr (requires { x.self; }) {
            if constexpr (has_layer<T, std::remove_cvref_t<decltype(x.self)>>) {
                return layer<T>(x.self);
            } else {
                return layer<T>(x.lower);
            }
        } else {
            if constexpr (has_layer<T, std::remove_cvref_t<decltype(x.second)>>) {
                return layer<T>(x.second);
            } else {
                return layer<T>(x.first);
            }
        }
    } else {
        static_assert(detail::always_false<X>, "annotation layer not present below this pass");
    }
}

// ---------------------------------------------------------------------------
// Persistent containers
// ---------------------------------------------------------------------------

template <class T>
class CowSet {
public:
    using Set = std::set<T>;

    bool contains(const T& x) const { return m_ && m_->count(x) > 0; }

    CowSet insert(T x) const {
        if (contains(x)) {
            return *this;
        }
        auto copy = m_ ? std::make_shared<Set>(*m_) : std::make_shared<Set>();
        copy->insert(std::move(x));
        CowSet out;
        out.m_ = std::move(copy);
        return out;
    }

    std::size_t size() const { return m_ ? m_->size() : 0; }
    bool empty() const { return size() == 0; }
    const Set& items() const { return m_ ? *m_ : empty_set(); }
    bool operator==(const CowSet& o) const { return m_ == o.m_ || items() == o.items(); }

private:
    static const Set& empty_set() {
        static const Set e;
        return e;
    }
    std::shared_ptr<const Set> m_;
};

// ---------------------------------------------------------------------------
// Annotation carriers
// ---------------------------------------------------------------------------

struct FieldKey {
    Location loc;
    Trace alloc;
    Ident field;
    auto operator<=>(const FieldKey&) const = default;
};

using ModKey = std::variant<Location, Ident, FieldKey>;

// Last-modified map M. Entries are only ever added or overwritten.
struct ModMap : PersistentMap<ModKey, Trace> {
    ModMap() = default;
    ModMap(PersistentMap<ModKey, Trace> m) : PersistentMap(std::move(m)) {}

    // The trace bound to `k`, or the empty trace when unbound.
    Trace at(const ModKey& k) const {
        const Trace* t = find(k);
        return t ? *t : Trace{};
    }
};

// Pending dependencies d.
struct DepSet : CowSet<Source> {
    DepSet() = default;
    DepSet(CowSet<Source> s) : CowSet(std::move(s)) {}
};

// Flow relation Δ. A run only ever adds flows, so the set is kept as a
// persistent log shared between every point of the run.
class FlowSet {
public:
    FlowSet add(Flow f) const {
        FlowSet out;
        out.last_ = std::make_shared<const Node>(std::move(f), size() + 1, last_);
        return out;
    }

    std::size_t size() const { return last_ ? last_->size : 0; }
    bool empty() const { return !last_; }

    // Flows oldest first.
    std::vector<Flow> items() const;
    std::set<Flow> to_set() const;
    bool contains(const Flow& f) const;
    // True iff `this` is an earlier state of `later`'s log.
    bool is_prefix_of(const FlowSet& later) const;

    // Walks newest to oldest until fn returns false.
    template <class Fn>
    void for_each_reverse(Fn&& fn) const {
        for (const Node* n = last_.get(); n; n = n->prev.get()) {
            if (!fn(n->flow)) {
                return;
            }
        }
    }

    bool operator==(const FlowSet& o) const { return last_ == o.last_ || to_set() == o.to_set(); }

private:
    struct Node {
        Flow flow;
        std::size_t size;
        mutable std::shared_ptr<const Node> prev;
        Node(Flow f, std::size_t n, std::shared_ptr<const Node> p) : flow(std::move(f)), size(n), prev(std::move(p)) {}
        ~Node();
    };
    std::shared_ptr<const Node> last_;
};

// ---------------------------------------------------------------------------
// Passes
// ---------------------------------------------------------------------------

// Trivial annotations.
struct UnitPass {
    using Left = Unit;
    using Right = Unit;
    Left initial() const { return {}; }
    template <class F>
    Left init(const RuleData&, const Left&, const F&) const { return {}; }
    template <class L, class F>
    Right axiom(const RuleData&, const Left&, const L&, const F&) const { return {}; }
    template <class L, class F>
    Left up(const RuleData&, const Left&, const L&, const F&) const { return {}; }
    template <class L, class R, class F>
    Left next(const RuleData&, const Left&, const Right&, const L&, const R&, const F&) const { return {}; }
    template <class L, class R, class F>
    Right down(const RuleData&, const Left&, const Right&, const L&, const R&, const F&) const { return {}; }
};

// Partial traces: i:Name on the way in, o:Name on the way out.
struct TracePass {
    using Left = Trace;
    using Right = Trace;
    Left initial() const { return {}; }
    template <class F>
    Left init(const RuleData& d, const Left& in, const F&) const { return in.push(enter(d.rule)); }
    template <class L, class F>
    Right axiom(const RuleData& d, const Left& left, const L&, const F&) const { return left.push(exit(d.rule)); }
    template <class L, class F>
    Left up(const RuleData&, const Left& left, const L&, const F&) const { return left; }
    template <class L, class R, class F>
    Left next(const RuleData&, const Left&, const Right& right1, const L&, const R&, const F&) const {
        return right1;
    }
    template <class L, class R, class F>
    Right down(const RuleData& d, const Left&, const Right& last, const L&, const R&, const F&) const {
        return last.push(exit(d.rule));
    }
};

// Last-modified map: creation time of locations, last write of variables
// and fields. Needs traces underneath.
struct LastModPass {
    using Left = ModMap;
    using Right = ModMap;
    Left initial() const { return {}; }
    template <class F>
    Left init(const RuleData&, const Left& in, const F&) const { return in; }
    template <class L, class F>
    Right axiom(const RuleData& d, const Left& m, const L&, const F& fresh) const {
        const Trace& now = layer<Trace>(fresh);
        switch (d.rule) {
        case RuleName::Obj:
            return m.set(*d.loc, now);
        case RuleName::Asg1:
            return m.set(*d.name, now);
        case RuleName::FldAsg2:
            return m.set(FieldKey{*d.loc, m.at(*d.loc), *d.name}, now);
        default:
            return m;
        }
    }
    template <class L, class F>
    Left up(const RuleData&, const Left& left, const L&, const F&) const { return left; }
    template <class L, class R, class F>
    Left next(const RuleData&, const Left&, const Right& right1, const L&, const R&, const F&) const {
        return right1;
    }
    template <class L, class R, class F>
    Right down(const RuleData&, const Left&, const Right& last, const L&, const R&, const F&) const {
        return last;
    }
};

// Dependencies gathered by expressions, consumed by the assignment that
// follows. Needs traces and the last-modified map underneath.
struct DepPass {
    using Left = DepSet;
    using Right = DepSet;
    Left initial() const { return {}; }
    template <class F>
    Left init(const RuleData&, const Left& in, const F&) const { return in; }

    template <class L, class F>
    Right axiom(const RuleData& d, const Left& deps, const L& lower, const F& fresh) const {
        const ModMap& m = layer<ModMap>(lower);
        switch (d.rule) {
        case RuleName::Var:
            return deps.insert(VarAt{*d.name, m.at(*d.name)});
        case RuleName::Obj:
            return deps.insert(AllocAt{*d.loc, layer<Trace>(fresh)});
        case RuleName::Fld1: {
            Trace alloc = m.at(*d.loc);
            Trace when = m.at(FieldKey{*d.loc, alloc, *d.name});
            return deps.insert(FieldAt{*d.loc, alloc, *d.name, when});
        }
        case RuleName::Asg1:
        case RuleName::FldAsg2:
            return {};
        default:
            return deps;
        }
    }

    template <class L, class F>
    Left up(const RuleData& d, const Left& left, const L&, const F&) const {
        return resets(d.rule) ? Left{} : left;
    }

    template <class L, class R, class F>
    Left next(const RuleData& d, const Left&, const Right& right1, const L&, const R&, const F&) const {
        switch (d.rule) {
        case RuleName::If:
        case RuleName::While:
        case RuleName::FldAsg:
        case RuleName::Del:
            return {};
        default:
            return right1;
        }
    }

    template <class L, class R, class F>
    Right down(const RuleData& d, const Left&, const Right& last, const L&, const R&, const F&) const {
        return resets(d.rule) ? Right{} : last;
    }

private:
    // Statement rules that start their premises from, and end with, no
    // pending dependencies.
    static bool resets(RuleName r) {
        switch (r) {
        case RuleName::If:
        case RuleName::While:
        case RuleName::Asg:
        case RuleName::FldAsg:
        case RuleName::FldAsg1:
        case RuleName::Del:
            return true;
        default:
            return false;
        }
    }
};

// Direct flows, added by the two rules that store a value.
struct FlowPass {
    using Left = FlowSet;
    using Right = FlowSet;
    Left initial() const { return {}; }
    template <class F>
    Left init(const RuleData&, const Left& in, const F&) const { return in; }
    template <class L, class F>
    Right axiom(const RuleData& d, const Left& delta, const L& lower, const F& fresh) const {
        if (d.rule != RuleName::Asg1 && d.rule != RuleName::FldAsg2) {
            return delta;
        }
        const Trace& now = layer<Trace>(fresh);
        Store dst;
        if (d.rule == RuleName::Asg1) {
            dst = VarAt{*d.name, now};
        } else {
            dst = FieldAt{*d.loc, layer<ModMap>(lower).at(*d.loc), *d.name, now};
        }
        FlowSet out = delta;
        for (const Source& src : layer<DepSet>(lower).items()) {
            out = out.add(Flow{src, dst});
        }
        return out;
    }
    template <class L, class F>
    Left up(const RuleData&, const Left& left, const L&, const F&) const { return left; }
    template <class L, class R, class F>
    Left next(const RuleData&, const Left&, const Right& right1, const L&, const R&, const F&) const {
        return right1;
    }
    template <class L, class R, class F>
    Right down(const RuleData&, const Left&, const Right& last, const L&, const R&, const F&) const {
        return last;
    }
};

// Observer with unit annotations. Calls sink.on_enter(d, view) after every
// init and sink.on_exit(d, left_view, right_view) after every axiom/down,
// where the views expose the passes underneath.
template <class Sink>
struct MonitorPass {
    Sink* sink;

    using Left = Unit;
    using Right = Unit;
    Left initial() const { return {}; }
    template <class F>
    Left init(const RuleData& d, const Left&, const F& fresh) const {
        sink->on_enter(d, fresh);
        return {};
    }
    template <class L, class F>
    Right axiom(const RuleData& d, const Left&, const L& lower, const F& fresh) const {
        sink->on_exit(d, lower, fresh);
        return {};
    }
    template <class L, class F>
    Left up(const RuleData&, const Left&, const L&, const F&) const { return {}; }
    template <class L, class R, class F>
    Left next(const RuleData&, const Left&, const Right&, const L&, const R&, const F&) const { return {}; }
    template <class L, class R, class F>
    Right down(const RuleData& d, const Left&, const Right&, const L& lower, const R&, const F& fresh) const {
        sink->on_exit(d, lower, fresh);
        return {};
    }
};

template <class P, class Q>
struct Compose {
    P p;
    Q q;

    using Left = std::pair<typename P::Left, typename Q::Left>;
    using Right = std::pair<typename P::Right, typename Q::Right>;

    Left initial() const { return {p.initial(), q.initial()}; }

    template <class F>
    Left init(const RuleData& d, const Left& in, const F& fresh) const {
        auto a = p.init(d, in.first, fresh);
        auto b = q.init(d, in.second, Stack<F, typename P::Left>{fresh, a});
        return {std::move(a), std::move(b)};
    }

    template <class L, class F>
    Right axiom(const RuleData& d, const Left& left, const L& lower, const F& fresh) const {
        auto a = p.axiom(d, left.first, lower, fresh);
        auto b = q.axiom(d, left.second, Stack<L, typename P::Left>{lower, left.first},
                         Stack<F, typename P::Right>{fresh, a});
        return {std::move(a), std::move(b)};
    }

    template <class L, class F>
    Left up(const RuleData& d, const Left& left, const L& lower, const F& fresh) const {
        auto a = p.up(d, left.first, lower, fresh);
        auto b = q.up(d, left.second, Stack<L, typename P::Left>{lower, left.first},
                      Stack<F, typename P::Left>{fresh, a});
        return {std::move(a), std::move(b)};
    }

    template <class L, class R, class F>
    Left next(const RuleData& d, const Left& left, const Right& right1, const L& lower, const R& lower_r1,
              const F& fresh) const {
        auto a = p.next(d, left.first, right1.first, lower, lower_r1, fresh);
        auto b = q.next(d, left.second, right1.second, Stack<L, typename P::Left>{lower, left.first},
                        Stack<R, typename P::Right>{lower_r1, right1.first},
                        Stack<F, typename P::Left>{fresh, a});
        return {std::move(a), std::move(b)};
    }

    template <class L, class R, class F>
    Right down(const RuleData& d, const Left& left, const Right& last, const L& lower, const R& lower_last,
               const F& fresh) const {
        auto a = p.down(d, left.first, last.first, lower, lower_last, fresh);
        auto b = q.down(d, left.second, last.second, Stack<L, typename P::Left>{lower, left.first},
                        Stack<R, typename P::Right>{lower_last, last.first},
                        Stack<F, typename P::Right>{fresh, a});
        return {std::move(a), std::move(b)};
    }
};

template <class P, class Q>
Compose<P, Q> compose(P p, Q q) {
    return {std::move(p), std::move(q)};
}

using LastModStack = Compose<TracePass, LastModPass>;
using DepStack = Compose<LastModStack, DepPass>;
// Traces, M, d and Δ together.
using FullStack = Compose<DepStack, FlowPass>;

inline FullStack full_stack() { return {}; }

} // namespace owhile
