#pragma once

// Fueled pretty-big-step evaluator. Every rule application, extended rules
// and Abort included, costs one unit of fuel and fires the pass hooks under
// its own rule name. Extended terms are not materialized: each one is a
// member function taking the sub-result it scrutinizes.

#include <cstdint>
#include <functional>
#include <optional>

#include "owhile/annot.hpp"
#include "owhile/ast.hpp"

namespace owhile {

inline constexpr std::uint64_t kDefaultFuel = 1'000'000;

// kDefaultFuel unless OWHILE_FUEL holds a positive integer.
std::uint64_t default_fuel();

// Done(result) or Exhausted.
template <class Result>
struct Outcome {
    std::optional<Result> result;

    bool exhausted() const { return !result.has_value(); }
    bool ok() const { return result && result->status == Status::Ok; }
    bool err() const { return result && result->status == Status::Err; }
    bool operator==(const Outcome&) const = default;
};

// The first non-propagated Abort of a run.
struct ErrorInfo {
    RuleName site;
    ErrorCause cause;
    bool operator==(const ErrorInfo&) const = default;
};

template <class Pass, class Result>
struct Evaluation {
    Outcome<Result> outcome;
    // Right annotation of the root rule; empty when exhausted.
    std::optional<typename Pass::Right> annotation;
    std::uint64_t steps = 0;
    std::optional<ErrorInfo> error;
};

// Runs fn on a thread with a large stack so that deep derivations (long
// loops nest one While rule per iteration) do not overflow. Exceptions
// thrown by fn are rethrown in the caller.
void run_with_large_stack(const std::function<void()>& fn);

// Value of `a op b`, or nullopt when the operator does not apply.
std::optional<Value> apply_binop(BinOp op, const Value& a, const Value& b);

namespace detail {

struct OutOfFuel {};

template <class Pass>
class Evaluator {
public:
    using Left = typename Pass::Left;
    using Right = typename Pass::Right;

    struct SR {
        StatResult r;
        Right a;
    };
    struct ER {
        ExprResult r;
        Right a;
    };

    Evaluator(const Pass& pass, std::uint64_t fuel) : pass_(pass), fuel_(fuel), budget_(fuel) {}

    std::uint64_t steps() const { return budget_ - fuel_; }
    const std::optional<ErrorInfo>& error() const { return error_; }

    // ---- statements --------------------------------------------------------

    SR stat(State s, const Stat& t, const Left& in) {
        return std::visit([&](const auto& n) { return stat_rule(std::move(s), t, n, in); }, t.node);
    }

    SR stat_rule(State s, const Stat& t, const stmt::Skip&, const Left& in) {
        RuleData d = data(RuleName::Skip, &t);
        Left left = init(d, in, s);
        Right right = axiom(d, left, s);
        return {{Status::Ok, std::move(s)}, std::move(right)};
    }

    SR stat_rule(State s, const Stat& t, const stmt::Seq& n, const Left& in) {
        RuleData d = data(RuleName::Seq, &t);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        SR r1 = stat(std::move(s), *n.first, n1);
        Left n2 = next(d, left, r1.a, r1.r.state);
        SR r2 = seq1(std::move(r1.r), t, n, n2);
        return finish(d, left, std::move(r2));
    }

    SR seq1(StatResult r, const Stat& t, const stmt::Seq& n, const Left& in) {
        if (r.status == Status::Err) {
            return abort_stat(std::move(r.state), t, in, RuleName::Seq, ErrorCause::Propagated);
        }
        RuleData d = data(RuleName::Seq1, &t);
        Left left = init(d, in, r.state);
        Left n1 = up(d, left);
        SR r2 = stat(std::move(r.state), *n.second, n1);
        return finish(d, left, std::move(r2));
    }

    SR stat_rule(State s, const Stat& t, const stmt::If& n, const Left& in) {
        RuleData d = data(RuleName::If, &t);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        ER c = expr(std::move(s), *n.cond, n1);
        Left n2 = next(d, left, c.a, c.r.state);
        SR r = if1(std::move(c.r), t, n, n2);
        return finish(d, left, std::move(r));
    }

    SR if1(ExprResult c, const Stat& t, const stmt::If& n, const Left& in) {
        if (c.status == Status::Err) {
            return abort_stat(std::move(c.state), t, in, RuleName::If, ErrorCause::Propagated);
        }
        const bool* b = std::get_if<bool>(&*c.value);
        if (!b) {
            return abort_stat(std::move(c.state), t, in, RuleName::If, ErrorCause::NonBoolCond);
        }
        RuleData d = data(*b ? RuleName::IfTrue : RuleName::IfFalse, &t);
        d.value = *c.value;
        Left left = init(d, in, c.state);
        Left n1 = up(d, left);
        SR r = stat(std::move(c.state), *b ? *n.then_branch : *n.else_branch, n1);
        return finish(d, left, std::move(r));
    }

    SR stat_rule(State s, const Stat& t, const stmt::While& n, const Left& in) {
        RuleData d = data(RuleName::While, &t);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        ER c = expr(std::move(s), *n.cond, n1);
        Left n2 = next(d, left, c.a, c.r.state);
        SR r = while1(std::move(c.r), t, n, n2);
        return finish(d, left, std::move(r));
    }

    SR while1(ExprResult c, const Stat& t, const stmt::While& n, const Left& in) {
        if (c.status == Status::Err) {
            return abort_stat(std::move(c.state), t, in, RuleName::While, ErrorCause::Propagated);
        }
        const bool* b = std::get_if<bool>(&*c.value);
        if (!b) {
            return abort_stat(std::move(c.state), t, in, RuleName::While, ErrorCause::NonBoolCond);
        }
        if (!*b) {
            RuleData d = data(RuleName::WhileFalse, &t);
            d.value = *c.value;
            Left left = init(d, in, c.state);
            Right right = axiom(d, left, c.state);
            return {{Status::Ok, std::move(c.state)}, std::move(right)};
        }
        RuleData d = data(RuleName::WhileTrue1, &t);
        d.value = *c.value;
        Left left = init(d, in, c.state);
        Left n1 = up(d, left);
        SR body = stat(std::move(c.state), *n.body, n1);
        Left n2 = next(d, left, body.a, body.r.state);
        SR r = while2(std::move(body.r), t, n2);
        return finish(d, left, std::move(r));
    }

    SR while2(StatResult r, const Stat& t, const Left& in) {
        if (r.status == Status::Err) {
            return abort_stat(std::move(r.state), t, in, RuleName::While, ErrorCause::Propagated);
        }
        RuleData d = data(RuleName::WhileTrue2, &t);
        Left left = init(d, in, r.state);
        Left n1 = up(d, left);
        SR again = stat(std::move(r.state), t, n1);
        return finish(d, left, std::move(again));
    }

    SR stat_rule(State s, const Stat& t, const stmt::Asg& n, const Left& in) {
        RuleData d = data(RuleName::Asg, &t);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        ER v = expr(std::move(s), *n.rhs, n1);
        Left n2 = next(d, left, v.a, v.r.state);
        SR r = asg1(std::move(v.r), t, n, n2);
        return finish(d, left, std::move(r));
    }

    SR asg1(ExprResult v, const Stat& t, const stmt::Asg& n, const Left& in) {
        if (v.status == Status::Err) {
            return abort_stat(std::move(v.state), t, in, RuleName::Asg, ErrorCause::Propagated);
        }
        RuleData d = data(RuleName::Asg1, &t);
        d.name = &n.var;
        d.value = *v.value;
        Left left = init(d, in, v.state);
        v.state.env[n.var] = *v.value;
        Right right = axiom(d, left, v.state);
        return {{Status::Ok, std::move(v.state)}, std::move(right)};
    }

    SR stat_rule(State s, const Stat& t, const stmt::FldAsg& n, const Left& in) {
        RuleData d = data(RuleName::FldAsg, &t);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        ER target = expr(std::move(s), *n.target, n1);
        Left n2 = next(d, left, target.a, target.r.state);
        SR r = fld_asg1(std::move(target.r), t, n, n2);
        return finish(d, left, std::move(r));
    }

    SR fld_asg1(ExprResult target, const Stat& t, const stmt::FldAsg& n, const Left& in) {
        if (target.status == Status::Err) {
            return abort_stat(std::move(target.state), t, in, RuleName::FldAsg, ErrorCause::Propagated);
        }
        const Location* l = std::get_if<Location>(&*target.value);
        if (!l) {
            return abort_stat(std::move(target.state), t, in, RuleName::FldAsg, ErrorCause::NotALocation);
        }
        if (!target.state.heap.count(*l)) {
            return abort_stat(std::move(target.state), t, in, RuleName::FldAsg, ErrorCause::UnboundLocation);
        }
        RuleData d = data(RuleName::FldAsg1, &t);
        d.loc = *l;
        Left left = init(d, in, target.state);
        Left n1 = up(d, left);
        ER v = expr(std::move(target.state), *n.rhs, n1);
        Left n2 = next(d, left, v.a, v.r.state);
        SR r = fld_asg2(std::move(v.r), *d.loc, t, n, n2);
        return finish(d, left, std::move(r));
    }

    SR fld_asg2(ExprResult v, Location l, const Stat& t, const stmt::FldAsg& n, const Left& in) {
        if (v.status == Status::Err) {
            return abort_stat(std::move(v.state), t, in, RuleName::FldAsg, ErrorCause::Propagated);
        }
        auto obj = v.state.heap.find(l);
        if (obj == v.state.heap.end()) {
            return abort_stat(std::move(v.state), t, in, RuleName::FldAsg, ErrorCause::UnboundLocation);
        }
        RuleData d = data(RuleName::FldAsg2, &t);
        d.loc = l;
        d.name = &n.field;
        d.value = *v.value;
        Left left = init(d, in, v.state);
        obj->second[n.field] = *v.value;
        Right right = axiom(d, left, v.state);
        return {{Status::Ok, std::move(v.state)}, std::move(right)};
    }

    SR stat_rule(State s, const Stat& t, const stmt::Del& n, const Left& in) {
        RuleData d = data(RuleName::Del, &t);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        ER target = expr(std::move(s), *n.target, n1);
        Left n2 = next(d, left, target.a, target.r.state);
        SR r = del1(std::move(target.r), t, n, n2);
        return finish(d, left, std::move(r));
    }

    SR del1(ExprResult target, const Stat& t, const stmt::Del& n, const Left& in) {
        if (target.status == Status::Err) {
            return abort_stat(std::move(target.state), t, in, RuleName::Del, ErrorCause::Propagated);
        }
        const Location* l = std::get_if<Location>(&*target.value);
        if (!l) {
            return abort_stat(std::move(target.state), t, in, RuleName::Del, ErrorCause::NotALocation);
        }
        auto obj = target.state.heap.find(*l);
        if (obj == target.state.heap.end()) {
            return abort_stat(std::move(target.state), t, in, RuleName::Del, ErrorCause::UnboundLocation);
        }
        if (!obj->second.count(n.field)) {
            return abort_stat(std::move(target.state), t, in, RuleName::Del, ErrorCause::FieldAbsent);
        }
        RuleData d = data(RuleName::Del1, &t);
        d.loc = *l;
        d.name = &n.field;
        Left left = init(d, in, target.state);
        obj->second.erase(n.field);
        Right right = axiom(d, left, target.state);
        return {{Status::Ok, std::move(target.state)}, std::move(right)};
    }

    // ---- expressions -------------------------------------------------------

    ER expr(State s, const Expr& e, const Left& in) {
        return std::visit([&](const auto& n) { return expr_rule(std::move(s), e, n, in); }, e.node);
    }

    ER expr_rule(State s, const Expr& e, const expr::Cst& n, const Left& in) {
        RuleData d = data(RuleName::Cst, &e);
        d.value = n.value;
        Left left = init(d, in, s);
        Right right = axiom(d, left, s);
        return {{Status::Ok, std::move(s), Value{n.value}}, std::move(right)};
    }

    ER expr_rule(State s, const Expr& e, const expr::Var& n, const Left& in) {
        auto it = s.env.find(n.name);
        if (it == s.env.end()) {
            return abort_expr(std::move(s), e, in, RuleName::Var, ErrorCause::UnboundVar);
        }
        Value v = it->second;
        RuleData d = data(RuleName::Var, &e);
        d.name = &n.name;
        d.value = v;
        Left left = init(d, in, s);
        Right right = axiom(d, left, s);
        return {{Status::Ok, std::move(s), v}, std::move(right)};
    }

    ER expr_rule(State s, const Expr& e, const expr::Bin& n, const Left& in) {
        RuleData d = data(RuleName::Bin, &e);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        ER a = expr(std::move(s), *n.lhs, n1);
        Left n2 = next(d, left, a.a, a.r.state);
        ER r = bin1(std::move(a.r), e, n, n2);
        return finish(d, left, std::move(r));
    }

    ER bin1(ExprResult a, const Expr& e, const expr::Bin& n, const Left& in) {
        if (a.status == Status::Err) {
            return abort_expr(std::move(a.state), e, in, RuleName::Bin, ErrorCause::Propagated);
        }
        RuleData d = data(RuleName::Bin1, &e);
        Left left = init(d, in, a.state);
        Left n1 = up(d, left);
        ER b = expr(std::move(a.state), *n.rhs, n1);
        Left n2 = next(d, left, b.a, b.r.state);
        ER r = bin2(*a.value, std::move(b.r), e, n, n2);
        return finish(d, left, std::move(r));
    }

    ER bin2(const Value& lhs, ExprResult b, const Expr& e, const expr::Bin& n, const Left& in) {
        if (b.status == Status::Err) {
            return abort_expr(std::move(b.state), e, in, RuleName::Bin, ErrorCause::Propagated);
        }
        std::optional<Value> v = apply_binop(n.op, lhs, *b.value);
        if (!v) {
            return abort_expr(std::move(b.state), e, in, RuleName::Bin, ErrorCause::NonBoolOperand);
        }
        RuleData d = data(RuleName::Bin2, &e);
        d.value = v;
        Left left = init(d, in, b.state);
        Right right = axiom(d, left, b.state);
        return {{Status::Ok, std::move(b.state), v}, std::move(right)};
    }

    ER expr_rule(State s, const Expr& e, const expr::Obj&, const Left& in) {
        RuleData d = data(RuleName::Obj, &e);
        Location l{s.next_loc};
        d.loc = l;
        d.value = l;
        Left left = init(d, in, s);
        s.heap.emplace(l, Object{});
        ++s.next_loc;
        Right right = axiom(d, left, s);
        return {{Status::Ok, std::move(s), Value{l}}, std::move(right)};
    }

    ER expr_rule(State s, const Expr& e, const expr::Fld& n, const Left& in) {
        RuleData d = data(RuleName::Fld, &e);
        Left left = init(d, in, s);
        Left n1 = up(d, left);
        ER base = expr(std::move(s), *n.base, n1);
        Left n2 = next(d, left, base.a, base.r.state);
        ER r = fld1(std::move(base.r), e, n, n2);
        return finish(d, left, std::move(r));
    }

    ER fld1(ExprResult base, const Expr& e, const expr::Fld& n, const Left& in) {
        if (base.status == Status::Err) {
            return abort_expr(std::move(base.state), e, in, RuleName::Fld, ErrorCause::Propagated);
        }
        const Location* l = std::get_if<Location>(&*base.value);
        if (!l) {
            return abort_expr(std::move(base.state), e, in, RuleName::Fld, ErrorCause::NotALocation);
        }
        auto obj = base.state.heap.find(*l);
        if (obj == base.state.heap.end()) {
            return abort_expr(std::move(base.state), e, in, RuleName::Fld, ErrorCause::UnboundLocation);
        }
        auto field = obj->second.find(n.field);
        if (field == obj->second.end()) {
            return abort_expr(std::move(base.state), e, in, RuleName::Fld, ErrorCause::FieldAbsent);
        }
        Value v = field->second;
        RuleData d = data(RuleName::Fld1, &e);
        d.loc = *l;
        d.name = &n.field;
        d.value = v;
        Left left = init(d, in, base.state);
        Right right = axiom(d, left, base.state);
        return {{Status::Ok, std::move(base.state), v}, std::move(right)};
    }

private:
    static RuleData data(RuleName r, const Stat* s) {
        RuleData d;
        d.rule = r;
        d.stat = s;
        return d;
    }
    static RuleData data(RuleName r, const Expr* e) {
        RuleData d;
        d.rule = r;
        d.expr = e;
        return d;
    }

    void tick() {
        if (fuel_ == 0) {
            throw OutOfFuel{};
        }
        --fuel_;
    }

    Left init(RuleData& d, const Left& in, const State& s) {
        tick();
        d.state = &s;
        return pass_.init(d, in, Unit{});
    }

    Right axiom(RuleData& d, const Left& left, const State& s) {
        d.state = &s;
        return pass_.axiom(d, left, Unit{}, Unit{});
    }

    Left up(RuleData& d, const Left& left) { return pass_.up(d, left, Unit{}, Unit{}); }

    Left next(RuleData& d, const Left& left, const Right& right1, const State& s) {
        d.state = &s;
        return pass_.next(d, left, right1, Unit{}, Unit{}, Unit{});
    }

    template <class Out>
    Out finish(RuleData& d, const Left& left, Out sub) {
        d.state = &sub.r.state;
        Right right = pass_.down(d, left, sub.a, Unit{}, Unit{}, Unit{});
        return {std::move(sub.r), std::move(right)};
    }

    Right abort_rule(const State& s, const Stat* st, const Expr* ex, const Left& in, RuleName site,
                     ErrorCause cause) {
        RuleData d;
        d.rule = RuleName::Abort;
        d.stat = st;
        d.expr = ex;
        d.site = site;
        d.cause = cause;
        Left left = init(d, in, s);
        if (cause != ErrorCause::Propagated && !error_) {
            error_ = ErrorInfo{site, cause};
        }
        return axiom(d, left, s);
    }

    SR abort_stat(State s, const Stat& t, const Left& in, RuleName site, ErrorCause cause) {
        Right right = abort_rule(s, &t, nullptr, in, site, cause);
        return {{Status::Err, std::move(s)}, std::move(right)};
    }

    ER abort_expr(State s, const Expr& e, const Left& in, RuleName site, ErrorCause cause) {
        Right right = abort_rule(s, nullptr, &e, in, site, cause);
        return {{Status::Err, std::move(s), std::nullopt}, std::move(right)};
    }

    const Pass& pass_;
    std::uint64_t fuel_;
    std::uint64_t budget_;
    std::optional<ErrorInfo> error_;
};

template <class Pass, class Result, class Fn>
Evaluation<Pass, Result> evaluate(const Pass& pass, std::uint64_t fuel, Fn&& body) {
    Evaluation<Pass, Result> out;
    run_with_large_stack([&] {
        Evaluator<Pass> ev(pass, fuel);
        try {
            auto r = body(ev);
            out.outcome.result = std::move(r.r);
            out.annotation = std::move(r.a);
        } catch (const OutOfFuel&) {
            out.outcome.result.reset();
        }
        out.steps = ev.steps();
        if (out.outcome.err()) {
            out.error = ev.error();
        }
    });
    return out;
}

} // namespace detail

template <class Pass>
Evaluation<Pass, StatResult> eval_stat(State state, const Stat& s, std::uint64_t fuel, const Pass& pass,
                                       const typename Pass::Left& in) {
    return detail::evaluate<Pass, StatResult>(
        pass, fuel, [&](detail::Evaluator<Pass>& ev) { return ev.stat(std::move(state), s, in); });
}

template <class Pass>
Evaluation<Pass, StatResult> eval_stat(State state, const Stat& s, std::uint64_t fuel, const Pass& pass) {
    return eval_stat(std::move(state), s, fuel, pass, pass.initial());
}

template <class Pass>
Evaluation<Pass, ExprResult> eval_expr(State state, const Expr& e, std::uint64_t fuel, const Pass& pass,
                                       const typename Pass::Left& in) {
    return detail::evaluate<Pass, ExprResult>(
        pass, fuel, [&](detail::Evaluator<Pass>& ev) { return ev.expr(std::move(state), e, in); });
}

template <class Pass>
Evaluation<Pass, ExprResult> eval_expr(State state, const Expr& e, std::uint64_t fuel, const Pass& pass) {
    return eval_expr(std::move(state), e, fuel, pass, pass.initial());
}

// Empty initial state, unit annotations.
Outcome<StatResult> run(const Stat& s, std::uint64_t fuel = kDefaultFuel);

} // namespace owhile
