#pragma once

// Helpers shared by the test binaries, including a plain recursive evaluator
// used as an oracle for the pass-driven interpreter.

#include <optional>
#include <string>
#include <vector>

#include "owhile/annot.hpp"
#include "owhile/ast.hpp"
#include "owhile/interp.hpp"
#include "owhile/parser.hpp"
#include "owhile/soundness.hpp"

namespace owhile::testing {

inline StatPtr P(const std::string& text) { return parse(text); }

inline Value loc(std::uint64_t id) { return Location{id}; }

inline std::vector<TraceAtom> atoms_of(const std::vector<std::string>& names) {
    std::vector<TraceAtom> out;
    for (const std::string& n : names) {
        out.push_back(*parse_trace_atom(n));
    }
    return out;
}

inline Trace trace_of(const std::vector<std::string>& names) { return Trace(atoms_of(names)); }

inline const std::vector<std::string> kCopyTrace = {
    "i:Seq", "i:Asg", "i:Cst",  "o:Cst",  "i:Asg1", "o:Asg1", "o:Asg", "i:Seq1",
    "i:Asg", "i:Var", "o:Var",  "i:Asg1", "o:Asg1", "o:Asg",  "o:Seq1", "o:Seq",
};

inline const char* const kCopyProgram = "x = true; y = x";
inline const char* const kBranchProgram = "x = {}; x.f = {}; if false then { y = x.f } else { y = {} }";

// Direct big-step reading of the semantics with the same error choices as
// the interpreter. The state is updated in place and kept as it was when an
// error stops evaluation. Loops give up after `loop_budget` iterations in
// total, which is reported as nullopt.
class Reference {
public:
    explicit Reference(std::size_t loop_budget = 10'000) : budget_(loop_budget) {}

    // nullopt when the loop budget ran out.
    std::optional<StatResult> run(const Stat& s) {
        State st;
        try {
            bool ok = stat(st, s);
            return StatResult{ok ? Status::Ok : Status::Err, st};
        } catch (const Diverged&) {
            return std::nullopt;
        }
    }

private:
    struct Diverged {};

    std::optional<Value> expr(State& st, const Expr& e) {
        return std::visit(
            [&](const auto& n) -> std::optional<Value> {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, expr::Cst>) {
                    return Value{n.value};
                } else if constexpr (std::is_same_v<T, expr::Var>) {
                    auto it = st.env.find(n.name);
                    if (it == st.env.end()) {
                        return std::nullopt;
                    }
                    return it->second;
                } else if constexpr (std::is_same_v<T, expr::Obj>) {
                    Location l{st.next_loc++};
                    st.heap[l];
                    return Value{l};
                } else if constexpr (std::is_same_v<T, expr::Fld>) {
                    auto base = expr(st, *n.base);
                    if (!base || !is_location(*base)) {
                        return std::nullopt;
                    }
                    auto obj = st.heap.find(std::get<Location>(*base));
                    if (obj == st.heap.end()) {
                        return std::nullopt;
                    }
                    auto cell = obj->second.find(n.field);
                    if (cell == obj->second.end()) {
                        return std::nullopt;
                    }
                    return cell->second;
                } else {
                    auto a = expr(st, *n.lhs);
                    if (!a) {
                        return std::nullopt;
                    }
                    auto b = expr(st, *n.rhs);
                    if (!b) {
                        return std::nullopt;
                    }
                    if (n.op == BinOp::Eq) {
                        return Value{*a == *b};
                    }
                    const bool* x = std::get_if<bool>(&*a);
                    const bool* y = std::get_if<bool>(&*b);
                    if (!x || !y) {
                        return std::nullopt;
                    }
                    return Value{n.op == BinOp::And ? (*x && *y) : (*x || *y)};
                }
            },
            e.node);
    }

    std::optional<bool> cond(State& st, const Expr& e) {
        auto v = expr(st, e);
        if (!v || !std::holds_alternative<bool>(*v)) {
            return std::nullopt;
        }
        return std::get<bool>(*v);
    }

    bool stat(State& st, const Stat& s) {
        return std::visit(
            [&](const auto& n) -> bool {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, stmt::Skip>) {
                    return true;
                } else if constexpr (std::is_same_v<T, stmt::Seq>) {
                    return stat(st, *n.first) && stat(st, *n.second);
                } else if constexpr (std::is_same_v<T, stmt::If>) {
                    auto c = cond(st, *n.cond);
                    if (!c) {
                        return false;
                    }
                    return stat(st, *c ? *n.then_branch : *n.else_branch);
                } else if constexpr (std::is_same_v<T, stmt::While>) {
                    while (true) {
                        auto c = cond(st, *n.cond);
                        if (!c) {
                            return false;
                        }
                        if (!*c) {
                            return true;
                        }
                        if (budget_-- == 0) {
                            throw Diverged{};
                        }
                        if (!stat(st, *n.body)) {
                            return false;
                        }
                    }
                } else if constexpr (std::is_same_v<T, stmt::Asg>) {
                    auto v = expr(st, *n.rhs);
                    if (!v) {
                        return false;
                    }
                    st.env[n.var] = *v;
                    return true;
                } else if constexpr (std::is_same_v<T, stmt::FldAsg>) {
                    auto target = expr(st, *n.target);
                    if (!target || !is_location(*target) || !st.heap.count(std::get<Location>(*target))) {
                        return false;
                    }
                    auto v = expr(st, *n.rhs);
                    if (!v) {
                        return false;
                    }
                    st.heap[std::get<Location>(*target)][n.field] = *v;
                    return true;
                } else {
                    auto target = expr(st, *n.target);
                    if (!target || !is_location(*target)) {
                        return false;
                    }
                    auto obj = st.heap.find(std::get<Location>(*target));
                    if (obj == st.heap.end() || !obj->second.erase(n.field)) {
                        return false;
                    }
                    return true;
                }
            },
            s.node);
    }

    std::size_t budget_;
};

// Samples used across suites; pinned so that results are reproducible.
inline constexpr std::uint64_t kSampleSeed = 42;

inline std::vector<StatPtr> samples(std::size_t n, std::uint64_t seed = kSampleSeed) {
    std::vector<StatPtr> out;
    for (std::size_t i = 0; i < n; ++i) {
        GenConfig cfg;
        cfg.seed = seed + i;
        out.push_back(gen_program(cfg));
    }
    return out;
}

} // namespace owhile::testing
