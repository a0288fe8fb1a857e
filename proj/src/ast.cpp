#include "owhile/ast.hpp"

#include <array>
#include <set>
#include <sstream>
#include <stdexcept>

namespace owhile {

namespace {

constexpr std::array<std::string_view, 26> kPathAtomNames = {
    "Seq1", "Seq2", "IfE", "If1", "If2", "WhileE", "WhileS", "AsgE", "FldAsg1", "FldAsg2", "DelE", "Bin1", "Bin2",
    "FldE", "Skip", "Seq", "If", "While", "Asg", "FldAsg", "Del", "Cst", "Var", "Bin", "Obj", "Fld",
};

constexpr std::array<std::string_view, kRuleCount> kRuleNames = {
    "Skip", "Seq", "Seq1", "If", "IfTrue", "IfFalse", "While", "WhileTrue1", "WhileTrue2", "WhileFalse",
    "Asg", "Asg1", "FldAsg", "FldAsg1", "FldAsg2", "Del", "Del1",
    "Cst", "Var", "Bin", "Bin1", "Bin2", "Obj", "Fld", "Fld1", "Abort",
};

constexpr std::string_view kEmptyPoint = "·";

} // namespace

bool is_terminal(PathAtom a) { return a >= PathAtom::Skip; }

std::string_view to_string(PathAtom a) { return kPathAtomNames[static_cast<std::size_t>(a)]; }

std::optional<PathAtom> path_atom_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kPathAtomNames.size(); ++i) {
        if (kPathAtomNames[i] == s) {
            return static_cast<PathAtom>(i);
        }
    }
    return std::nullopt;
}

std::string render(const ProgramPoint& pp) {
    if (pp.empty()) {
        return std::string(kEmptyPoint);
    }
    std::string out;
    for (std::size_t i = 0; i < pp.size(); ++i) {
        if (i) {
            out += '/';
        }
        out += to_string(pp[i]);
    }
    return out;
}

std::optional<ProgramPoint> parse_program_point(std::string_view text) {
    ProgramPoint pp;
    if (text == kEmptyPoint || text.empty()) {
        return pp;
    }
    while (true) {
        auto slash = text.find('/');
        auto atom = path_atom_from_string(text.substr(0, slash));
        if (!atom) {
            return std::nullopt;
        }
        pp.push_back(*atom);
        if (slash == std::string_view::npos) {
            break;
        }
        text.remove_prefix(slash + 1);
    }
    for (std::size_t i = 0; i + 1 < pp.size(); ++i) {
        if (is_terminal(pp[i])) {
            return std::nullopt;
        }
    }
    return pp;
}

std::string_view to_string(BinOp op) {
    switch (op) {
    case BinOp::Eq: return "==";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    }
    return "?";
}

namespace build {
ExprPtr cst(bool b) { return std::make_shared<const Expr>(Expr{expr::Cst{b}, {}}); }
ExprPtr var(Ident x) { return std::make_shared<const Expr>(Expr{expr::Var{std::move(x)}, {}}); }
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b) {
    return std::make_shared<const Expr>(Expr{expr::Bin{op, std::move(a), std::move(b)}, {}});
}
ExprPtr obj() { return std::make_shared<const Expr>(Expr{expr::Obj{}, {}}); }
ExprPtr fld(ExprPtr base, Ident f) {
    return std::make_shared<const Expr>(Expr{expr::Fld{std::move(base), std::move(f)}, {}});
}

StatPtr skip() { return std::make_shared<const Stat>(Stat{stmt::Skip{}, {}}); }
StatPtr seq(StatPtr a, StatPtr b) {
    return std::make_shared<const Stat>(Stat{stmt::Seq{std::move(a), std::move(b)}, {}});
}
StatPtr seq(std::vector<StatPtr> stmts) {
    if (stmts.empty()) {
        throw std::invalid_argument("seq: empty statement list");
    }
    StatPtr acc = stmts.back();
    for (auto it = stmts.rbegin() + 1; it != stmts.rend(); ++it) {
        acc = seq(*it, acc);
    }
    return acc;
}
StatPtr if_(ExprPtr c, StatPtr t, StatPtr e) {
    return std::make_shared<const Stat>(Stat{stmt::If{std::move(c), std::move(t), std::move(e)}, {}});
}
StatPtr while_(ExprPtr c, StatPtr body) {
    return std::make_shared<const Stat>(Stat{stmt::While{std::move(c), std::move(body)}, {}});
}
StatPtr asg(Ident x, ExprPtr e) { return std::make_shared<const Stat>(Stat{stmt::Asg{std::move(x), std::move(e)}, {}}); }
StatPtr fld_asg(ExprPtr target, Ident f, ExprPtr e) {
    return std::make_shared<const Stat>(Stat{stmt::FldAsg{std::move(target), std::move(f), std::move(e)}, {}});
}
StatPtr del(ExprPtr target, Ident f) {
    return std::make_shared<const Stat>(Stat{stmt::Del{std::move(target), std::move(f)}, {}});
}
} // namespace build

namespace {

template <bool WithPoints>
bool eq_expr(const Expr& a, const Expr& b) {
    if constexpr (WithPoints) {
        if (a.points != b.points) {
            return false;
        }
    }
    if (a.node.index() != b.node.index()) {
        return false;
    }
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, expr::Cst>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, expr::Var>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, expr::Bin>) {
                return x.op == y.op && eq_expr<WithPoints>(*x.lhs, *y.lhs) && eq_expr<WithPoints>(*x.rhs, *y.rhs);
            } else if constexpr (std::is_same_v<T, expr::Obj>) {
                return true;
            } else {
                return x.field == y.field && eq_expr<WithPoints>(*x.base, *y.base);
            }
        },
        a.node);
}

template <bool WithPoints>
bool eq_stat(const Stat& a, const Stat& b) {
    if constexpr (WithPoints) {
        if (a.points != b.points) {
            return false;
        }
    }
    if (a.node.index() != b.node.index()) {
        return false;
    }
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.node);
            if constexpr (std::is_same_v<T, stmt::Skip>) {
                return true;
            } else if constexpr (std::is_same_v<T, stmt::Seq>) {
                return eq_stat<WithPoints>(*x.first, *y.first) && eq_stat<WithPoints>(*x.second, *y.second);
            } else if constexpr (std::is_same_v<T, stmt::If>) {
                return eq_expr<WithPoints>(*x.cond, *y.cond) && eq_stat<WithPoints>(*x.then_branch, *y.then_branch) &&
                       eq_stat<WithPoints>(*x.else_branch, *y.else_branch);
            } else if constexpr (std::is_same_v<T, stmt::While>) {
                return eq_expr<WithPoints>(*x.cond, *y.cond) && eq_stat<WithPoints>(*x.body, *y.body);
            } else if constexpr (std::is_same_v<T, stmt::Asg>) {
                return x.var == y.var && eq_expr<WithPoints>(*x.rhs, *y.rhs);
            } else if constexpr (std::is_same_v<T, stmt::FldAsg>) {
                return x.field == y.field && eq_expr<WithPoints>(*x.target, *y.target) &&
                       eq_expr<WithPoints>(*x.rhs, *y.rhs);
            } else {
                return x.field == y.field && eq_expr<WithPoints>(*x.target, *y.target);
            }
        },
        a.node);
}

struct DecorationCount {
    std::size_t decorated = 0;
    std::size_t total = 0;
};

void count_decorations(const Expr& e, DecorationCount& c);

void count_decorations(const Stat& s, DecorationCount& c) {
    ++c.total;
    c.decorated += s.points.has_value();
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, stmt::Seq>) {
                count_decorations(*x.first, c);
                count_decorations(*x.second, c);
            } else if constexpr (std::is_same_v<T, stmt::If>) {
                count_decorations(*x.cond, c);
                count_decorations(*x.then_branch, c);
                count_decorations(*x.else_branch, c);
            } else if constexpr (std::is_same_v<T, stmt::While>) {
                count_decorations(*x.cond, c);
                count_decorations(*x.body, c);
            } else if constexpr (std::is_same_v<T, stmt::Asg>) {
                count_decorations(*x.rhs, c);
            } else if constexpr (std::is_same_v<T, stmt::FldAsg>) {
                count_decorations(*x.target, c);
                count_decorations(*x.rhs, c);
            } else if constexpr (std::is_same_v<T, stmt::Del>) {
                count_decorations(*x.target, c);
            }
        },
        s.node);
}

void count_decorations(const Expr& e, DecorationCount& c) {
    ++c.total;
    c.decorated += e.points.has_value();
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, expr::Bin>) {
                count_decorations(*x.lhs, c);
                count_decorations(*x.rhs, c);
            } else if constexpr (std::is_same_v<T, expr::Fld>) {
                count_decorations(*x.base, c);
            }
        },
        e.node);
}

Decoration classify(const DecorationCount& c) {
    if (c.decorated == 0) {
        return Decoration::None;
    }
    return c.decorated == c.total ? Decoration::Full : Decoration::Partial;
}

} // namespace

bool structurally_equal(const Expr& a, const Expr& b) { return eq_expr<false>(a, b); }
bool structurally_equal(const Stat& a, const Stat& b) { return eq_stat<false>(a, b); }
bool decorated_equal(const Expr& a, const Expr& b) { return eq_expr<true>(a, b); }
bool decorated_equal(const Stat& a, const Stat& b) { return eq_stat<true>(a, b); }

PathAtom construct_of(const Expr& e) {
    static constexpr std::array<PathAtom, 5> atoms = {PathAtom::Cst, PathAtom::Var, PathAtom::Bin, PathAtom::Obj,
                                                      PathAtom::Fld};
    return atoms[e.node.index()];
}

PathAtom construct_of(const Stat& s) {
    static constexpr std::array<PathAtom, 7> atoms = {PathAtom::Skip, PathAtom::Seq, PathAtom::If, PathAtom::While,
                                                      PathAtom::Asg, PathAtom::FldAsg, PathAtom::Del};
    return atoms[s.node.index()];
}

Decoration decoration_of(const Stat& s) {
    DecorationCount c;
    count_decorations(s, c);
    return classify(c);
}

Decoration decoration_of(const Expr& e) {
    DecorationCount c;
    count_decorations(e, c);
    return classify(c);
}

std::size_t node_count(const Stat& s) {
    DecorationCount c;
    count_decorations(s, c);
    return c.total;
}

std::string render(Location l) { return "l" + std::to_string(l.id); }

std::string render(const Value& v) {
    if (const bool* b = std::get_if<bool>(&v)) {
        return *b ? "true" : "false";
    }
    return render(std::get<Location>(v));
}

bool wf_state(const State& s) {
    auto bound = [&](const Value& v) {
        const Location* l = std::get_if<Location>(&v);
        return !l || s.heap.contains(*l);
    };
    for (const auto& [x, v] : s.env) {
        if (!bound(v)) {
            return false;
        }
    }
    for (const auto& [l, o] : s.heap) {
        if (l.id >= s.next_loc) {
            return false;
        }
        for (const auto& [f, v] : o) {
            if (!bound(v)) {
                return false;
            }
        }
    }
    return true;
}

std::string_view to_string(RuleName r) { return kRuleNames[static_cast<std::size_t>(r)]; }

std::optional<RuleName> rule_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kRuleNames.size(); ++i) {
        if (kRuleNames[i] == s) {
            return static_cast<RuleName>(i);
        }
    }
    return std::nullopt;
}

bool is_normal(RuleName r) {
    switch (r) {
    case RuleName::Skip:
    case RuleName::Seq:
    case RuleName::If:
    case RuleName::While:
    case RuleName::Asg:
    case RuleName::FldAsg:
    case RuleName::Del:
    case RuleName::Cst:
    case RuleName::Var:
    case RuleName::Bin:
    case RuleName::Obj:
    case RuleName::Fld:
        return true;
    default:
        return false;
    }
}

PathAtom construct_atom(RuleName r) {
    switch (r) {
    case RuleName::Skip: return PathAtom::Skip;
    case RuleName::Seq: return PathAtom::Seq;
    case RuleName::If: return PathAtom::If;
    case RuleName::While: return PathAtom::While;
    case RuleName::Asg: return PathAtom::Asg;
    case RuleName::FldAsg: return PathAtom::FldAsg;
    case RuleName::Del: return PathAtom::Del;
    case RuleName::Cst: return PathAtom::Cst;
    case RuleName::Var: return PathAtom::Var;
    case RuleName::Bin: return PathAtom::Bin;
    case RuleName::Obj: return PathAtom::Obj;
    case RuleName::Fld: return PathAtom::Fld;
    default: break;
    }
    throw std::invalid_argument("construct_atom: extended rule " + std::string(to_string(r)));
}

} // namespace owhile
