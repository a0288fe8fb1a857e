#pragma once

// Core syntax and runtime values of O'While (nanoJS): a while language with
// booleans and extensible records.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace owhile {

using Ident = std::string;

// ---------------------------------------------------------------------------
// Program points
// ---------------------------------------------------------------------------

// Path atoms locate a sub-term inside a program. The first fourteen are
// positional (which child), the rest are construct names that terminate an
// "after" point.
enum class PathAtom : std::uint8_t {
    Seq1, Seq2, IfE, If1, If2, WhileE, WhileS, AsgE, FldAsg1, FldAsg2, DelE, Bin1, Bin2, FldE,
    Skip, Seq, If, While, Asg, FldAsg, Del, Cst, Var, Bin, Obj, Fld,
};

bool is_terminal(PathAtom a);
std::string_view to_string(PathAtom a);
std::optional<PathAtom> path_atom_from_string(std::string_view s);

// Outermost atom first. The empty point is the root context.
using ProgramPoint = std::vector<PathAtom>;

// Atoms joined by '/', the empty point printed as a middle dot.
std::string render(const ProgramPoint& pp);
std::optional<ProgramPoint> parse_program_point(std::string_view text);

struct PointPair {
    ProgramPoint before;
    ProgramPoint after;
    bool operator==(const PointPair&) const = default;
};

// ---------------------------------------------------------------------------
// Syntax
// ---------------------------------------------------------------------------

enum class BinOp : std::uint8_t { Eq, And, Or };
std::string_view to_string(BinOp op);

struct Expr;
struct Stat;
using ExprPtr = std::shared_ptr<const Expr>;
using StatPtr = std::shared_ptr<const Stat>;

namespace expr {
struct Cst { bool value; };
struct Var { Ident name; };
struct Bin { BinOp op; ExprPtr lhs; ExprPtr rhs; };
struct Obj {};
struct Fld { ExprPtr base; Ident field; };
} // namespace expr

struct Expr {
    using Node = std::variant<expr::Cst, expr::Var, expr::Bin, expr::Obj, expr::Fld>;
    Node node;
    std::optional<PointPair> points;
};

namespace stmt {
struct Skip {};
struct Seq { StatPtr first; StatPtr second; };
struct If { ExprPtr cond; StatPtr then_branch; StatPtr else_branch; };
struct While { ExprPtr cond; StatPtr body; };
struct Asg { Ident var; ExprPtr rhs; };
struct FldAsg { ExprPtr target; Ident field; ExprPtr rhs; };
struct Del { ExprPtr target; Ident field; };
} // namespace stmt

struct Stat {
    using Node = std::variant<stmt::Skip, stmt::Seq, stmt::If, stmt::While, stmt::Asg, stmt::FldAsg, stmt::Del>;
    Node node;
    std::optional<PointPair> points;
};

// Builders for undecorated trees.
namespace build {
ExprPtr cst(bool b);
ExprPtr var(Ident x);
ExprPtr bin(BinOp op, ExprPtr a, ExprPtr b);
ExprPtr obj();
ExprPtr fld(ExprPtr base, Ident f);

StatPtr skip();
StatPtr seq(StatPtr a, StatPtr b);
// Right-nested sequence of one or more statements.
StatPtr seq(std::vector<StatPtr> stmts);
StatPtr if_(ExprPtr c, StatPtr t, StatPtr e);
StatPtr while_(ExprPtr c, StatPtr body);
StatPtr asg(Ident x, ExprPtr e);
StatPtr fld_asg(ExprPtr target, Ident f, ExprPtr e);
StatPtr del(ExprPtr target, Ident f);
} // namespace build

// Equality ignoring program-point decorations.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stat& a, const Stat& b);
// Equality including decorations.
bool decorated_equal(const Expr& a, const Expr& b);
bool decorated_equal(const Stat& a, const Stat& b);

// Construct name of the node (the terminal atom of its after-point).
PathAtom construct_of(const Expr& e);
PathAtom construct_of(const Stat& s);

enum class Decoration { None, Full, Partial };
Decoration decoration_of(const Stat& s);
Decoration decoration_of(const Expr& e);

std::size_t node_count(const Stat& s);

// ---------------------------------------------------------------------------
// Values and states
// ---------------------------------------------------------------------------

struct Location {
    std::uint64_t id = 0;
    auto operator<=>(const Location&) const = default;
};

using Value = std::variant<bool, Location>;

inline bool is_location(const Value& v) { return std::holds_alternative<Location>(v); }
std::string render(const Value& v);
std::string render(Location l);

using Env = std::map<Ident, Value>;
using Object = std::map<Ident, Value>;
using Heap = std::map<Location, Object>;

struct State {
    Env env;
    Heap heap;
    std::uint64_t next_loc = 0;

    bool operator==(const State&) const = default;
};

bool wf_state(const State& s);

enum class Status : std::uint8_t { Ok, Err };

struct StatResult {
    Status status = Status::Ok;
    State state;
    bool operator==(const StatResult&) const = default;
};

struct ExprResult {
    Status status = Status::Ok;
    State state;
    std::optional<Value> value; // set iff status == Ok
    bool operator==(const ExprResult&) const = default;
};

// ---------------------------------------------------------------------------
// Rule names
// ---------------------------------------------------------------------------

enum class RuleName : std::uint8_t {
    Skip, Seq, Seq1, If, IfTrue, IfFalse, While, WhileTrue1, WhileTrue2, WhileFalse,
    Asg, Asg1, FldAsg, FldAsg1, FldAsg2, Del, Del1,
    Cst, Var, Bin, Bin1, Bin2, Obj, Fld, Fld1, Abort,
};

inline constexpr std::size_t kRuleCount = 26;

std::string_view to_string(RuleName r);
std::optional<RuleName> rule_from_string(std::string_view s);

// Rules for non-extended terms: Skip, Seq, If, While, Asg, FldAsg, Del, Cst,
// Var, Bin, Obj, Fld. Everything else (including Abort) is extended.
bool is_normal(RuleName r);
// Terminal path atom of a normal rule.
PathAtom construct_atom(RuleName normal_rule);

} // namespace owhile
