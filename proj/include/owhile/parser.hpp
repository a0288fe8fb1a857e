#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "owhile/ast.hpp"

namespace owhile {

struct SourceProgram {
    std::string text;
    std::optional<std::string> path;
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::string where, int line, int column, std::vector<std::string> expected, std::string found);

    int line() const { return line_; }
    int column() const { return column_; }
    const std::vector<std::string>& expected() const { return expected_; }
    const std::string& found() const { return found_; }

private:
    int line_;
    int column_;
    std::vector<std::string> expected_;
    std::string found_;
};

// Grammar:
//   stmts := stmt (';' stmts)?                      right-associative
//   stmt  := 'skip' | '{' stmts '}'                 braces only group
//          | 'if' expr 'then' '{' stmts '}' 'else' '{' stmts '}'
//          | 'while' expr 'do' '{' stmts '}'
//          | 'delete' expr                          expr must end in '.f'
//          | expr '=' expr                          lhs is 'x' or 'e.f'
//   expr  := post (('==' | '&&' | '||') post)*      one level, left-assoc
//   post  := atom ('.' ident)*
//   atom  := 'true' | 'false' | ident | '{' '}' | '(' expr ')'
// Line comments start with '//'.
StatPtr parse(const SourceProgram& src);
StatPtr parse(std::string_view text);
ExprPtr parse_expr(std::string_view text);

std::string pretty(const Stat& s);
std::string pretty(const Expr& e);

// Decorates every sub-term with the program points before and after it,
// starting from context `pp`. Throws std::invalid_argument on input that
// already carries decorations.
StatPtr annotate_pp(const ProgramPoint& pp, const Stat& s);
ExprPtr annotate_pp(const ProgramPoint& pp, const Expr& e);

// Reads a file into a SourceProgram.
SourceProgram read_source(const std::string& path);

} // namespace owhile
