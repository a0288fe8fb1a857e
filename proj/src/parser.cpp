#include "owhile/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace owhile {

SyntaxError::SyntaxError(std::string where, int line, int column, std::vector<std::string> expected, std::string found)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << where << ":" << line << ":" << column << ": syntax error: expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) {
              msg << (i ? ", " : "") << expected[i];
          }
          msg << " but found " << found;
          return msg.str();
      }()),
      line_(line), column_(column), expected_(std::move(expected)), found_(std::move(found)) {}

namespace {

enum class Tok {
    Ident, True, False, Skip, If, Then, Else, While, Do, Delete,
    Semi, LBrace, RBrace, LParen, RParen, Dot, Assign, EqEq, AndAnd, OrOr, End,
};

struct Token {
    Tok kind;
    std::string text;
    int line;
    int column;
};

std::string describe(const Token& t) {
    if (t.kind == Tok::End) {
        return "end of input";
    }
    return "'" + t.text + "'";
}

class Lexer {
public:
    Lexer(std::string_view text, std::string where) : text_(text), where_(std::move(where)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_blank();
            if (pos_ >= text_.size()) {
                out.push_back({Tok::End, "", line_, col_});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_blank() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') {
                    advance();
                }
            } else {
                return;
            }
        }
    }

    Token next() {
        int line = line_;
        int col = col_;
        char c = text_[pos_];
        auto single = [&](Tok k) {
            advance();
            return Token{k, std::string(1, c), line, col};
        };
        auto pair = [&](char second, Tok k) -> std::optional<Token> {
            if (pos_ + 1 < text_.size() && text_[pos_ + 1] == second) {
                advance();
                advance();
                return Token{k, std::string{c, second}, line, col};
            }
            return std::nullopt;
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string word;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                word += text_[pos_];
                advance();
            }
            return {keyword(word), word, line, col};
        }
        switch (c) {
        case ';': return single(Tok::Semi);
        case '{': return single(Tok::LBrace);
        case '}': return single(Tok::RBrace);
        case '(': return single(Tok::LParen);
        case ')': return single(Tok::RParen);
        case '.': return single(Tok::Dot);
        case '=':
            if (auto t = pair('=', Tok::EqEq)) {
                return *t;
            }
            return single(Tok::Assign);
        case '&':
            if (auto t = pair('&', Tok::AndAnd)) {
                return *t;
            }
            break;
        case '|':
            if (auto t = pair('|', Tok::OrOr)) {
                return *t;
            }
            break;
        default:
            break;
        }
        throw SyntaxError(where_, line, col, {"a token"}, "'" + std::string(1, c) + "'");
    }

    static Tok keyword(const std::string& w) {
        static const std::pair<const char*, Tok> table[] = {
            {"true", Tok::True}, {"false", Tok::False}, {"skip", Tok::Skip},   {"if", Tok::If},
            {"then", Tok::Then}, {"else", Tok::Else},   {"while", Tok::While}, {"do", Tok::Do},
            {"delete", Tok::Delete},
        };
        for (const auto& [name, kind] : table) {
            if (w == name) {
                return kind;
            }
        }
        return Tok::Ident;
    }

    std::string_view text_;
    std::string where_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::string where) : toks_(std::move(toks)), where_(std::move(where)) {}

    StatPtr program() {
        StatPtr s = stmts();
        expect(Tok::End, "end of input");
        return s;
    }

    ExprPtr lone_expr() {
        ExprPtr e = expr();
        expect(Tok::End, "end of input");
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    bool at(Tok k) const { return peek().kind == k; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        throw SyntaxError(where_, t.line, t.column, std::move(expected), describe(t));
    }

    Token expect(Tok k, const char* what) {
        if (!at(k)) {
            fail({what});
        }
        return toks_[pos_++];
    }

    StatPtr stmts() {
        std::vector<StatPtr> parts{stmt()};
        while (at(Tok::Semi)) {
            ++pos_;
            parts.push_back(stmt());
        }
        return build::seq(std::move(parts));
    }

    StatPtr block() {
        expect(Tok::LBrace, "'{'");
        StatPtr s = stmts();
        expect(Tok::RBrace, "'}'");
        return s;
    }

    StatPtr stmt() {
        switch (peek().kind) {
        case Tok::Skip:
            ++pos_;
            return build::skip();
        case Tok::If: {
            ++pos_;
            ExprPtr c = expr();
            expect(Tok::Then, "'then'");
            StatPtr t = block();
            expect(Tok::Else, "'else'");
            StatPtr e = block();
            return build::if_(std::move(c), std::move(t), std::move(e));
        }
        case Tok::While: {
            ++pos_;
            ExprPtr c = expr();
            expect(Tok::Do, "'do'");
            return build::while_(std::move(c), block());
        }
        case Tok::Delete: {
            ++pos_;
            const Token& start = peek();
            ExprPtr e = expr();
            const auto* f = std::get_if<expr::Fld>(&e->node);
            if (!f) {
                throw SyntaxError(where_, start.line, start.column, {"a field access 'e.f' after 'delete'"},
                                  "an expression without a trailing field");
            }
            return build::del(f->base, f->field);
        }
        case Tok::LBrace:
            // '{' '}' starts an object literal, anything else a group.
            if (peek(1).kind != Tok::RBrace) {
                return block();
            }
            [[fallthrough]];
        default:
            return assignment();
        }
    }

    StatPtr assignment() {
        const Token& start = peek();
        if (!starts_expr(start.kind)) {
            fail({"'skip'", "'if'", "'while'", "'delete'", "'{'", "an expression"});
        }
        ExprPtr lhs = expr();
        expect(Tok::Assign, "'='");
        ExprPtr rhs = expr();
        if (const auto* v = std::get_if<expr::Var>(&lhs->node)) {
            return build::asg(v->name, std::move(rhs));
        }
        if (const auto* f = std::get_if<expr::Fld>(&lhs->node)) {
            return build::fld_asg(f->base, f->field, std::move(rhs));
        }
        throw SyntaxError(where_, start.line, start.column, {"a variable or field on the left of '='"},
                          "another expression");
    }

    static bool starts_expr(Tok k) {
        return k == Tok::True || k == Tok::False || k == Tok::Ident || k == Tok::LBrace || k == Tok::LParen;
    }

    ExprPtr expr() {
        ExprPtr lhs = postfix();
        while (true) {
            BinOp op;
            switch (peek().kind) {
            case Tok::EqEq: op = BinOp::Eq; break;
            case Tok::AndAnd: op = BinOp::And; break;
            case Tok::OrOr: op = BinOp::Or; break;
            default: return lhs;
            }
            ++pos_;
            lhs = build::bin(op, std::move(lhs), postfix());
        }
    }

    ExprPtr postfix() {
        ExprPtr e = atom();
        while (at(Tok::Dot)) {
            ++pos_;
            Token f = expect(Tok::Ident, "a field name");
            e = build::fld(std::move(e), f.text);
        }
        return e;
    }

    ExprPtr atom() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::True: ++pos_; return build::cst(true);
        case Tok::False: ++pos_; return build::cst(false);
        case Tok::Ident: ++pos_; return build::var(t.text);
        case Tok::LBrace:
            ++pos_;
            expect(Tok::RBrace, "'}'");
            return build::obj();
        case Tok::LParen: {
            ++pos_;
            ExprPtr e = expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        default:
            fail({"'true'", "'false'", "an identifier", "'{}'", "'('"});
        }
    }

    std::vector<Token> toks_;
    std::string where_;
    std::size_t pos_ = 0;
};

// -- pretty printing ---------------------------------------------------------

void print(const Expr& e, std::string& out);

void print_operand(const Expr& e, std::string& out) {
    if (std::holds_alternative<expr::Bin>(e.node)) {
        out += '(';
        print(e, out);
        out += ')';
    } else {
        print(e, out);
    }
}

void print(const Expr& e, std::string& out) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, expr::Cst>) {
                out += x.value ? "true" : "false";
            } else if constexpr (std::is_same_v<T, expr::Var>) {
                out += x.name;
            } else if constexpr (std::is_same_v<T, expr::Bin>) {
                print(*x.lhs, out);
                out += ' ';
                out += to_string(x.op);
                out += ' ';
                print_operand(*x.rhs, out);
            } else if constexpr (std::is_same_v<T, expr::Obj>) {
                out += "{}";
            } else {
                print_operand(*x.base, out);
                out += '.';
                out += x.field;
            }
        },
        e.node);
}

void print(const Stat& s, std::string& out) {
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, stmt::Skip>) {
                out += "skip";
            } else if constexpr (std::is_same_v<T, stmt::Seq>) {
                if (std::holds_alternative<stmt::Seq>(x.first->node)) {
                    out += "{ ";
                    print(*x.first, out);
                    out += " }";
                } else {
                    print(*x.first, out);
                }
                out += "; ";
                print(*x.second, out);
            } else if constexpr (std::is_same_v<T, stmt::If>) {
                out += "if ";
                print(*x.cond, out);
                out += " then { ";
                print(*x.then_branch, out);
                out += " } else { ";
                print(*x.else_branch, out);
                out += " }";
            } else if constexpr (std::is_same_v<T, stmt::While>) {
                out += "while ";
                print(*x.cond, out);
                out += " do { ";
                print(*x.body, out);
                out += " }";
            } else if constexpr (std::is_same_v<T, stmt::Asg>) {
                out += x.var;
                out += " = ";
                print(*x.rhs, out);
            } else if constexpr (std::is_same_v<T, stmt::FldAsg>) {
                print_operand(*x.target, out);
                out += '.';
                out += x.field;
                out += " = ";
                print(*x.rhs, out);
            } else {
                out += "delete ";
                print_operand(*x.target, out);
                out += '.';
                out += x.field;
            }
        },
        s.node);
}

// -- program points ----------------------------------------------------------

ProgramPoint extend(const ProgramPoint& pp, PathAtom a) {
    ProgramPoint out = pp;
    out.push_back(a);
    return out;
}

void require_bare(bool decorated) {
    if (decorated) {
        throw std::invalid_argument("annotate_pp: term is already decorated");
    }
}

} // namespace

StatPtr parse(const SourceProgram& src) {
    std::string where = src.path.value_or("<input>");
    Lexer lex(src.text, where);
    Parser p(lex.run(), where);
    return p.program();
}

StatPtr parse(std::string_view text) { return parse(SourceProgram{std::string(text), std::nullopt}); }

ExprPtr parse_expr(std::string_view text) {
    Lexer lex(text, "<input>");
    Parser p(lex.run(), "<input>");
    return p.lone_expr();
}

std::string pretty(const Stat& s) {
    std::string out;
    print(s, out);
    return out;
}

std::string pretty(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

ExprPtr annotate_pp(const ProgramPoint& pp, const Expr& e) {
    require_bare(e.points.has_value());
    Expr out = std::visit(
        [&](const auto& x) -> Expr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, expr::Bin>) {
                return {expr::Bin{x.op, annotate_pp(extend(pp, PathAtom::Bin1), *x.lhs),
                                  annotate_pp(extend(pp, PathAtom::Bin2), *x.rhs)},
                        {}};
            } else if constexpr (std::is_same_v<T, expr::Fld>) {
                return {expr::Fld{annotate_pp(extend(pp, PathAtom::FldE), *x.base), x.field}, {}};
            } else {
                return {x, {}};
            }
        },
        e.node);
    out.points = PointPair{pp, extend(pp, construct_of(e))};
    return std::make_shared<const Expr>(std::move(out));
}

StatPtr annotate_pp(const ProgramPoint& pp, const Stat& s) {
    require_bare(s.points.has_value());
    Stat out = std::visit(
        [&](const auto& x) -> Stat {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, stmt::Skip>) {
                return {x, {}};
            } else if constexpr (std::is_same_v<T, stmt::Seq>) {
                return {stmt::Seq{annotate_pp(extend(pp, PathAtom::Seq1), *x.first),
                                  annotate_pp(extend(pp, PathAtom::Seq2), *x.second)},
                        {}};
            } else if constexpr (std::is_same_v<T, stmt::If>) {
                return {stmt::If{annotate_pp(extend(pp, PathAtom::IfE), *x.cond),
                                 annotate_pp(extend(pp, PathAtom::If1), *x.then_branch),
                                 annotate_pp(extend(pp, PathAtom::If2), *x.else_branch)},
                        {}};
            } else if constexpr (std::is_same_v<T, stmt::While>) {
                return {stmt::While{annotate_pp(extend(pp, PathAtom::WhileE), *x.cond),
                                    annotate_pp(extend(pp, PathAtom::WhileS), *x.body)},
                        {}};
            } else if constexpr (std::is_same_v<T, stmt::Asg>) {
                return {stmt::Asg{x.var, annotate_pp(extend(pp, PathAtom::AsgE), *x.rhs)}, {}};
            } else if constexpr (std::is_same_v<T, stmt::FldAsg>) {
                return {stmt::FldAsg{annotate_pp(extend(pp, PathAtom::FldAsg1), *x.target), x.field,
                                     annotate_pp(extend(pp, PathAtom::FldAsg2), *x.rhs)},
                        {}};
            } else {
                return {stmt::Del{annotate_pp(extend(pp, PathAtom::DelE), *x.target), x.field}, {}};
            }
        },
        s.node);
    out.points = PointPair{pp, extend(pp, construct_of(s))};
    return std::make_shared<const Stat>(std::move(out));
}

SourceProgram read_source(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return {buf.str(), path};
}

} // namespace owhile
