#include "owhile/trace.hpp"

#include <algorithm>

#include "owhile/flow.hpp"

namespace owhile {

std::string render(TraceAtom a) {
    std::string out = a.dir == Dir::Enter ? "i:" : "o:";
    out += to_string(a.rule);
    return out;
}

std::optional<TraceAtom> parse_trace_atom(std::string_view s) {
    if (s.size() < 3 || s[1] != ':' || (s[0] != 'i' && s[0] != 'o')) {
        return std::nullopt;
    }
    auto rule = rule_from_string(s.substr(2));
    if (!rule) {
        return std::nullopt;
    }
    return TraceAtom{*rule, s[0] == 'i' ? Dir::Enter : Dir::Exit};
}

// Long chains would otherwise be released recursively.
Trace::Node::~Node() {
    std::shared_ptr<const Node> p = std::move(prev);
    while (p && p.use_count() == 1) {
        std::shared_ptr<const Node> next = std::move(p->prev);
        p = std::move(next);
    }
}

Trace::Trace(const std::vector<TraceAtom>& atoms) {
    for (TraceAtom a : atoms) {
        *this = push(a);
    }
}

Trace Trace::push(TraceAtom a) const { return Trace(std::make_shared<const Node>(a, size() + 1, last_)); }

Trace Trace::pop() const { return Trace(last_->prev); }

Trace Trace::prefix(std::size_t n) const {
    std::shared_ptr<const Node> p = last_;
    while (p && p->size > n) {
        p = p->prev;
    }
    return Trace(p);
}

std::vector<TraceAtom> Trace::atoms() const {
    std::vector<TraceAtom> out;
    out.reserve(size());
    for (const Node* n = last_.get(); n; n = n->prev.get()) {
        out.push_back(n->atom);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

bool Trace::is_prefix_of(const Trace& other) const { return size() <= other.size() && other.prefix(size()) == *this; }

bool operator==(const Trace& a, const Trace& b) { return (a <=> b) == std::strong_ordering::equal; }

// Shorter traces first; equal lengths compare atom-wise from the newest atom,
// stopping as soon as the two lists share a cell.
std::strong_ordering operator<=>(const Trace& a, const Trace& b) {
    if (auto c = a.size() <=> b.size(); c != 0) {
        return c;
    }
    const Trace::Node* x = a.last_.get();
    const Trace::Node* y = b.last_.get();
    while (x != y) {
        if (auto c = x->atom <=> y->atom; c != 0) {
            return c;
        }
        x = x->prev.get();
        y = y->prev.get();
    }
    return std::strong_ordering::equal;
}

std::string render(const Trace& t, std::optional<std::size_t> max_atoms) {
    std::vector<TraceAtom> atoms = t.atoms();
    std::size_t start = 0;
    std::string out;
    if (max_atoms && atoms.size() > *max_atoms) {
        start = atoms.size() - *max_atoms;
        out = "...";
    }
    for (std::size_t i = start; i < atoms.size(); ++i) {
        if (i != start) {
            out += '.';
        }
        out += render(atoms[i]);
    }
    if (atoms.empty()) {
        out = "[]";
    }
    return out;
}

bool well_balanced(const std::vector<TraceAtom>& atoms) {
    std::vector<RuleName> open;
    for (TraceAtom a : atoms) {
        if (a.dir == Dir::Enter) {
            open.push_back(a.rule);
        } else {
            if (open.empty() || open.back() != a.rule) {
                return false;
            }
            open.pop_back();
        }
    }
    return open.empty();
}

Source as_source(const Store& s) {
    return std::visit([](const auto& x) -> Source { return x; }, s);
}

std::string render(const Source& s, std::optional<std::size_t> max_atoms) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, AllocAt>) {
                return render(x.loc) + "@" + render(x.when, max_atoms);
            } else {
                return render(Store{x}, max_atoms);
            }
        },
        s);
}

std::string render(const Store& s, std::optional<std::size_t> max_atoms) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, VarAt>) {
                return x.var + "@" + render(x.when, max_atoms);
            } else {
                return render(x.loc) + "@" + render(x.alloc, max_atoms) + "." + x.field + "@" +
                       render(x.when, max_atoms);
            }
        },
        s);
}

std::string render(const Flow& f, std::optional<std::size_t> max_atoms) {
    return render(f.src, max_atoms) + " -> " + render(f.dst, max_atoms);
}

} // namespace owhile
