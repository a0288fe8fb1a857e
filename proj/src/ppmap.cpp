#include "owhile/ppmap.hpp"

#include <algorithm>
#include <limits>

namespace owhile {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Atom prepended by App_i, if any.
std::optional<PathAtom> app_i_atom(RuleName r) {
    switch (r) {
    case RuleName::Seq: return PathAtom::Seq1;
    case RuleName::Seq1: return PathAtom::Seq2;
    case RuleName::If: return PathAtom::IfE;
    case RuleName::IfTrue: return PathAtom::If1;
    case RuleName::IfFalse: return PathAtom::If2;
    case RuleName::While: return PathAtom::WhileE;
    case RuleName::WhileTrue1: return PathAtom::WhileS;
    case RuleName::Asg: return PathAtom::AsgE;
    case RuleName::FldAsg: return PathAtom::FldAsg1;
    case RuleName::FldAsg1: return PathAtom::FldAsg2;
    case RuleName::Del: return PathAtom::DelE;
    case RuleName::Bin: return PathAtom::Bin1;
    case RuleName::Bin1: return PathAtom::Bin2;
    case RuleName::Fld: return PathAtom::FldE;
    default: return std::nullopt;
    }
}

std::optional<PathAtom> app_o_atom(RuleName r) {
    if (is_normal(r)) {
        return construct_atom(r);
    }
    return std::nullopt;
}

// The single name Push_i yields, if any. Asg1 pushes Asg.
std::optional<RuleName> push_i_name(RuleName r) {
    switch (r) {
    case RuleName::Seq1: return RuleName::Seq;
    case RuleName::IfTrue:
    case RuleName::IfFalse: return RuleName::If;
    case RuleName::WhileTrue1:
    case RuleName::WhileTrue2: return RuleName::While;
    case RuleName::Asg1: return RuleName::Asg;
    case RuleName::FldAsg1:
    case RuleName::FldAsg2: return RuleName::FldAsg;
    case RuleName::Bin1:
    case RuleName::Bin2: return RuleName::Bin;
    case RuleName::Del1: return RuleName::Del;
    case RuleName::Fld1: return RuleName::Fld;
    default: return std::nullopt;
    }
}

ProgramPoint prepend(std::optional<PathAtom> a, ProgramPoint pp) {
    if (a) {
        pp.insert(pp.begin(), *a);
    }
    return pp;
}

} // namespace

ProgramPoint app_i(RuleName r, ProgramPoint pp) { return prepend(app_i_atom(r), std::move(pp)); }

ProgramPoint app_o(RuleName r, ProgramPoint pp) { return prepend(app_o_atom(r), std::move(pp)); }

std::vector<RuleName> push_i(RuleName r) {
    if (auto n = push_i_name(r)) {
        return {*n};
    }
    return {};
}

std::vector<RuleName> push_o(RuleName r) {
    if (is_normal(r)) {
        return {r};
    }
    return {};
}

PPResult trace_to_pp(const std::vector<TraceAtom>& atoms) {
    // Both lists are kept reversed: back() is the head.
    std::vector<RuleName> list;
    std::vector<PathAtom> pp_rev;
    for (std::size_t i = atoms.size(); i-- > 0;) {
        TraceAtom a = atoms[i];
        if (list.empty()) {
            std::vector<RuleName> pushed;
            std::optional<PathAtom> atom;
            if (a.dir == Dir::Exit) {
                pushed = push_o(a.rule);
                atom = app_o_atom(a.rule);
            } else {
                pushed = push_i(a.rule);
                atom = app_i_atom(a.rule);
            }
            list.assign(pushed.rbegin(), pushed.rend());
            if (atom) {
                pp_rev.push_back(*atom);
            }
        } else if (a == exit(list.back())) {
            list.push_back(a.rule);
        } else if (a == enter(list.back())) {
            list.pop_back();
        }
    }
    PPResult out;
    out.pp.assign(pp_rev.rbegin(), pp_rev.rend());
    out.leftover.assign(list.rbegin(), list.rend());
    return out;
}

PPResult trace_to_pp(const Trace& t) { return trace_to_pp(t.atoms()); }

PPResolver::PPResolver(const Trace& full) : atoms_(full.atoms()) {
    const std::size_t n = atoms_.size();
    ids_.assign(n + 1, nullptr);
    full.for_each_reverse([&](TraceAtom, const Trace& t) {
        ids_[t.size()] = t.identity();
        return true;
    });
    match_.assign(n, npos);
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < n; ++i) {
        if (atoms_[i].dir == Dir::Enter) {
            open.push_back(i);
        } else if (!open.empty() && atoms_[open.back()].rule == atoms_[i].rule) {
            match_[i] = open.back();
            open.pop_back();
        } else {
            // Not bracket-shaped; any exit without a match sends queries
            // through the literal equations.
            open.clear();
        }
    }
    memo_.resize(n + 1);
}

const PPResult& PPResolver::at(std::size_t length) {
    struct Link {
        std::size_t length;
        std::optional<PathAtom> atom;
    };
    std::vector<Link> chain;
    PPResult base;
    std::size_t n = length;
    bool literal = false;
    while (true) {
        if (n == 0) {
            break;
        }
        if (memo_[n]) {
            base = *memo_[n];
            break;
        }
        const std::size_t i = n - 1;
        const TraceAtom a = atoms_[i];
        if (a.dir == Dir::Exit) {
            if (!is_normal(a.rule)) {
                chain.push_back({n, std::nullopt});
                n = i;
                continue;
            }
            if (match_[i] == npos) {
                literal = true;
                break;
            }
            chain.push_back({n, app_o_atom(a.rule)});
            n = match_[i];
            continue;
        }
        chain.push_back({n, app_i_atom(a.rule)});
        std::optional<RuleName> wanted = push_i_name(a.rule);
        if (!wanted) {
            n = i;
            continue;
        }
        // Walk back to the enclosing enter of `wanted`, jumping over
        // complete sub-derivations.
        std::size_t k = i;
        bool found = false;
        while (k > 0) {
            const std::size_t j = k - 1;
            const TraceAtom b = atoms_[j];
            if (b == enter(*wanted)) {
                found = true;
                k = j;
                break;
            }
            if (b.dir == Dir::Exit) {
                if (match_[j] == npos) {
                    literal = true;
                    break;
                }
                k = match_[j];
            } else {
                k = j;
            }
        }
        if (literal) {
            break;
        }
        if (!found) {
            base = PPResult{{}, {*wanted}};
            break;
        }
        n = k;
    }
    if (literal) {
        // Only reachable on traces that are not prefixes of a run.
        std::vector<TraceAtom> prefix(atoms_.begin(), atoms_.begin() + static_cast<std::ptrdiff_t>(length));
        memo_[length] = trace_to_pp(prefix);
        return *memo_[length];
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        if (it->atom) {
            base.pp.push_back(*it->atom);
        }
        memo_[it->length] = base;
    }
    if (length == 0) {
        static const PPResult empty;
        return empty;
    }
    return *memo_[length];
}

PPResult PPResolver::resolve(const Trace& prefix) {
    const std::size_t n = prefix.size();
    if (n < ids_.size() && ids_[n] == prefix.identity()) {
        return at(n);
    }
    return trace_to_pp(prefix);
}

AbsSource abstract_source(const Source& s, PPResolver& r) {
    return std::visit(
        [&](const auto& x) -> AbsSource {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, AllocAt>) {
                return ObjAt{r.resolve(x.when).pp};
            } else {
                return as_source(abstract_store(Store{x}, r));
            }
        },
        s);
}

AbsStore abstract_store(const Store& s, PPResolver& r) {
    return std::visit(
        [&](const auto& x) -> AbsStore {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, VarAt>) {
                return AbsVarAt{x.var, r.resolve(x.when).pp};
            } else {
                return AbsFieldAt{r.resolve(x.alloc).pp, x.field, r.resolve(x.when).pp};
            }
        },
        s);
}

AbsFlow abstract_flow(const Flow& f, PPResolver& r) { return {abstract_source(f.src, r), abstract_store(f.dst, r)}; }

namespace {
PPResolver& standalone() {
    static thread_local PPResolver r{Trace{}};
    return r;
}
} // namespace

AbsSource abstract_source(const Source& s) { return abstract_source(s, standalone()); }
AbsStore abstract_store(const Store& s) { return abstract_store(s, standalone()); }
AbsFlow abstract_flow(const Flow& f) { return abstract_flow(f, standalone()); }

// ---------------------------------------------------------------------------

AbsSource as_source(const AbsStore& s) {
    return std::visit([](const auto& x) -> AbsSource { return x; }, s);
}

std::string render(const AbsSource& s) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, ObjAt>) {
                return "obj@" + render(x.site);
            } else {
                return render(AbsStore{x});
            }
        },
        s);
}

std::string render(const AbsStore& s) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, AbsVarAt>) {
                return x.var + "@" + render(x.at);
            } else {
                return "obj@" + render(x.site) + "." + x.field + "@" + render(x.at);
            }
        },
        s);
}

std::string render(const AbsFlow& f) { return render(f.src) + " -> " + render(f.dst); }

} // namespace owhile
