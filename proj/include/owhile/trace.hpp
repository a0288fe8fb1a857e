#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "owhile/ast.hpp"

namespace owhile {

enum class Dir : std::uint8_t { Enter, Exit };

struct TraceAtom {
    RuleName rule;
    Dir dir;
    auto operator<=>(const TraceAtom&) const = default;
};

inline TraceAtom enter(RuleName r) { return {r, Dir::Enter}; }
inline TraceAtom exit(RuleName r) { return {r, Dir::Exit}; }

// "i:Seq" / "o:Seq"
std::string render(TraceAtom a);
std::optional<TraceAtom> parse_trace_atom(std::string_view s);

// Persistent snoc list of trace atoms. Appending is O(1) and shares the
// prefix, so every point of a run can hold its own trace cheaply. All traces
// produced by one run are prefixes of the final trace.
class Trace {
public:
    Trace() = default;
    explicit Trace(const std::vector<TraceAtom>& atoms);

    std::size_t size() const { return last_ ? last_->size : 0; }
    bool empty() const { return !last_; }

    Trace push(TraceAtom a) const;
    // Requires !empty().
    TraceAtom back() const { return last_->atom; }
    Trace pop() const;
    // Prefix of the given length; requires n <= size().
    Trace prefix(std::size_t n) const;

    std::vector<TraceAtom> atoms() const;
    bool is_prefix_of(const Trace& other) const;

    // Stable identity of the last cell; equal pointers imply equal traces.
    const void* identity() const { return last_.get(); }

    // Walks atoms from the newest to the oldest; fn(atom, trace ending at atom)
    // returns false to stop.
    template <class Fn>
    void for_each_reverse(Fn&& fn) const {
        for (std::shared_ptr<const Node> n = last_; n; n = n->prev) {
            if (!fn(n->atom, Trace(n))) {
                return;
            }
        }
    }

    friend bool operator==(const Trace& a, const Trace& b);
    friend std::strong_ordering operator<=>(const Trace& a, const Trace& b);

private:
    struct Node {
        TraceAtom atom;
        std::size_t size;
        mutable std::shared_ptr<const Node> prev;
        Node(TraceAtom a, std::size_t n, std::shared_ptr<const Node> p) : atom(a), size(n), prev(std::move(p)) {}
        ~Node();
    };

    explicit Trace(std::shared_ptr<const Node> n) : last_(std::move(n)) {}

    std::shared_ptr<const Node> last_;
};

// Atoms joined by '.'. With max_atoms set, only the last max_atoms atoms are
// shown, prefixed by "...".
std::string render(const Trace& t, std::optional<std::size_t> max_atoms = std::nullopt);

// True iff Enter/Exit atoms nest like brackets and every bracket is closed.
bool well_balanced(const std::vector<TraceAtom>& atoms);

} // namespace owhile
