#pragma once

// Recovering program points from traces, and lifting concrete flows to
// program-point flows with it.

#include <optional>
#include <unordered_map>
#include <vector>

#include "owhile/absflow.hpp"
#include "owhile/flow.hpp"
#include "owhile/trace.hpp"

namespace owhile {

struct PPResult {
    ProgramPoint pp;
    // Rule names of exits still waiting for their enter when the trace ran
    // out, innermost first. Empty for traces that stop at a rule boundary.
    std::vector<RuleName> leftover;
    bool operator==(const PPResult&) const = default;
};

// Helper tables.
ProgramPoint app_i(RuleName r, ProgramPoint pp);
ProgramPoint app_o(RuleName r, ProgramPoint pp);
std::vector<RuleName> push_i(RuleName r);
std::vector<RuleName> push_o(RuleName r);

// The defining equations applied literally, one atom at a time from the
// end of the trace. Linear in the trace length; total on any atom list.
PPResult trace_to_pp(const std::vector<TraceAtom>& atoms);
PPResult trace_to_pp(const Trace& t);

// Fast evaluation for many prefixes of one run's trace. Sub-derivations are
// skipped in one jump using precomputed bracket matches, and results are
// memoized at every rule boundary met along the way. Agrees with
// trace_to_pp on every prefix.
class PPResolver {
public:
    explicit PPResolver(const Trace& full);

    // Program point of the prefix of the given length.
    const PPResult& at(std::size_t length);
    // `prefix` should be a prefix of the trace given at construction; other
    // traces are handled by the literal equations.
    PPResult resolve(const Trace& prefix);

    std::size_t length() const { return atoms_.size(); }

private:
    std::vector<TraceAtom> atoms_;
    std::vector<const void*> ids_;       // ids_[n]: identity of the prefix of length n
    std::vector<std::size_t> match_;     // exit at i -> index of its enter, or npos
    std::vector<std::optional<PPResult>> memo_;
};

// Abstraction of concrete flows: every trace replaced by its program point.
AbsSource abstract_source(const Source& s, PPResolver& r);
AbsStore abstract_store(const Store& s, PPResolver& r);
AbsFlow abstract_flow(const Flow& f, PPResolver& r);

AbsSource abstract_source(const Source& s);
AbsStore abstract_store(const Store& s);
AbsFlow abstract_flow(const Flow& f);

} // namespace owhile
