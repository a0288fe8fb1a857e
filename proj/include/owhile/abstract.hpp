#pragma once

// Static dependency analysis over program points. Objects are abstracted by
// their allocation site; heaps are updated weakly.

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "owhile/absflow.hpp"
#include "owhile/ast.hpp"

namespace owhile {

using AbsLoc = std::set<ProgramPoint>;
using AbsDeps = std::set<AbsSource>;

struct AbsVal {
    AbsLoc locs;
    AbsDeps deps;
    bool operator==(const AbsVal&) const = default;
    bool is_bottom() const { return locs.empty() && deps.empty(); }
};

// Absent entries are bottom; bottom values are never stored.
using AbsEnv = std::map<Ident, AbsVal>;
using AbsHeap = std::map<std::pair<ProgramPoint, Ident>, AbsVal>;
using AbsFlowSet = std::set<AbsFlow>;

AbsVal val_join(const AbsVal& a, const AbsVal& b);
bool val_leq(const AbsVal& a, const AbsVal& b);
AbsEnv env_join(const AbsEnv& a, const AbsEnv& b);
bool env_leq(const AbsEnv& a, const AbsEnv& b);
AbsHeap heap_join(const AbsHeap& a, const AbsHeap& b);
bool heap_leq(const AbsHeap& a, const AbsHeap& b);

// Join of the `f` entries of every site in `l`.
AbsVal heap_read(const AbsHeap& h, const AbsLoc& l, const Ident& f);
// Joins `v` into the `f` entry of every site in `l`.
AbsHeap heap_write(AbsHeap h, const AbsLoc& l, const Ident& f, const AbsVal& v);

class FixpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One call of the loop rule.
struct LoopRecord {
    ProgramPoint at;          // ppBefore of the loop
    std::size_t rounds = 0;   // body analyses performed
    bool input_below = false; // input state below the invariant
    bool body_below = false;  // body output from the invariant below it
};

struct AnalysisOptions {
    std::size_t max_rounds = 10'000;
    std::vector<LoopRecord>* loops = nullptr; // appended to when set
};

struct AnalysisResult {
    AbsEnv env;
    AbsHeap heap;
    AbsFlowSet flows;
};

// Terms must carry program points (see annotate_pp); std::invalid_argument
// otherwise.
AbsVal analyze_expr(const AbsEnv& env, const AbsHeap& heap, const Expr& e);
AnalysisResult analyze_stat(const AbsEnv& env, const AbsHeap& heap, const Stat& s, const AnalysisOptions& opts = {});
// Least invariant above (env, heap) closed under the body, found by
// ascending iteration. Throws FixpointError past opts.max_rounds.
AnalysisResult while_fixpoint(const AbsEnv& env, const AbsHeap& heap, const Stat& loop,
                              const AnalysisOptions& opts = {});

// From the bottom state.
AnalysisResult analyze_program(const Stat& decorated, const AnalysisOptions& opts = {});

} // namespace owhile
