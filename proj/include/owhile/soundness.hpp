#pragma once

// Executable checks of the instrumentation properties and of the static
// analysis against concrete runs, plus a random program generator.

#include <cstdint>
#include <string>
#include <vector>

#include "owhile/abstract.hpp"
#include "owhile/ast.hpp"

namespace owhile {

enum class CheckStatus { Pass, Fail, Skipped };
std::string_view to_string(CheckStatus s); // "pass", "fail", "skipped-nonterminating"

struct CheckReport {
    std::string program;
    std::string check;
    CheckStatus status = CheckStatus::Pass;
    std::vector<std::string> witnesses; // nonempty iff status == Fail
    std::size_t obligations = 0;        // individual facts verified

    bool passed() const { return status != CheckStatus::Fail; }
};

// Every check takes an undecorated program, decorates it itself, and runs it
// from the empty state. Runs ending in an error are checked like successful
// ones; runs out of fuel are reported as skipped.

// Program points recovered from traces agree with the decorations at every
// boundary of a normal rule.
CheckReport check_prop1(const Stat& s, std::uint64_t fuel, const std::string& program = "");
// For every field key (l, t0, f) -> t1 of M: M[l] = t0, and a present field
// still holds the value written at t1.
CheckReport check_prop2(const Stat& s, std::uint64_t fuel, const std::string& program = "");
// Every flow's source is what M said when the storing rule started; Δ only
// grows.
CheckReport check_prop3(const Stat& s, std::uint64_t fuel, const std::string& program = "");
// Every heap cell holding a location is attested by a chain of flows from
// that location's allocation.
CheckReport check_prop4(const Stat& s, std::uint64_t fuel, const std::string& program = "");
// Every concrete flow, lifted to program points, is matched by a flow of the
// static analysis: stores exactly, sources by allocation site, variable name,
// or (allocation site, field).
CheckReport check_soundness(const Stat& s, std::uint64_t fuel, const std::string& program = "",
                            std::vector<LoopRecord>* loops = nullptr);

// All five, in the order above.
std::vector<CheckReport> check_all(const Stat& s, std::uint64_t fuel, const std::string& program = "",
                                   std::vector<LoopRecord>* loops = nullptr);

struct GenConfig {
    std::uint64_t seed = 0;
    int max_depth = 4;
    int max_stmts = 4;
    std::vector<Ident> var_pool{"x", "y", "z"};
    std::vector<Ident> field_pool{"f", "g"};
    double while_probability = 0.2;
};

// Deterministic in cfg. Throws std::invalid_argument on empty pools or
// bounds below 1.
StatPtr gen_program(const GenConfig& cfg);

} // namespace owhile
