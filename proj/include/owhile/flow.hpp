#pragma once

// Concrete dependency vocabulary: sources and stores annotated with the
// traces at which they were created or last written.

#include <string>
#include <variant>

#include "owhile/ast.hpp"
#include "owhile/trace.hpp"

namespace owhile {

// x written at time `when`.
struct VarAt {
    Ident var;
    Trace when;
    auto operator<=>(const VarAt&) const = default;
};

// Field `field` of location `loc` (allocated at `alloc`), written at `when`.
struct FieldAt {
    Location loc;
    Trace alloc;
    Ident field;
    Trace when;
    auto operator<=>(const FieldAt&) const = default;
};

// Location allocated at `when`.
struct AllocAt {
    Location loc;
    Trace when;
    auto operator<=>(const AllocAt&) const = default;
};

using Store = std::variant<VarAt, FieldAt>;
using Source = std::variant<AllocAt, VarAt, FieldAt>;

Source as_source(const Store& s);

struct Flow {
    Source src;
    Store dst;
    auto operator<=>(const Flow&) const = default;
};

// `x@<trace>`, `l0@<trace>`, `l0@<alloc>.f@<trace>`; traces cut to their last
// max_atoms atoms when given.
std::string render(const Source& s, std::optional<std::size_t> max_atoms = std::nullopt);
std::string render(const Store& s, std::optional<std::size_t> max_atoms = std::nullopt);
std::string render(const Flow& f, std::optional<std::size_t> max_atoms = std::nullopt);

} // namespace owhile
