#pragma once

// Dependency vocabulary at the level of program points: the abstract
// counterpart of flow.hpp, shared by the static analysis and by the
// abstraction of concrete flows.

#include <string>
#include <variant>

#include "owhile/ast.hpp"

namespace owhile {

// Object allocated at `site` (an after-point ending in Obj).
struct ObjAt {
    ProgramPoint site;
    auto operator<=>(const ObjAt&) const = default;
};

struct AbsVarAt {
    Ident var;
    ProgramPoint at;
    auto operator<=>(const AbsVarAt&) const = default;
};

// Field `field` of objects allocated at `site`, touched at `at`.
struct AbsFieldAt {
    ProgramPoint site;
    Ident field;
    ProgramPoint at;
    auto operator<=>(const AbsFieldAt&) const = default;
};

using AbsStore = std::variant<AbsVarAt, AbsFieldAt>;
using AbsSource = std::variant<ObjAt, AbsVarAt, AbsFieldAt>;

struct AbsFlow {
    AbsSource src;
    AbsStore dst;
    auto operator<=>(const AbsFlow&) const = default;
};

AbsSource as_source(const AbsStore& s);

// obj@P, x@P, obj@P.f@Q
std::string render(const AbsSource& s);
std::string render(const AbsStore& s);
// "src -> dst"
std::string render(const AbsFlow& f);

} // namespace owhile
