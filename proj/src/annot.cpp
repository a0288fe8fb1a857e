#include "owhile/annot.hpp"

#include <algorithm>

namespace owhile {

std::string_view to_string(ErrorCause c) {
    switch (c) {
    case ErrorCause::Propagated: return "propagated";
    case ErrorCause::UnboundVar: return "unbound variable";
    case ErrorCause::NonBoolCond: return "condition is not a boolean";
    case ErrorCause::NonBoolOperand: return "operand is not a boolean";
    case ErrorCause::NotALocation: return "not a location";
    case ErrorCause::UnboundLocation: return "unbound location";
    case ErrorCause::FieldAbsent: return "field absent";
    }
    return "?";
}

FlowSet::Node::~Node() {
    std::shared_ptr<const Node> p = std::move(prev);
    while (p && p.use_count() == 1) {
        std::shared_ptr<const Node> next = std::move(p->prev);
        p = std::move(next);
    }
}

std::vector<Flow> FlowSet::items() const {
    std::vector<Flow> out;
    out.reserve(size());
    for_each_reverse([&](const Flow& f) {
        out.push_back(f);
        return true;
    });
    std::reverse(out.begin(), out.end());
    return out;
}

std::set<Flow> FlowSet::to_set() const {
    std::set<Flow> out;
    for_each_reverse([&](const Flow& f) {
        out.insert(f);
        return true;
    });
    return out;
}

bool FlowSet::contains(const Flow& f) const {
    bool found = false;
    for_each_reverse([&](const Flow& g) {
        found = f == g;
        return !found;
    });
    return found;
}

bool FlowSet::is_prefix_of(const FlowSet& later) const {
    const Node* n = later.last_.get();
    while (n && n->size > size()) {
        n = n->prev.get();
    }
    return n == last_.get();
}

} // namespace owhile
