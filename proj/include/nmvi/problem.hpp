#pragma once

#include "nmvi/feasible_set.hpp"
#include "nmvi/mapping.hpp"

namespace nmvi {

/// VI(K, F): find x in K with <F(x), y - x> >= 0 for all y in K.
class VIProblem {
public:
    VIProblem(Mapping mapping, FeasibleSet set) : mapping_(std::move(mapping)), set_(std::move(set)) {
        require_dim(set_.dim(), mapping_.dim(), "VI problem feasible set");
    }

    const Mapping& mapping() const { return mapping_; }
    const FeasibleSet& set() const { return set_; }
    Index dim() const { return mapping_.dim(); }

private:
    Mapping mapping_;
    FeasibleSet set_;
};

} // namespace nmvi
