#pragma once

// Exhaustive partitioning of a VNN formula into 2^d sub-formulas, either by
// bisecting input ranges or by fixing ReLU phases.

#include "relusnc/formula.hpp"

#include <cstddef>
#include <vector>

namespace relusnc {

struct PartitionResult
{
    std::vector<VnnFormula> children;
    bool degenerate = false; // input split: every input box has zero width
    bool capped = false;     // ReLU split: fewer unfixed ReLUs than requested
};

bool is_power_of_two( std::size_t n );
std::size_t log2_exact( std::size_t n );

// log2(n) rounds of bisection; each round splits every leaf on its widest
// input (lowest index on ties) at the midpoint. Children share the midpoint.
PartitionResult partition_input( const VnnFormula &formula, std::size_t n );

// Fixes log2(n) ReLUs chosen by repeated branching selection and returns
// every phase combination, each bound-propagated. A child refuted by
// propagation is returned with its empty-domain marker set. Child order:
// bit i of the child index selects Active for the i-th chosen ReLU.
PartitionResult partition_relu( const VnnFormula &formula, std::size_t n, double k_percent = 5.0 );

} // namespace relusnc
