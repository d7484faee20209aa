#pragma once

// Versioned text formats exchanged with worker processes. See
// docs/subquery-format.md for the grammar. Numbers are written in shortest
// round-trip form, so a formula survives write/read bit-exactly.

#include "relusnc/formula.hpp"
#include "relusnc/reluplex.hpp"

#include <iosfwd>
#include <string>

namespace relusnc {

inline constexpr int kFormatVersion = 1;

struct SubQuery
{
    VnnFormula formula;
    double budget = kInfinity; // seconds
    std::size_t depth = 0;
    std::string id;
};

struct SubQueryFile
{
    SubQuery query;
    std::size_t threshold_t = 20;
    double branching_k_percent = 5.0;
    Direction direction = Direction::PolarityBased;
};

void write_formula( std::ostream &out, const VnnFormula &formula );
VnnFormula read_formula( std::istream &in, const std::string &source = "<formula>" );

void write_subquery( std::ostream &out, const SubQueryFile &file );
SubQueryFile read_subquery( std::istream &in, const std::string &source = "<subquery>" );

void write_result( std::ostream &out, const QueryResult &result );
QueryResult read_result( std::istream &in, const std::string &source = "<result>" );

} // namespace relusnc
