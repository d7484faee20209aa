#pragma once

// Line-based property files. One constraint per line:
//
//   [+|-][coef][*]var ... (<=|>=|=) rhs
//
// where var is xI (network input I) or yI (network output I). Text after
// "//" is a comment. The file states the negated property, i.e. the region
// in which a counterexample is sought.

#include "relusnc/formula.hpp"
#include "relusnc/network.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace relusnc {

enum class VarKind { Input, Output };

struct PropertyTerm
{
    VarKind kind;
    std::size_t index;
    double coeff;
};

struct PropertyConstraint
{
    std::vector<PropertyTerm> terms;
    Relation relation = Relation::LessEq;
    double rhs = 0.0;
    std::size_t line = 0;

    bool only( VarKind kind ) const;
};

struct PropertySpec
{
    std::vector<PropertyConstraint> constraints;

    std::vector<PropertyConstraint> input_constraints() const;
    std::vector<PropertyConstraint> output_constraints() const;
};

PropertySpec parse_property( const std::string &path );
PropertySpec parse_property( std::istream &in, const std::string &source = "<property>" );
PropertySpec parse_property_text( const std::string &text, const std::string &source = "<property>" );

// encode_network(net) conjoined with the property. Single-variable
// constraints become bound tightenings.
VnnFormula encode_property( const Network &net, const PropertySpec &spec );

} // namespace relusnc
