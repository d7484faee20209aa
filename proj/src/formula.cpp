#include "relusnc/formula.hpp"

#include "relusnc/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace relusnc {

std::string_view to_string( Relation relation )
{
    switch ( relation )
    {
    case Relation::LessEq:
        return "<=";
    case Relation::GreaterEq:
        return ">=";
    case Relation::Eq:
        return "=";
    }
    return "?";
}

std::string_view to_string( Phase phase )
{
    switch ( phase )
    {
    case Phase::Unfixed:
        return "unfixed";
    case Phase::Active:
        return "active";
    case Phase::Inactive:
        return "inactive";
    }
    return "?";
}

std::string_view to_string( Verdict verdict )
{
    switch ( verdict )
    {
    case Verdict::Sat:
        return "sat";
    case Verdict::Unsat:
        return "unsat";
    case Verdict::Timeout:
        return "timeout";
    }
    return "?";
}

Phase flipped( Phase phase )
{
    if ( phase == Phase::Active )
        return Phase::Inactive;
    if ( phase == Phase::Inactive )
        return Phase::Active;
    throw PreconditionError( "cannot flip an unfixed phase" );
}

double LinearConstraint::evaluate( const std::vector<double> &values ) const
{
    double sum = 0.0;
    for ( const auto &term : terms )
        sum += term.coeff * values[term.var];
    return sum;
}

bool LinearConstraint::holds( const std::vector<double> &values, double tol ) const
{
    double lhs = evaluate( values );
    switch ( relation )
    {
    case Relation::LessEq:
        return lhs <= rhs + tol;
    case Relation::GreaterEq:
        return lhs >= rhs - tol;
    case Relation::Eq:
        return std::abs( lhs - rhs ) <= tol;
    }
    return false;
}

LinearConstraint normalized( LinearConstraint constraint )
{
    std::map<Var, double> merged;
    for ( const auto &term : constraint.terms )
        merged[term.var] += term.coeff;

    constraint.terms.clear();
    for ( const auto &[var, coeff] : merged )
        if ( coeff != 0.0 )
            constraint.terms.push_back( { var, coeff } );

    if ( constraint.terms.empty() )
        throw PreconditionError( "linear constraint has no nonzero coefficient" );
    return constraint;
}

Bounds::Bounds( std::size_t count )
    : _lower( count, -kInfinity )
    , _upper( count, kInfinity )
{
}

Var Bounds::add_variable( double lower, double upper )
{
    _lower.push_back( lower );
    _upper.push_back( upper );
    settle( _lower.size() - 1 );
    return _lower.size() - 1;
}

void Bounds::set( Var var, double lower, double upper )
{
    _lower[var] = lower;
    _upper[var] = upper;
    settle( var );
}

bool Bounds::tighten_lower( Var var, double value )
{
    if ( !( value > _lower[var] ) )
        return false;
    _lower[var] = value;
    settle( var );
    return true;
}

bool Bounds::tighten_upper( Var var, double value )
{
    if ( !( value < _upper[var] ) )
        return false;
    _upper[var] = value;
    settle( var );
    return true;
}

void Bounds::settle( Var var )
{
    if ( _lower[var] <= _upper[var] )
        return;
    if ( _lower[var] > _upper[var] + kFeasibilityTolerance )
    {
        _empty = true;
        return;
    }
    double mid = 0.5 * ( _lower[var] + _upper[var] );
    _lower[var] = mid;
    _upper[var] = mid;
}

bool Bounds::contains( Var var, double value, double tol ) const
{
    return value >= _lower[var] - tol && value <= _upper[var] + tol;
}

Var VnnFormula::add_variable( double lower, double upper )
{
    Var var = bounds.add_variable( lower, upper );
    num_vars = bounds.size();
    return var;
}

void VnnFormula::add_linear( LinearConstraint constraint )
{
    constraint = normalized( std::move( constraint ) );
    for ( const auto &term : constraint.terms )
        if ( term.var >= num_vars )
            throw PreconditionError( "linear constraint references variable " +
                                     std::to_string( term.var ) + " out of range" );
    linear.push_back( std::move( constraint ) );
}

std::size_t VnnFormula::add_relu( Var backward, Var forward, std::size_t layer_rank )
{
    if ( backward == forward )
        throw PreconditionError( "ReLU backward and forward variables coincide" );
    if ( backward >= num_vars || forward >= num_vars )
        throw PreconditionError( "ReLU references a variable out of range" );
    for ( const auto &relu : relus )
        if ( relu.forward == forward )
            throw PreconditionError( "variable " + std::to_string( forward ) +
                                     " is already the forward variable of a ReLU" );
    relus.push_back( { backward, forward, Phase::Unfixed, layer_rank } );
    return relus.size() - 1;
}

std::size_t VnnFormula::unfixed_count() const
{
    return static_cast<std::size_t>( std::count_if(
        relus.begin(), relus.end(), []( const ReluConstraint &r ) { return r.phase == Phase::Unfixed; } ) );
}

std::vector<std::size_t> VnnFormula::unfixed_relus() const
{
    std::vector<std::size_t> result;
    for ( std::size_t i = 0; i < relus.size(); ++i )
        if ( relus[i].phase == Phase::Unfixed )
            result.push_back( i );
    return result;
}

void VnnFormula::validate() const
{
    if ( bounds.size() != num_vars )
        throw PreconditionError( "bounds table size differs from variable count" );

    for ( const auto &constraint : linear )
    {
        bool any = false;
        for ( const auto &term : constraint.terms )
        {
            if ( term.var >= num_vars )
                throw PreconditionError( "linear constraint references variable out of range" );
            any = any || term.coeff != 0.0;
        }
        if ( !any )
            throw PreconditionError( "linear constraint has no nonzero coefficient" );
    }

    std::vector<bool> seen_forward( num_vars, false );
    for ( const auto &relu : relus )
    {
        if ( relu.backward >= num_vars || relu.forward >= num_vars )
            throw PreconditionError( "ReLU references a variable out of range" );
        if ( relu.backward == relu.forward )
            throw PreconditionError( "ReLU backward and forward variables coincide" );
        if ( seen_forward[relu.forward] )
            throw PreconditionError( "variable is the forward variable of two ReLUs" );
        seen_forward[relu.forward] = true;
    }

    for ( Var input : inputs )
    {
        if ( input >= num_vars )
            throw PreconditionError( "input variable out of range" );
        if ( !std::isfinite( bounds.lower( input ) ) || !std::isfinite( bounds.upper( input ) ) )
            throw PreconditionError( "input variable " + std::to_string( input ) + " is unbounded" );
    }
    for ( Var output : outputs )
        if ( output >= num_vars )
            throw PreconditionError( "output variable out of range" );
}

bool check_assignment( const VnnFormula &formula, const Assignment &assignment, double tol )
{
    if ( assignment.size() != formula.num_vars || formula.bounds.empty() )
        return false;

    for ( Var var = 0; var < formula.num_vars; ++var )
        if ( !formula.bounds.contains( var, assignment[var], tol ) )
            return false;

    for ( const auto &constraint : formula.linear )
        if ( !constraint.holds( assignment, tol ) )
            return false;

    for ( const auto &relu : formula.relus )
    {
        double expected = std::max( 0.0, assignment[relu.backward] );
        if ( !( std::abs( expected - assignment[relu.forward] ) <= tol ) )
            return false;
    }
    return true;
}

double polarity( double lower, double upper )
{
    if ( !std::isfinite( lower ) || !std::isfinite( upper ) )
        throw PreconditionError( "polarity needs finite bounds" );
    if ( !( lower < 0.0 && upper > 0.0 ) )
        throw PreconditionError( "polarity needs lower < 0 < upper" );
    return ( lower + upper ) / ( upper - lower );
}

double polarity( const ReluConstraint &relu, const Bounds &bounds )
{
    return polarity( bounds.lower( relu.backward ), bounds.upper( relu.backward ) );
}

double polarity_score( double lower, double upper )
{
    if ( lower >= 0.0 )
        return 1.0;
    if ( upper <= 0.0 )
        return -1.0;
    bool finite_lower = std::isfinite( lower );
    bool finite_upper = std::isfinite( upper );
    if ( finite_lower && finite_upper )
        return polarity( lower, upper );
    if ( finite_lower )
        return 1.0;
    if ( finite_upper )
        return -1.0;
    return 0.0;
}

void apply_phase( VnnFormula &formula, std::size_t relu_index, Phase phase )
{
    if ( relu_index >= formula.relus.size() )
        throw PreconditionError( "ReLU index out of range" );
    if ( phase == Phase::Unfixed )
        throw PreconditionError( "cannot fix a ReLU to the unfixed phase" );

    ReluConstraint &relu = formula.relus[relu_index];
    if ( relu.phase != Phase::Unfixed )
        throw PreconditionError( "ReLU " + std::to_string( relu_index ) + " is already fixed" );

    relu.phase = phase;
    if ( phase == Phase::Inactive )
    {
        formula.bounds.tighten_upper( relu.backward, 0.0 );
        formula.bounds.tighten_lower( relu.forward, 0.0 );
        formula.bounds.tighten_upper( relu.forward, 0.0 );
    }
    else
    {
        Var backward = relu.backward;
        Var forward = relu.forward;
        formula.bounds.tighten_lower( backward, 0.0 );
        formula.linear.push_back( { { { backward, 1.0 }, { forward, -1.0 } }, Relation::Eq, 0.0 } );
    }
}

VnnFormula fix_relu( const VnnFormula &formula, std::size_t relu_index, Phase phase )
{
    VnnFormula copy = formula;
    apply_phase( copy, relu_index, phase );
    return copy;
}

} // namespace relusnc
