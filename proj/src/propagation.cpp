#include "relusnc/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace relusnc {

namespace {

// Tightenings smaller than this are dropped so that a fixpoint is reached and
// re-running propagation on its own output is a no-op.
bool improves_lower( double current, double candidate )
{
    if ( !std::isfinite( candidate ) )
        return false;
    if ( !std::isfinite( current ) )
        return true;
    return candidate > current + 1e-9 * std::max( 1.0, std::abs( current ) );
}

bool improves_upper( double current, double candidate )
{
    if ( !std::isfinite( candidate ) )
        return false;
    if ( !std::isfinite( current ) )
        return true;
    return candidate < current - 1e-9 * std::max( 1.0, std::abs( current ) );
}

class Propagator
{
public:
    explicit Propagator( VnnFormula &formula )
        : _formula( formula )
        , _bounds( formula.bounds )
    {
    }

    bool changed() const { return _changed; }
    void reset() { _changed = false; }
    bool infeasible() const { return _bounds.empty(); }

    void tighten_lower( Var var, double value )
    {
        if ( improves_lower( _bounds.lower( var ), value ) )
            _changed |= _bounds.tighten_lower( var, value );
    }

    void tighten_upper( Var var, double value )
    {
        if ( improves_upper( _bounds.upper( var ), value ) )
            _changed |= _bounds.tighten_upper( var, value );
    }

    void propagate_row( const LinearConstraint &row )
    {
        // Activity range split into a finite part and a count of infinite
        // contributions so that each term can be excluded in O(1).
        double minFinite = 0.0, maxFinite = 0.0;
        std::size_t minInfinite = 0, maxInfinite = 0;
        for ( const auto &term : row.terms )
        {
            auto [low, high] = term_range( term );
            if ( std::isfinite( low ) )
                minFinite += low;
            else
                ++minInfinite;
            if ( std::isfinite( high ) )
                maxFinite += high;
            else
                ++maxInfinite;
        }

        bool upperSide = row.relation != Relation::GreaterEq; // sum <= rhs
        bool lowerSide = row.relation != Relation::LessEq;    // sum >= rhs

        for ( const auto &term : row.terms )
        {
            auto [low, high] = term_range( term );

            if ( upperSide )
            {
                double restMin = rest_of( minFinite, minInfinite, low );
                if ( std::isfinite( restMin ) )
                {
                    double limit = ( row.rhs - restMin ) / term.coeff;
                    if ( term.coeff > 0 )
                        tighten_upper( term.var, limit );
                    else
                        tighten_lower( term.var, limit );
                }
            }
            if ( lowerSide )
            {
                double restMax = rest_of( maxFinite, maxInfinite, high );
                if ( std::isfinite( restMax ) )
                {
                    double limit = ( row.rhs - restMax ) / term.coeff;
                    if ( term.coeff > 0 )
                        tighten_lower( term.var, limit );
                    else
                        tighten_upper( term.var, limit );
                }
            }
            if ( infeasible() )
                return;
        }
    }

    void propagate_relu( std::size_t index )
    {
        const ReluConstraint relu = _formula.relus[index];
        Var b = relu.backward;
        Var f = relu.forward;

        tighten_lower( f, 0.0 );
        if ( std::isfinite( _bounds.upper( b ) ) )
            tighten_upper( f, std::max( 0.0, _bounds.upper( b ) ) );
        if ( _bounds.lower( b ) > 0.0 )
            tighten_lower( f, _bounds.lower( b ) );

        if ( std::isfinite( _bounds.upper( f ) ) )
            tighten_upper( b, _bounds.upper( f ) );
        if ( _bounds.lower( f ) > 0.0 )
            tighten_lower( b, _bounds.lower( f ) );
        if ( infeasible() )
            return;

        if ( relu.phase == Phase::Unfixed )
        {
            if ( _bounds.lower( b ) >= 0.0 )
                fix( index, Phase::Active );
            else if ( _bounds.upper( b ) <= 0.0 )
                fix( index, Phase::Inactive );
        }
    }

private:
    std::pair<double, double> term_range( const Term &term ) const
    {
        double a = term.coeff * _bounds.lower( term.var );
        double b = term.coeff * _bounds.upper( term.var );
        // 0 * inf would be NaN; coefficients are nonzero so only the
        // infinite ends need care.
        double low = std::min( a, b );
        double high = std::max( a, b );
        return { low, high };
    }

    static double rest_of( double finiteSum, std::size_t infiniteCount, double own )
    {
        if ( infiniteCount == 0 )
            return finiteSum - own;
        if ( infiniteCount == 1 && !std::isfinite( own ) )
            return finiteSum;
        return kInfinity; // marker for "unbounded"; callers check isfinite
    }

    void fix( std::size_t index, Phase phase )
    {
        apply_phase( _formula, index, phase );
        _changed = true;
    }

    VnnFormula &_formula;
    Bounds &_bounds;
    bool _changed = false;
};

} // namespace

PropagationResult interval_propagate( const VnnFormula &formula, std::size_t max_rounds )
{
    PropagationResult result;
    result.formula = formula;
    if ( formula.bounds.empty() )
    {
        result.infeasible = true;
        return result;
    }

    Propagator propagator( result.formula );
    while ( result.rounds < max_rounds )
    {
        propagator.reset();
        ++result.rounds;

        // Fixes append rows; index so that new rows are visited this round.
        for ( std::size_t i = 0; i < result.formula.linear.size(); ++i )
        {
            LinearConstraint row = result.formula.linear[i];
            propagator.propagate_row( row );
            if ( propagator.infeasible() )
            {
                result.infeasible = true;
                return result;
            }
        }

        for ( std::size_t i = 0; i < result.formula.relus.size(); ++i )
        {
            propagator.propagate_relu( i );
            if ( propagator.infeasible() )
            {
                result.infeasible = true;
                return result;
            }
        }

        if ( !propagator.changed() )
            return result;
    }

    result.cap_hit = true;
    return result;
}

} // namespace relusnc
