#include "relusnc/simplex.hpp"

#include "relusnc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace relusnc {

namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr double kZeroTolerance = 1e-13;
constexpr double kCancellationTolerance = 1e-11;
constexpr std::size_t kRefactorInterval = 100;

double bound_tolerance( double bound )
{
    return 1e-9 * std::max( 1.0, std::abs( bound ) );
}

std::pair<double, double> slack_bounds( const LinearConstraint &constraint )
{
    switch ( constraint.relation )
    {
    case Relation::LessEq:
        return { -kInfinity, constraint.rhs };
    case Relation::GreaterEq:
        return { constraint.rhs, kInfinity };
    case Relation::Eq:
        break;
    }
    return { constraint.rhs, constraint.rhs };
}

double clamp_into( double value, double lower, double upper )
{
    if ( value < lower )
        return lower;
    if ( value > upper )
        return upper;
    return value;
}

} // namespace

SimplexState::SimplexState( const std::vector<LinearConstraint> &linear, const Bounds &bounds )
    : _numOriginal( bounds.size() )
    , _empty( bounds.empty() )
{
    _lower.reserve( _numOriginal + linear.size() );
    for ( Var var = 0; var < _numOriginal; ++var )
    {
        _lower.push_back( bounds.lower( var ) );
        _upper.push_back( bounds.upper( var ) );
        _value.push_back( clamp_into( 0.0, _lower.back(), _upper.back() ) );
        _basicRow.push_back( kNonBasic );
    }

    for ( const auto &constraint : linear )
        add_slack_row( constraint );
}

void SimplexState::add_slack_row( const LinearConstraint &constraint )
{
    for ( const auto &term : constraint.terms )
        if ( term.var >= _numOriginal )
            throw PreconditionError( "constraint references variable " + std::to_string( term.var ) +
                                     " without a bounds entry" );

    Var slack = total();
    for ( auto &row : _tableau )
        row.push_back( 0.0 );

    std::vector<double> row( slack + 1, 0.0 );
    for ( const auto &term : constraint.terms )
    {
        if ( _basicRow[term.var] == kNonBasic )
        {
            row[term.var] += term.coeff;
            continue;
        }
        const auto &definition = _tableau[_basicRow[term.var]];
        for ( std::size_t j = 0; j < slack; ++j )
            row[j] += term.coeff * definition[j];
    }

    double value = 0.0;
    for ( std::size_t j = 0; j < slack; ++j )
        if ( row[j] != 0.0 )
            value += row[j] * _value[j];

    auto [lower, upper] = slack_bounds( constraint );
    _lower.push_back( lower );
    _upper.push_back( upper );
    _value.push_back( value );
    _basicRow.push_back( _rowBasic.size() );
    _rowBasic.push_back( slack );
    _tableau.push_back( std::move( row ) );
    _rows.push_back( constraint );
}

void SimplexState::add_row( const LinearConstraint &constraint )
{
    add_slack_row( normalized( constraint ) );
}

std::size_t SimplexState::iteration_cap() const
{
    return 50 * std::max<std::size_t>( 1, _numOriginal + _rows.size() );
}

Assignment SimplexState::assignment() const
{
    return Assignment( _value.begin(), _value.begin() + static_cast<std::ptrdiff_t>( _numOriginal ) );
}

bool SimplexState::violates_lower( Var var ) const
{
    return _value[var] < _lower[var] - bound_tolerance( _lower[var] );
}

bool SimplexState::violates_upper( Var var ) const
{
    return _value[var] > _upper[var] + bound_tolerance( _upper[var] );
}

void SimplexState::update_nonbasic( Var var, double new_value )
{
    double delta = new_value - _value[var];
    _value[var] = new_value;
    if ( delta == 0.0 )
        return;
    for ( std::size_t r = 0; r < _rowBasic.size(); ++r )
    {
        double coeff = _tableau[r][var];
        if ( coeff != 0.0 )
            _value[_rowBasic[r]] += coeff * delta;
    }
}

void SimplexState::pivot( std::size_t row, Var entering )
{
    Var leaving = _rowBasic[row];
    auto &pivotRow = _tableau[row];
    double pivotCoeff = pivotRow[entering];

    // entering = (leaving - sum_{j != entering} a_j x_j) / a_entering
    for ( std::size_t j = 0; j < pivotRow.size(); ++j )
    {
        if ( j == entering )
            continue;
        double scaled = -pivotRow[j] / pivotCoeff;
        pivotRow[j] = std::abs( scaled ) < kZeroTolerance ? 0.0 : scaled;
    }
    pivotRow[leaving] = 1.0 / pivotCoeff;
    pivotRow[entering] = 0.0;

    for ( std::size_t r = 0; r < _tableau.size(); ++r )
    {
        if ( r == row )
            continue;
        auto &other = _tableau[r];
        double factor = other[entering];
        if ( factor == 0.0 )
            continue;
        other[entering] = 0.0;
        for ( std::size_t j = 0; j < other.size(); ++j )
        {
            if ( pivotRow[j] == 0.0 )
                continue;
            double term = factor * pivotRow[j];
            double updated = other[j] + term;
            // Cancellation residue would otherwise be eligible as a pivot later.
            double scale = std::max( std::abs( other[j] ), std::abs( term ) );
            bool cancelled = std::abs( updated ) < kZeroTolerance || std::abs( updated ) < kCancellationTolerance * scale;
            other[j] = cancelled ? 0.0 : updated;
        }
    }

    _rowBasic[row] = entering;
    _basicRow[entering] = row;
    _basicRow[leaving] = kNonBasic;
    ++_pivots;
    ++_pivotsSinceRefactor;
}

LpStatus SimplexState::check()
{
    if ( _empty )
        return LpStatus::Infeasible;
    for ( std::size_t var = 0; var < total(); ++var )
        if ( _lower[var] > _upper[var] + bound_tolerance( _upper[var] ) )
            return LpStatus::Infeasible;

    std::size_t cap = iteration_cap();
    std::size_t iterations = 0;
    while ( true )
    {
        Var leaving = kNonBasic;
        bool below = false;
        for ( Var var = 0; var < total(); ++var )
        {
            if ( _basicRow[var] == kNonBasic )
                continue;
            if ( violates_lower( var ) )
            {
                leaving = var;
                below = true;
                break;
            }
            if ( violates_upper( var ) )
            {
                leaving = var;
                break;
            }
        }
        if ( leaving == kNonBasic )
            return LpStatus::Feasible;

        std::size_t row = _basicRow[leaving];
        const auto &definition = _tableau[row];
        Var entering = kNonBasic;
        for ( Var var = 0; var < total(); ++var )
        {
            if ( _basicRow[var] != kNonBasic )
                continue;
            double coeff = definition[var];
            if ( std::abs( coeff ) < kPivotTolerance )
                continue;
            bool canIncrease = _value[var] < _upper[var];
            bool canDecrease = _value[var] > _lower[var];
            bool helps = below ? ( ( coeff > 0 && canIncrease ) || ( coeff < 0 && canDecrease ) )
                               : ( ( coeff < 0 && canIncrease ) || ( coeff > 0 && canDecrease ) );
            if ( helps )
            {
                entering = var;
                break;
            }
        }
        if ( entering == kNonBasic )
            return LpStatus::Infeasible;

        double target = below ? _lower[leaving] : _upper[leaving];
        double theta = ( target - _value[leaving] ) / definition[entering];
        update_nonbasic( entering, _value[entering] + theta );
        _value[leaving] = target;
        pivot( row, entering );

        if ( ++iterations > cap )
            throw EngineError( "simplex iteration limit (" + std::to_string( cap ) + ") exceeded" );
        if ( _pivotsSinceRefactor >= kRefactorInterval )
            refactor();
    }
}

void SimplexState::recompute_basics()
{
    for ( std::size_t r = 0; r < _rowBasic.size(); ++r )
    {
        double sum = 0.0;
        const auto &definition = _tableau[r];
        for ( std::size_t j = 0; j < definition.size(); ++j )
            if ( definition[j] != 0.0 )
                sum += definition[j] * _value[j];
        _value[_rowBasic[r]] = sum;
    }
}

void SimplexState::refactor()
{
    std::size_t rows = _rows.size();
    std::size_t columns = total();

    // Row i reads sum_j a_ij x_j - s_i = 0.
    std::vector<std::vector<double>> matrix( rows, std::vector<double>( columns, 0.0 ) );
    for ( std::size_t i = 0; i < rows; ++i )
    {
        for ( const auto &term : _rows[i].terms )
            matrix[i][term.var] += term.coeff;
        matrix[i][_numOriginal + i] = -1.0;
    }

    std::vector<Var> basics = _rowBasic;
    std::sort( basics.begin(), basics.end() );
    std::vector<bool> used( rows, false );
    std::vector<Var> newRowBasic( rows, kNonBasic );

    for ( Var basic : basics )
    {
        std::size_t best = rows;
        double bestMagnitude = 0.0;
        for ( std::size_t i = 0; i < rows; ++i )
        {
            if ( used[i] )
                continue;
            double magnitude = std::abs( matrix[i][basic] );
            if ( magnitude > bestMagnitude )
            {
                bestMagnitude = magnitude;
                best = i;
            }
        }
        if ( best == rows || bestMagnitude < 1e-12 )
        {
            reset_to_slack_basis();
            return;
        }

        used[best] = true;
        newRowBasic[best] = basic;
        auto &pivotRow = matrix[best];
        double scale = pivotRow[basic];
        for ( double &entry : pivotRow )
            entry /= scale;
        for ( std::size_t i = 0; i < rows; ++i )
        {
            if ( i == best )
                continue;
            double factor = matrix[i][basic];
            if ( factor == 0.0 )
                continue;
            for ( std::size_t j = 0; j < columns; ++j )
                if ( pivotRow[j] != 0.0 )
                    matrix[i][j] -= factor * pivotRow[j];
            matrix[i][basic] = 0.0;
        }
    }

    for ( std::size_t i = 0; i < rows; ++i )
    {
        auto &row = _tableau[i];
        for ( std::size_t j = 0; j < columns; ++j )
        {
            double coeff = _basicRow[j] == kNonBasic ? -matrix[i][j] : 0.0;
            row[j] = std::abs( coeff ) < kZeroTolerance ? 0.0 : coeff;
        }
        _rowBasic[i] = newRowBasic[i];
        _basicRow[newRowBasic[i]] = i;
    }

    recompute_basics();
    _pivotsSinceRefactor = 0;
}

void SimplexState::reset_to_slack_basis()
{
    std::size_t rows = _rows.size();
    for ( Var var = 0; var < _numOriginal; ++var )
    {
        _basicRow[var] = kNonBasic;
        if ( _lower[var] <= _upper[var] )
            _value[var] = clamp_into( _value[var], _lower[var], _upper[var] );
    }
    for ( std::size_t i = 0; i < rows; ++i )
    {
        auto &row = _tableau[i];
        std::fill( row.begin(), row.end(), 0.0 );
        for ( const auto &term : _rows[i].terms )
            row[term.var] += term.coeff;
        Var slack = _numOriginal + i;
        _rowBasic[i] = slack;
        _basicRow[slack] = i;
    }
    recompute_basics();
    _pivotsSinceRefactor = 0;
    ++_resets;
}

void SimplexState::set_bounds( const Bounds &bounds )
{
    if ( bounds.size() != _numOriginal )
        throw PreconditionError( "bounds size differs from the simplex variable count" );

    _empty = bounds.empty();
    for ( Var var = 0; var < _numOriginal; ++var )
    {
        _lower[var] = bounds.lower( var );
        _upper[var] = bounds.upper( var );
        if ( _basicRow[var] == kNonBasic && _lower[var] <= _upper[var] )
            update_nonbasic( var, clamp_into( _value[var], _lower[var], _upper[var] ) );
    }
}

bool SimplexState::assign( Var var, double value )
{
    if ( var >= _numOriginal )
        throw PreconditionError( "assign targets a non-original variable" );
    if ( value < _lower[var] - bound_tolerance( _lower[var] ) ||
         value > _upper[var] + bound_tolerance( _upper[var] ) )
        return false;
    value = clamp_into( value, _lower[var], _upper[var] );

    if ( _basicRow[var] != kNonBasic )
    {
        std::size_t row = _basicRow[var];
        const auto &definition = _tableau[row];
        Var entering = kNonBasic;
        double bestMagnitude = kPivotTolerance;
        for ( Var j = 0; j < total(); ++j )
        {
            if ( _basicRow[j] != kNonBasic )
                continue;
            double magnitude = std::abs( definition[j] );
            if ( magnitude > bestMagnitude )
            {
                bestMagnitude = magnitude;
                entering = j;
            }
        }
        if ( entering == kNonBasic )
            return false;
        pivot( row, entering );
    }

    update_nonbasic( var, value );
    return true;
}

LpResult lp_feasible( const std::vector<LinearConstraint> &linear, const Bounds &bounds )
{
    if ( bounds.empty() )
        return {};
    SimplexState state( linear, bounds );
    if ( state.check() == LpStatus::Infeasible )
        return {};
    return { LpStatus::Feasible, state.assignment() };
}

LpResult lp_restore( SimplexState &state, const Bounds &changed_bounds )
{
    state.set_bounds( changed_bounds );
    if ( state.check() == LpStatus::Infeasible )
        return {};
    return { LpStatus::Feasible, state.assignment() };
}

} // namespace relusnc
