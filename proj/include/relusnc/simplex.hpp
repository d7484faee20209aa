#pragma once

// Bounded-variable simplex deciding feasibility of a conjunction of linear
// constraints under variable bounds.
//
// Every row i introduces a slack s_i = sum_j a_ij x_j whose bounds encode the
// relation (pinned for equalities, one-sided for inequalities). The tableau
// expresses each basic variable as a combination of nonbasic ones; nonbasic
// variables always sit inside their bounds and the search pivots out-of-bound
// basic variables using Bland's rule.

#include "relusnc/formula.hpp"

#include <cstddef>
#include <vector>

namespace relusnc {

enum class LpStatus { Feasible, Infeasible };

struct LpResult
{
    LpStatus status = LpStatus::Infeasible;
    Assignment assignment; // original variables; populated when feasible

    bool feasible() const { return status == LpStatus::Feasible; }
};

class SimplexState
{
public:
    SimplexState( const std::vector<LinearConstraint> &linear, const Bounds &bounds );

    // Pivot until every variable is within bounds or a row proves
    // infeasibility. Throws EngineError when the iteration cap is exceeded.
    LpStatus check();

    std::size_t num_original() const { return _numOriginal; }
    std::size_t num_rows() const { return _rowBasic.size(); }

    double value( Var var ) const { return _value[var]; }
    Assignment assignment() const;

    double lower( Var var ) const { return _lower[var]; }
    double upper( Var var ) const { return _upper[var]; }
    bool is_basic( Var var ) const { return _basicRow[var] != kNonBasic; }

    // Replace the bounds of the original variables. Nonbasic values are
    // clamped into the new box; call check() afterwards.
    void set_bounds( const Bounds &bounds );

    // Force an original variable to a value (assignment repair). A basic
    // variable is pivoted out first. Returns false when the value lies outside
    // the variable's bounds or the variable cannot leave the basis; the state
    // is untouched in that case. Call check() afterwards.
    bool assign( Var var, double value );

    // Conjoin a new row over the original variables.
    void add_row( const LinearConstraint &constraint );

    std::size_t pivots() const { return _pivots; }
    std::size_t resets() const { return _resets; }
    std::size_t iteration_cap() const;

    // Rebuild the tableau from the original rows for the current basis and
    // recompute basic values. A numerically singular basis is replaced by
    // the slack basis.
    void refactor();

private:
    static constexpr std::size_t kNonBasic = static_cast<std::size_t>( -1 );

    std::size_t total() const { return _lower.size(); }
    void add_slack_row( const LinearConstraint &constraint );
    void recompute_basics();
    void reset_to_slack_basis();
    void update_nonbasic( Var var, double new_value );
    void pivot( std::size_t row, Var entering );
    bool violates_lower( Var var ) const;
    bool violates_upper( Var var ) const;

    std::size_t _numOriginal;
    std::vector<LinearConstraint> _rows;

    std::vector<double> _lower;
    std::vector<double> _upper;
    std::vector<double> _value;

    // _tableau[r][j]: coefficient of nonbasic j in the definition of the
    // basic variable of row r. Basic columns are zero.
    std::vector<std::vector<double>> _tableau;
    std::vector<Var> _rowBasic;
    std::vector<std::size_t> _basicRow;

    bool _empty = false;
    std::size_t _pivots = 0;
    std::size_t _pivotsSinceRefactor = 0;
    std::size_t _resets = 0;
};

LpResult lp_feasible( const std::vector<LinearConstraint> &linear, const Bounds &bounds );

// Warm-started re-solve of an existing state under new bounds.
LpResult lp_restore( SimplexState &state, const Bounds &changed_bounds );

} // namespace relusnc
