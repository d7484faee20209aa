#include "relusnc/reluplex.hpp"

#include "relusnc/error.hpp"
#include "relusnc/propagation.hpp"
#include "relusnc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <tuple>

namespace relusnc {

namespace {

constexpr double kReluTolerance = 1e-6;

bool expired( const SolverConfig &config )
{
    if ( config.stop.stop_requested() )
        return true;
    return config.deadline && Clock::now() >= *config.deadline;
}

bool violated( const ReluConstraint &relu, const Assignment &assignment )
{
    double expected = std::max( 0.0, assignment[relu.backward] );
    return std::abs( expected - assignment[relu.forward] ) > kReluTolerance;
}

// Witness whose ReLUs hold exactly up to LP precision: every ReLU is fixed
// to the phase the witness exhibits and the linear problem re-solved. ReLUs
// accepted within tolerance would otherwise let errors accumulate through
// the layers.
Assignment polish( const VnnFormula &original, const VnnFormula &current, Assignment witness )
{
    VnnFormula fixed = current;
    for ( std::size_t i = 0; i < fixed.relus.size(); ++i )
        if ( fixed.relus[i].phase == Phase::Unfixed )
            apply_phase( fixed, i, witness[fixed.relus[i].backward] >= 0.0 ? Phase::Active : Phase::Inactive );
    if ( fixed.bounds.empty() )
        return witness;
    LpResult exact = lp_feasible( fixed.linear, fixed.bounds );
    if ( exact.feasible() && check_assignment( original, exact.assignment, kReluTolerance ) )
        return std::move( exact.assignment );
    return witness;
}

struct Node
{
    VnnFormula formula;
    std::shared_ptr<const SimplexState> warm; // parent's tableau, if any
    std::size_t depth = 0;
};

// Tableau for a node: the parent's state extended by the rows the node
// appended, or a cold build.
std::unique_ptr<SimplexState> node_tableau( const Node &node, const VnnFormula &formula )
{
    if ( !node.warm )
        return std::make_unique<SimplexState>( formula.linear, formula.bounds );

    auto state = std::make_unique<SimplexState>( *node.warm );
    for ( std::size_t i = state->num_rows(); i < formula.linear.size(); ++i )
        state->add_row( formula.linear[i] );
    state->set_bounds( formula.bounds );
    return state;
}

} // namespace

std::string_view to_string( Direction direction )
{
    return direction == Direction::PolarityBased ? "polarity" : "inactive-first";
}

void SolverConfig::validate() const
{
    if ( threshold_t < 1 )
        throw PreconditionError( "threshold_t must be at least 1" );
    if ( !( branching_k_percent > 0.0 && branching_k_percent <= 100.0 ) )
        throw PreconditionError( "branching_k_percent must lie in (0, 100]" );
}

SolverConfig default_solver_config( const VnnFormula &formula )
{
    SolverConfig config;
    config.threshold_t = formula.inputs.size() <= 10 ? 1 : 20;
    return config;
}

Phase direction_heuristic( const ReluConstraint &relu, const Bounds &bounds )
{
    return polarity( relu, bounds ) >= 0.0 ? Phase::Active : Phase::Inactive;
}

Phase preferred_phase( const ReluConstraint &relu, const Bounds &bounds, Direction direction )
{
    if ( direction == Direction::AlwaysInactiveFirst )
        return Phase::Inactive;
    double score = polarity_score( bounds.lower( relu.backward ), bounds.upper( relu.backward ) );
    return score >= 0.0 ? Phase::Active : Phase::Inactive;
}

std::optional<RepairAction> repair( const ReluConstraint &relu,
                                    const Assignment &assignment,
                                    const Bounds &bounds,
                                    Direction direction )
{
    double backward = assignment[relu.backward];
    double forward = assignment[relu.forward];

    RepairAction primary{};
    if ( preferred_phase( relu, bounds, direction ) == Phase::Inactive )
    {
        if ( backward <= 0.0 )
            primary = { relu.forward, 0.0 };
        else if ( forward >= 0.0 )
            primary = { relu.backward, forward };
        else
            primary = { relu.forward, backward };
    }
    else
    {
        if ( backward >= 0.0 )
            primary = { relu.forward, backward };
        else if ( forward > 0.0 )
            primary = { relu.backward, forward };
        else
            primary = { relu.forward, 0.0 };
    }

    auto fits = [&]( const RepairAction &action ) {
        return bounds.contains( action.var, action.value, kFeasibilityTolerance );
    };
    if ( fits( primary ) )
        return primary;

    // Move the other variable instead.
    std::optional<RepairAction> fallback;
    if ( primary.var == relu.forward )
    {
        if ( forward >= 0.0 )
            fallback = RepairAction{ relu.backward, forward };
    }
    else
        fallback = RepairAction{ relu.forward, std::max( 0.0, backward ) };

    if ( fallback && fits( *fallback ) )
        return fallback;
    return std::nullopt;
}

std::size_t select_branch_relu( const VnnFormula &formula,
                                double k_percent,
                                const std::vector<std::size_t> &excluded )
{
    if ( !( k_percent > 0.0 && k_percent <= 100.0 ) )
        throw PreconditionError( "k_percent must lie in (0, 100]" );

    std::vector<std::size_t> open;
    std::vector<std::size_t> decided;
    for ( std::size_t i = 0; i < formula.relus.size(); ++i )
    {
        const auto &relu = formula.relus[i];
        if ( relu.phase != Phase::Unfixed )
            continue;
        if ( std::find( excluded.begin(), excluded.end(), i ) != excluded.end() )
            continue;
        double lower = formula.bounds.lower( relu.backward );
        double upper = formula.bounds.upper( relu.backward );
        ( lower < 0.0 && upper > 0.0 ? open : decided ).push_back( i );
    }
    std::vector<std::size_t> &candidates = open.empty() ? decided : open;
    if ( candidates.empty() )
        throw PreconditionError( "no unfixed ReLU to branch on" );

    std::sort( candidates.begin(), candidates.end(), [&]( std::size_t a, std::size_t b ) {
        const auto &ra = formula.relus[a];
        const auto &rb = formula.relus[b];
        if ( ra.layer_rank != rb.layer_rank )
            return ra.layer_rank < rb.layer_rank;
        return ra.backward < rb.backward;
    } );

    double raw = k_percent * static_cast<double>( candidates.size() ) / 100.0;
    std::size_t window = static_cast<std::size_t>( std::ceil( raw - 1e-9 ) );
    window = std::clamp<std::size_t>( window, 1, candidates.size() );

    std::size_t best = candidates.front();
    double bestScore = kInfinity;
    for ( std::size_t pos = 0; pos < window; ++pos )
    {
        const auto &relu = formula.relus[candidates[pos]];
        double score = std::abs(
            polarity_score( formula.bounds.lower( relu.backward ), formula.bounds.upper( relu.backward ) ) );
        if ( score < bestScore )
        {
            bestScore = score;
            best = candidates[pos];
        }
    }
    return best;
}

SolveOutcome solve_detailed( const VnnFormula &formula, const SolverConfig &config )
{
    config.validate();
    SolveOutcome outcome;
    SolverStats &stats = outcome.stats;

    std::vector<Node> stack;
    stack.push_back( { formula, nullptr, 0 } );

    while ( !stack.empty() )
    {
        if ( expired( config ) )
        {
            outcome.result = QueryResult::timeout();
            return outcome;
        }

        Node node = std::move( stack.back() );
        stack.pop_back();
        ++stats.nodes;
        stats.max_depth = std::max( stats.max_depth, node.depth );

        PropagationResult propagated = interval_propagate( node.formula );
        if ( propagated.infeasible )
            continue;
        const VnnFormula &current = propagated.formula;

        std::unique_ptr<SimplexState> lp = node_tableau( node, current );
        std::size_t pivotsBefore = lp->pivots();
        LpStatus status = lp->check();
        if ( status == LpStatus::Infeasible )
        {
            stats.pivots += lp->pivots() - pivotsBefore;
            continue;
        }

        std::vector<std::size_t> seenViolated( current.relus.size(), 0 );
        std::optional<std::size_t> branchOn;
        while ( true )
        {
            if ( expired( config ) )
            {
                stats.pivots += lp->pivots() - pivotsBefore;
                outcome.result = QueryResult::timeout();
                return outcome;
            }

            Assignment assignment = lp->assignment();

            // Violated ReLU with the smallest (layer_rank, backward) key.
            std::optional<std::size_t> target;
            for ( std::size_t i = 0; i < current.relus.size(); ++i )
            {
                const auto &relu = current.relus[i];
                if ( relu.phase != Phase::Unfixed || !violated( relu, assignment ) )
                    continue;
                if ( !target ||
                     std::tie( relu.layer_rank, relu.backward ) <
                         std::tie( current.relus[*target].layer_rank, current.relus[*target].backward ) )
                    target = i;
            }

            if ( !target )
            {
                if ( !check_assignment( formula, assignment, kReluTolerance ) )
                {
                    lp->refactor();
                    assignment = lp->assignment();
                    if ( !check_assignment( formula, assignment, kReluTolerance ) )
                        throw EngineError( "solver produced a witness that fails validation" );
                }
                stats.pivots += lp->pivots() - pivotsBefore;
                outcome.result = QueryResult::sat( polish( formula, current, std::move( assignment ) ) );
                return outcome;
            }

            if ( ++seenViolated[*target] < config.threshold_t )
            {
                auto action = repair( current.relus[*target], assignment, current.bounds, config.direction );
                if ( action && lp->assign( action->var, action->value ) )
                {
                    ++stats.repairs;
                    if ( lp->check() == LpStatus::Infeasible )
                        break;
                    continue;
                }
            }

            branchOn = select_branch_relu( current, config.branching_k_percent );
            break;
        }
        stats.pivots += lp->pivots() - pivotsBefore;

        if ( !branchOn )
            continue;

        ++stats.splits;
        const ReluConstraint &relu = current.relus[*branchOn];
        Phase first = preferred_phase( relu, current.bounds, config.direction );
        std::shared_ptr<const SimplexState> warm( std::move( lp ) );
        // Depth first: the preferred child is popped next.
        stack.push_back( { fix_relu( current, *branchOn, flipped( first ) ), warm, node.depth + 1 } );
        stack.push_back( { fix_relu( current, *branchOn, first ), warm, node.depth + 1 } );
    }

    outcome.result = QueryResult::unsat();
    return outcome;
}

QueryResult solve( const VnnFormula &formula, const SolverConfig &config )
{
    return solve_detailed( formula, config ).result;
}

} // namespace relusnc
