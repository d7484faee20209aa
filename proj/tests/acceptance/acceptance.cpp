// Acceptance gate: runs each numbered criterion and prints one PASS/FAIL
// line per criterion. Arguments select criteria; none means all.

#include "relusnc/formula.hpp"
#include "relusnc/iterprop.hpp"
#include "relusnc/network.hpp"
#include "relusnc/oracle.hpp"
#include "relusnc/partition.hpp"
#include "relusnc/presets.hpp"
#include "relusnc/reluplex.hpp"
#include "relusnc/simplex.hpp"
#include "relusnc/snc.hpp"

#include "dense_lp.hpp"
#include "fm_oracle.hpp"
#include "random_models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>

namespace relusnc {
namespace {

using testing::Rng;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

template <typename... Parts>
std::string concat( const Parts &...parts )
{
    std::ostringstream out;
    ( out << ... << parts );
    return out.str();
}

constexpr std::size_t kSuiteSize = 500;
constexpr std::uint64_t kSuiteSeed = 1000;

// The oracle suite: 2-3 hidden layers, 4-12 ReLUs, integer weights in [-3, 3].
VnnFormula suite_formula( std::size_t i )
{
    Rng rng( kSuiteSeed + i );
    return testing::random_robustness_query( rng, testing::random_network( rng ) ).formula;
}

Verdict oracle_verdict( const VnnFormula &formula )
{
    return enumerate_phases_oracle( formula, testing::dense_lp_feasible ).verdict;
}

Outcome oracle_agreement()
{
    std::size_t runs = 0, mismatches = 0, badWitnesses = 0, sat = 0;
    std::string firstMismatch;
    for ( std::size_t i = 0; i < kSuiteSize; ++i )
    {
        VnnFormula f = suite_formula( i );
        Verdict expected = oracle_verdict( f );
        sat += expected == Verdict::Sat;
        for ( Preset preset : all_presets() )
        {
            RunOutcome outcome = run_query( f, preset_config( preset, f, 4 ) );
            ++runs;
            if ( outcome.result.verdict != expected )
            {
                if ( mismatches++ == 0 )
                    firstMismatch = concat( " first: formula ", i, " preset ", to_string( preset ) );
            }
            else if ( outcome.result.is_sat() && !check_assignment( f, outcome.result.witness, 1e-6 ) )
                ++badWitnesses;
        }
    }
    return { mismatches == 0 && badWitnesses == 0,
             concat( runs, " runs over ", kSuiteSize, " networks (", sat, " sat), ", mismatches, " mismatches, ",
                     badWitnesses, " invalid witnesses", firstMismatch ) };
}

Outcome timeout_fraction()
{
    std::size_t violations = 0, deep = 0, maxDepth = 0;
    std::map<std::size_t, std::size_t> unsatRuns;
    double worst = 0.0;
    for ( std::size_t n : { 2u, 4u } )
    {
        for ( std::size_t i = 0; i < kSuiteSize && unsatRuns[n] < 60; ++i )
        {
            VnnFormula f = suite_formula( i );
            SncConfig config;
            config.initial_divides = n;
            config.online_divides = n;
            config.initial_timeout = 1e-6;
            config.timeout_factor = 2.0;
            config.solver = default_solver_config( f );
            SncResult r = split_and_conquer( f, config );
            if ( !r.result.is_unsat() )
                continue;
            ++unsatRuns[n];
            double fraction = static_cast<double>( r.stats.timeouts ) / static_cast<double>( r.stats.solve_calls );
            worst = std::max( worst, fraction * static_cast<double>( n ) );
            violations += !( fraction < 1.0 / static_cast<double>( n ) );
            deep += r.stats.timeouts > 0;
            maxDepth = std::max( maxDepth, r.stats.max_depth );
        }
    }
    bool enough = unsatRuns[2] >= 50 && unsatRuns[4] >= 50;
    return { enough && violations == 0 && deep > 0,
             concat( unsatRuns[2], " Unsat runs with N=2 and ", unsatRuns[4], " with N=4, ", deep,
                     " with timeouts, max depth ", maxDepth, ", largest N*timeouts/calls ", worst, ", ", violations,
                     " violations" ) };
}

Outcome partition_exhaustive()
{
    constexpr int kFormulas = 100;
    constexpr int kPoints = 10000;
    std::size_t uncovered = 0, parentFeasible = 0, verdictMismatches = 0;
    for ( int i = 0; i < kFormulas; ++i )
    {
        Rng rng( 5000 + i );
        Network net = testing::random_network( rng );
        testing::RobustnessQuery q = testing::random_robustness_query( rng, net );
        // A lowered baseline keeps a share of sampled points parent-feasible.
        VnnFormula sampled = encode_robustness_query( net, q.center, q.delta, q.output_index, q.baseline - 1.0, 0.0 );
        for ( SplitStrategy strategy : { SplitStrategy::Input, SplitStrategy::Relu } )
        {
            std::vector<VnnFormula> children = partition( sampled, 4, strategy );
            for ( int s = 0; s < kPoints; ++s )
            {
                Assignment a = induced_assignment( net, testing::random_point( rng, sampled ) );
                if ( !check_assignment( sampled, a, 1e-9 ) )
                    continue;
                ++parentFeasible;
                bool covered = std::any_of( children.begin(), children.end(), [&]( const VnnFormula &child ) {
                    return check_assignment( child, a, 1e-7 );
                } );
                uncovered += !covered;
            }

            bool parentSat = oracle_verdict( q.formula ) == Verdict::Sat;
            bool anyChild = false;
            for ( const VnnFormula &child : partition( q.formula, 4, strategy ) )
                anyChild = anyChild || oracle_verdict( child ) == Verdict::Sat;
            verdictMismatches += anyChild != parentSat;
        }
    }
    return { uncovered == 0 && verdictMismatches == 0 && parentFeasible > 0,
             concat( parentFeasible, " parent-feasible samples, ", uncovered, " in no child; ", verdictMismatches,
                     " oracle verdict mismatches over ", kFormulas, " formulas x 2 strategies" ) };
}

Outcome polarity_formula()
{
    Rng rng( 4 );
    std::uniform_real_distribution<double> magnitude( 1e-3, 1e3 );
    std::size_t formulaErrors = 0, antisymmetryErrors = 0;
    for ( int i = 0; i < 1000; ++i )
    {
        double a = -magnitude( rng );
        double b = magnitude( rng );
        double direct = ( a + b ) / ( b - a );
        formulaErrors += !( std::abs( polarity( a, b ) - direct ) <= 1e-12 );
        antisymmetryErrors += polarity( a, b ) != -polarity( -b, -a );
    }
    return { formulaErrors == 0 && antisymmetryErrors == 0,
             concat( "1000 pairs, ", formulaErrors, " off by more than 1e-12, ", antisymmetryErrors,
                     " antisymmetry failures" ) };
}

Outcome repair_example()
{
    VnnFormula f;
    Var b = f.add_variable( -2.0, 1.0 );
    Var r = f.add_variable( 0.0, kInfinity );
    f.add_relu( b, r, 0 );
    std::optional<RepairAction> action = repair( f.relus[0], { -1.0, 1.0 }, f.bounds, Direction::PolarityBased );
    bool pass = action && action->var == r && action->value == 0.0;
    return { pass, action ? concat( "repair sets variable ", action->var, " to ", action->value ) : "no repair offered" };
}

// ReLU over b = x1 - x2 (or x1 + x2 - 1) whose probed phase contradicts a
// linear row that interval reasoning alone cannot connect to b.
VnnFormula hidden_phase_family( std::size_t extraInputs, double threshold, bool probeInactive )
{
    VnnFormula f;
    Var x1 = f.add_variable( -1, 1 );
    Var x2 = f.add_variable( -1, 1 );
    f.inputs = { x1, x2 };
    Var b = f.add_variable();
    Var out = f.add_variable();
    if ( probeInactive )
    {
        f.add_linear( { { { b, 1.0 }, { x1, -1.0 }, { x2, 1.0 } }, Relation::Eq, 0.0 } );
        f.add_linear( { { { x1, 1.0 }, { x2, -1.0 } }, Relation::GreaterEq, threshold } );
    }
    else
    {
        f.add_linear( { { { b, 1.0 }, { x1, -1.0 }, { x2, -1.0 } }, Relation::Eq, -1.0 } );
        f.add_linear( { { { x1, 1.0 }, { x2, 1.0 } }, Relation::LessEq, 1.0 - threshold } );
    }
    f.add_relu( b, out, 0 );
    for ( std::size_t i = 0; i < extraInputs; ++i )
    {
        Var x = f.add_variable( -1, 1 );
        Var y = f.add_variable();
        f.inputs.push_back( x );
        f.add_relu( x, y, 0 );
    }
    return f;
}

Outcome iterprop_equisatisfiable()
{
    std::size_t changed = 0, fixedTotal = 0;
    for ( std::size_t i = 0; i < kSuiteSize; ++i )
    {
        VnnFormula f = suite_formula( i );
        IterPropResult r = iterative_propagate( f, {} );
        fixedTotal += r.fixed;
        changed += oracle_verdict( r.formula ) != oracle_verdict( f );
    }

    std::size_t family = 0, missed = 0;
    for ( std::size_t extra : { 0u, 1u, 3u } )
        for ( double threshold : { 0.25, 0.5, 1.0 } )
            for ( bool probeInactive : { true, false } )
            {
                ++family;
                VnnFormula f = hidden_phase_family( extra, threshold, probeInactive );
                IterPropResult r = iterative_propagate( f, {} );
                Phase expected = probeInactive ? Phase::Active : Phase::Inactive;
                bool ok = !r.fixed_per_sweep.empty() && r.fixed_per_sweep[0] >= 1 &&
                          r.formula.relus[0].phase == expected;
                missed += !ok;
            }
    return { changed == 0 && missed == 0,
             concat( kSuiteSize, " formulas, ", changed, " verdict changes, ", fixedTotal, " ReLUs fixed; ", family - missed,
                     "/", family, " constructed formulas fixed in the first sweep" ) };
}

Outcome defaults_fidelity()
{
    auto formula = []( std::size_t inputs, std::size_t relus ) {
        VnnFormula f;
        for ( std::size_t i = 0; i < inputs; ++i )
            f.inputs.push_back( f.add_variable( 0, 1 ) );
        for ( std::size_t i = 0; i < relus; ++i )
            f.add_relu( f.add_variable(), f.add_variable(), 1 );
        return f;
    };
    std::vector<std::string> failures;
    auto expect = [&]( bool ok, const std::string &what ) {
        if ( !ok )
            failures.push_back( what );
    };

    VnnFormula wide = formula( 784, 300 );
    RunConfig run = default_run_config( wide, 8 );
    const SncConfig &c = run.snc;
    expect( c.initial_divides == 8, "N0" );
    expect( c.initial_timeout == 30.0, "T0" );
    expect( c.online_divides == 4, "N" );
    expect( c.timeout_factor == 1.5, "F" );
    expect( c.solver.branching_k_percent == 5.0, "k" );
    expect( run.per_relu_timeout == 2.0 && IterPropConfig{}.per_relu_timeout == 2.0, "per-ReLU timeout" );
    expect( c.solver.threshold_t == 20, "t for 784 inputs" );
    expect( resolve_strategy( c.strategy, wide ) == SplitStrategy::Relu, "strategy for 784 inputs" );

    VnnFormula narrow = formula( 5, 40 );
    SncConfig n = default_config( narrow, 3 );
    expect( n.solver.threshold_t == 1, "t for 5 inputs" );
    expect( n.initial_timeout == 4.0, "T0 for 40 ReLUs" );
    expect( n.initial_divides == 4, "N0 for 3 workers" );
    expect( resolve_strategy( n.strategy, narrow ) == SplitStrategy::Input, "strategy for 5 inputs" );
    expect( default_config( formula( 10, 300 ), 1 ).solver.threshold_t == 1, "t for 10 inputs" );
    expect( default_config( formula( 11, 300 ), 1 ).solver.threshold_t == 20, "t for 11 inputs" );

    std::string detail = "N0=8 T0=30 N=4 F=1.5 k=5 per-ReLU timeout 2 t=20/1";
    if ( !failures.empty() )
    {
        detail = "mismatched:";
        for ( const auto &f : failures )
            detail += " " + f;
    }
    return { failures.empty(), detail };
}

// Seeds whose one-worker run lands between 30 and 120 seconds on the
// reference machine; see calibrate_scaling.
struct ScalingCase
{
    std::uint64_t seed;
    std::size_t width;
};
const ScalingCase kScalingCases[] = { { 1, 17 }, { 2, 17 }, { 5, 17 }, { 16, 17 }, { 18, 17 } };

double median( std::vector<double> values )
{
    std::sort( values.begin(), values.end() );
    std::size_t m = values.size() / 2;
    return values.size() % 2 ? values[m] : 0.5 * ( values[m - 1] + values[m] );
}

Outcome scaling_smoke()
{
    std::vector<double> one, four;
    std::size_t verdictMismatches = 0, notUnsat = 0, outOfRange = 0;
    for ( const ScalingCase &c : kScalingCases )
    {
        VnnFormula f = testing::scaling_instance( c.seed, 5, 3, c.width, 0.25, 1.2 ).formula;
        std::map<std::size_t, RunOutcome> outcomes;
        for ( std::size_t workers : { 1u, 4u } )
        {
            RunConfig config = default_run_config( f, workers );
            config.snc.global_timeout = 600.0;
            outcomes[workers] = run_query( f, config );
            std::printf( "  scaling seed %llu workers %zu: %s in %.1fs\n", static_cast<unsigned long long>( c.seed ),
                         workers, std::string( to_string( outcomes[workers].result.verdict ) ).c_str(),
                         outcomes[workers].wall_seconds );
            std::fflush( stdout );
        }
        one.push_back( outcomes[1].wall_seconds );
        four.push_back( outcomes[4].wall_seconds );
        verdictMismatches += outcomes[1].result.verdict != outcomes[4].result.verdict;
        notUnsat += !outcomes[1].result.is_unsat();
        outOfRange += one.back() < 30.0 || one.back() > 120.0;
    }
    double m1 = median( one ), m4 = median( four );
    return { m4 <= 0.7 * m1 && verdictMismatches == 0 && notUnsat == 0,
             concat( "median 1 worker ", m1, "s, 4 workers ", m4, "s, ratio ", m4 / m1, " (needs <= 0.7), ",
                     verdictMismatches, " verdict mismatches, ", notUnsat, " not Unsat, ", outOfRange,
                     " outside 30-120s sequentially, ", std::thread::hardware_concurrency(), " hardware threads" ) };
}

Outcome simplex_kernel()
{
    Rng rng( 9000 );
    std::size_t disagreements = 0, feasible = 0, badAssignments = 0;
    for ( int i = 0; i < 1000; ++i )
    {
        testing::RandomLp lp = testing::random_lp( rng );
        LpResult r = lp_feasible( lp.rows, lp.bounds );
        bool exact = testing::fm_feasible( lp.rows, lp.bounds );
        disagreements += r.feasible() != exact;
        feasible += exact;
        if ( r.feasible() )
        {
            bool ok = true;
            for ( Var v = 0; v < lp.bounds.size(); ++v )
                ok = ok && lp.bounds.contains( v, r.assignment[v], 1e-6 );
            for ( const auto &row : lp.rows )
                ok = ok && row.holds( r.assignment, 1e-6 );
            badAssignments += !ok;
        }
    }

    std::uniform_int_distribution<int> step( -3, 3 );
    std::size_t warmMismatches = 0;
    for ( int i = 0; i < 1000; ++i )
    {
        testing::RandomLp lp = testing::random_lp( rng );
        SimplexState state( lp.rows, lp.bounds );
        state.check();
        Bounds changed = lp.bounds;
        for ( Var v = 0; v < changed.size(); ++v )
        {
            double lo = changed.lower( v ) + ( std::isfinite( changed.lower( v ) ) ? step( rng ) : 0 );
            double hi = changed.upper( v ) + ( std::isfinite( changed.upper( v ) ) ? step( rng ) : 0 );
            changed.set( v, lo, hi );
        }
        warmMismatches += lp_restore( state, changed ).feasible() != lp_feasible( lp.rows, changed ).feasible();
    }
    return { disagreements == 0 && badAssignments == 0 && warmMismatches == 0,
             concat( "1000 LPs (", feasible, " feasible), ", disagreements, " disagreements with exact elimination, ",
                     badAssignments, " bad assignments; 1000 perturbations, ", warmMismatches, " warm/cold mismatches" ) };
}

struct Criterion
{
    int number;
    const char *name;
    std::function<Outcome()> run;
};

} // namespace
} // namespace relusnc

int main( int argc, char **argv )
{
    using namespace relusnc;
    const std::vector<Criterion> criteria{
        { 1, "oracle agreement", oracle_agreement },
        { 2, "timeout fraction below 1/N", timeout_fraction },
        { 3, "partition exhaustiveness", partition_exhaustive },
        { 4, "polarity formula", polarity_formula },
        { 5, "direction repair example", repair_example },
        { 6, "iterative propagation equisatisfiability", iterprop_equisatisfiable },
        { 7, "defaults", defaults_fidelity },
        { 8, "parallel scaling", scaling_smoke },
        { 9, "simplex kernel", simplex_kernel },
    };

    std::vector<int> selected;
    for ( int i = 1; i < argc; ++i )
        selected.push_back( std::atoi( argv[i] ) );

    bool allPass = true;
    for ( const Criterion &c : criteria )
    {
        if ( !selected.empty() && std::find( selected.begin(), selected.end(), c.number ) == selected.end() )
            continue;
        auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try
        {
            outcome = c.run();
        }
        catch ( const std::exception &e )
        {
            outcome = { false, std::string( "exception: " ) + e.what() };
        }
        double seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
        allPass = allPass && outcome.pass;
        std::printf( "criterion %d %s: %s (%s; %.1fs)\n", c.number, outcome.pass ? "PASS" : "FAIL", c.name,
                     outcome.detail.c_str(), seconds );
        std::fflush( stdout );
    }
    return allPass ? 0 : 1;
}
