#pragma once

// VNN formula data model: variables with interval bounds, linear constraints
// and ReLU constraints. Everything here is a plain value type.

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

namespace relusnc {

using Var = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Engine-wide feasibility tolerance.
inline constexpr double kFeasibilityTolerance = 1e-7;

enum class Relation { LessEq, GreaterEq, Eq };

std::string_view to_string( Relation relation );

struct Term
{
    Var var;
    double coeff;

    bool operator==( const Term & ) const = default;
};

struct LinearConstraint
{
    std::vector<Term> terms;
    Relation relation = Relation::Eq;
    double rhs = 0.0;

    double evaluate( const std::vector<double> &values ) const;
    bool holds( const std::vector<double> &values, double tol ) const;

    bool operator==( const LinearConstraint & ) const = default;
};

// Merges duplicate variables and drops zero coefficients. Throws
// PreconditionError when nothing is left.
LinearConstraint normalized( LinearConstraint constraint );

enum class Phase { Unfixed, Active, Inactive };

std::string_view to_string( Phase phase );
Phase flipped( Phase phase );

struct ReluConstraint
{
    Var backward;
    Var forward;
    Phase phase = Phase::Unfixed;
    std::size_t layer_rank = 0;

    bool operator==( const ReluConstraint & ) const = default;
};

class Bounds
{
public:
    Bounds() = default;
    explicit Bounds( std::size_t count );

    std::size_t size() const { return _lower.size(); }
    Var add_variable( double lower = -kInfinity, double upper = kInfinity );

    double lower( Var var ) const { return _lower[var]; }
    double upper( Var var ) const { return _upper[var]; }

    // Unconditional overwrite. Marks the domain empty if lower > upper + tol.
    void set( Var var, double lower, double upper );

    // Intersect with [value, +inf) / (-inf, value]. Return true when the
    // bound moved. A crossing within the feasibility tolerance is snapped to
    // a point; a larger crossing sets the empty marker.
    bool tighten_lower( Var var, double value );
    bool tighten_upper( Var var, double value );

    bool empty() const { return _empty; }
    void mark_empty() { _empty = true; }

    bool contains( Var var, double value, double tol ) const;

    bool operator==( const Bounds & ) const = default;

private:
    void settle( Var var );

    std::vector<double> _lower;
    std::vector<double> _upper;
    bool _empty = false;
};

using Assignment = std::vector<double>;

struct VnnFormula
{
    std::size_t num_vars = 0;
    Bounds bounds;
    std::vector<LinearConstraint> linear;
    std::vector<ReluConstraint> relus;
    std::vector<Var> inputs;
    std::vector<Var> outputs;

    Var add_variable( double lower = -kInfinity, double upper = kInfinity );
    void add_linear( LinearConstraint constraint );
    std::size_t add_relu( Var backward, Var forward, std::size_t layer_rank );

    std::size_t unfixed_count() const;
    std::vector<std::size_t> unfixed_relus() const;

    // Throws PreconditionError describing the first broken invariant.
    void validate() const;

    bool operator==( const VnnFormula & ) const = default;
};

enum class Verdict { Sat, Unsat, Timeout };

std::string_view to_string( Verdict verdict );

struct QueryResult
{
    Verdict verdict = Verdict::Unsat;
    Assignment witness; // populated only for Sat

    static QueryResult sat( Assignment witness ) { return { Verdict::Sat, std::move( witness ) }; }
    static QueryResult unsat() { return { Verdict::Unsat, {} }; }
    static QueryResult timeout() { return { Verdict::Timeout, {} }; }

    bool is_sat() const { return verdict == Verdict::Sat; }
    bool is_unsat() const { return verdict == Verdict::Unsat; }
    bool is_timeout() const { return verdict == Verdict::Timeout; }
};

// True iff every bound, linear constraint and ReLU of the formula holds
// within tol. A wrong-length assignment or an empty domain yields false.
bool check_assignment( const VnnFormula &formula, const Assignment &assignment, double tol );

// (a + b) / (b - a) for backward bounds a < 0 < b, both finite.
double polarity( const ReluConstraint &relu, const Bounds &bounds );
double polarity( double lower, double upper );

// Polarity extended to infinite or one-sided bounds by its limit value.
// Used by heuristics that must rank every ReLU.
double polarity_score( double lower, double upper );

// Copy of the formula with ReLU #relu_index fixed to phase.
//   Inactive: upper(r_b) <= 0, r_f pinned to 0.
//   Active:   lower(r_b) >= 0, new row r_b - r_f = 0.
VnnFormula fix_relu( const VnnFormula &formula, std::size_t relu_index, Phase phase );

// In-place variant used by propagation and partitioning.
void apply_phase( VnnFormula &formula, std::size_t relu_index, Phase phase );

} // namespace relusnc
