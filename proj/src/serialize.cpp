#include "relusnc/serialize.hpp"

#include "relusnc/error.hpp"
#include "text_util.hpp"

#include <istream>
#include <ostream>

namespace relusnc {

namespace {

using detail::format_double;

class TokenReader
{
public:
    TokenReader( std::istream &in, const std::string &source )
        : _in( in )
        , _source( source )
    {
    }

    std::vector<std::string_view> line()
    {
        while ( std::getline( _in, _buffer ) )
        {
            ++_line;
            auto tokens = detail::split_ws( _buffer );
            if ( !tokens.empty() && !tokens.front().starts_with( '#' ) )
                return tokens;
        }
        ++_line;
        fail( "unexpected end of input" );
    }

    // Line of the form "<keyword> args..." with exactly `args` arguments.
    std::vector<std::string_view> keyed( std::string_view keyword, std::size_t args )
    {
        auto tokens = line();
        if ( tokens.front() != keyword )
            fail( "expected '" + std::string( keyword ) + "', found '" + std::string( tokens.front() ) + "'" );
        if ( tokens.size() != args + 1 )
            fail( "'" + std::string( keyword ) + "' expects " + std::to_string( args ) + " argument(s)" );
        return tokens;
    }

    void header( std::string_view magic )
    {
        auto tokens = keyed( magic, 1 );
        auto version = detail::parse_size( tokens[1] );
        if ( !version || *version != static_cast<std::size_t>( kFormatVersion ) )
            fail( "unsupported " + std::string( magic ) + " version '" + std::string( tokens[1] ) + "'" );
    }

    double number( std::string_view token )
    {
        auto value = detail::parse_double( token );
        if ( !value )
            fail( "malformed number '" + std::string( token ) + "'" );
        return *value;
    }

    std::size_t count( std::string_view token )
    {
        auto value = detail::parse_size( token );
        if ( !value )
            fail( "malformed count '" + std::string( token ) + "'" );
        return *value;
    }

    std::vector<Var> var_list( std::string_view keyword, std::size_t limit )
    {
        auto tokens = line();
        if ( tokens.front() != keyword || tokens.size() < 2 )
            fail( "expected '" + std::string( keyword ) + " <count> ...'" );
        std::size_t n = count( tokens[1] );
        if ( tokens.size() != n + 2 )
            fail( "'" + std::string( keyword ) + "' lists a wrong number of variables" );
        std::vector<Var> vars;
        for ( std::size_t i = 0; i < n; ++i )
        {
            Var var = count( tokens[i + 2] );
            if ( var >= limit )
                fail( "variable " + std::to_string( var ) + " out of range" );
            vars.push_back( var );
        }
        return vars;
    }

    [[noreturn]] void fail( const std::string &message ) const { throw ParseError( _source, _line, message ); }

private:
    std::istream &_in;
    std::string _source;
    std::string _buffer;
    std::size_t _line = 0;
};

Relation parse_relation( TokenReader &reader, std::string_view token )
{
    if ( token == "<=" )
        return Relation::LessEq;
    if ( token == ">=" )
        return Relation::GreaterEq;
    if ( token == "=" )
        return Relation::Eq;
    reader.fail( "unknown relation '" + std::string( token ) + "'" );
}

Phase parse_phase( TokenReader &reader, std::string_view token )
{
    for ( Phase phase : { Phase::Unfixed, Phase::Active, Phase::Inactive } )
        if ( token == to_string( phase ) )
            return phase;
    reader.fail( "unknown phase '" + std::string( token ) + "'" );
}

void write_var_list( std::ostream &out, std::string_view keyword, const std::vector<Var> &vars )
{
    out << keyword << ' ' << vars.size();
    for ( Var var : vars )
        out << ' ' << var;
    out << '\n';
}

VnnFormula read_formula_body( TokenReader &reader )
{
    reader.header( "relusnc-formula" );
    VnnFormula formula;
    std::size_t vars = reader.count( reader.keyed( "vars", 1 )[1] );
    bool empty = reader.count( reader.keyed( "empty", 1 )[1] ) != 0;

    reader.keyed( "bounds", 0 );
    for ( std::size_t v = 0; v < vars; ++v )
    {
        auto tokens = reader.line();
        if ( tokens.size() != 2 )
            reader.fail( "bound line needs '<lower> <upper>'" );
        // Written verbatim: an empty-domain formula may hold crossed bounds.
        formula.add_variable();
        formula.bounds.set( v, reader.number( tokens[0] ), reader.number( tokens[1] ) );
    }
    if ( empty )
        formula.bounds.mark_empty();

    formula.inputs = reader.var_list( "inputs", vars );
    formula.outputs = reader.var_list( "outputs", vars );

    std::size_t rows = reader.count( reader.keyed( "linear", 1 )[1] );
    for ( std::size_t r = 0; r < rows; ++r )
    {
        auto tokens = reader.line();
        if ( tokens.size() < 3 )
            reader.fail( "linear row needs '<rel> <rhs> <nterms> ...'" );
        LinearConstraint row;
        row.relation = parse_relation( reader, tokens[0] );
        row.rhs = reader.number( tokens[1] );
        std::size_t terms = reader.count( tokens[2] );
        if ( tokens.size() != 3 + 2 * terms )
            reader.fail( "linear row lists a wrong number of terms" );
        for ( std::size_t t = 0; t < terms; ++t )
        {
            Var var = reader.count( tokens[3 + 2 * t] );
            if ( var >= vars )
                reader.fail( "variable " + std::to_string( var ) + " out of range" );
            row.terms.push_back( { var, reader.number( tokens[4 + 2 * t] ) } );
        }
        formula.linear.push_back( std::move( row ) );
    }

    std::size_t relus = reader.count( reader.keyed( "relus", 1 )[1] );
    for ( std::size_t r = 0; r < relus; ++r )
    {
        auto tokens = reader.line();
        if ( tokens.size() != 4 )
            reader.fail( "ReLU line needs '<backward> <forward> <phase> <rank>'" );
        ReluConstraint relu;
        relu.backward = reader.count( tokens[0] );
        relu.forward = reader.count( tokens[1] );
        relu.phase = parse_phase( reader, tokens[2] );
        relu.layer_rank = reader.count( tokens[3] );
        if ( relu.backward >= vars || relu.forward >= vars )
            reader.fail( "ReLU variable out of range" );
        formula.relus.push_back( relu );
    }
    reader.keyed( "end", 0 );

    try
    {
        formula.validate();
    }
    catch ( const PreconditionError &error )
    {
        reader.fail( std::string( "invalid formula: " ) + error.what() );
    }
    return formula;
}

} // namespace

void write_formula( std::ostream &out, const VnnFormula &formula )
{
    out << "relusnc-formula " << kFormatVersion << '\n';
    out << "vars " << formula.num_vars << '\n';
    out << "empty " << ( formula.bounds.empty() ? 1 : 0 ) << '\n';
    out << "bounds\n";
    for ( Var v = 0; v < formula.num_vars; ++v )
        out << format_double( formula.bounds.lower( v ) ) << ' ' << format_double( formula.bounds.upper( v ) )
            << '\n';
    write_var_list( out, "inputs", formula.inputs );
    write_var_list( out, "outputs", formula.outputs );

    out << "linear " << formula.linear.size() << '\n';
    for ( const auto &row : formula.linear )
    {
        out << to_string( row.relation ) << ' ' << format_double( row.rhs ) << ' ' << row.terms.size();
        for ( const auto &term : row.terms )
            out << ' ' << term.var << ' ' << format_double( term.coeff );
        out << '\n';
    }

    out << "relus " << formula.relus.size() << '\n';
    for ( const auto &relu : formula.relus )
        out << relu.backward << ' ' << relu.forward << ' ' << to_string( relu.phase ) << ' ' << relu.layer_rank
            << '\n';
    out << "end\n";
}

VnnFormula read_formula( std::istream &in, const std::string &source )
{
    TokenReader reader( in, source );
    return read_formula_body( reader );
}

void write_subquery( std::ostream &out, const SubQueryFile &file )
{
    out << "relusnc-subquery " << kFormatVersion << '\n';
    out << "id " << ( file.query.id.empty() ? "-" : file.query.id ) << '\n';
    out << "depth " << file.query.depth << '\n';
    out << "budget " << format_double( file.query.budget ) << '\n';
    out << "threshold " << file.threshold_t << '\n';
    out << "branching-k " << format_double( file.branching_k_percent ) << '\n';
    out << "direction " << to_string( file.direction ) << '\n';
    write_formula( out, file.query.formula );
    out << "end\n";
}

SubQueryFile read_subquery( std::istream &in, const std::string &source )
{
    TokenReader reader( in, source );
    reader.header( "relusnc-subquery" );

    SubQueryFile file;
    auto id = reader.keyed( "id", 1 )[1];
    file.query.id = id == "-" ? "" : std::string( id );
    file.query.depth = reader.count( reader.keyed( "depth", 1 )[1] );
    file.query.budget = reader.number( reader.keyed( "budget", 1 )[1] );
    if ( !( file.query.budget > 0.0 ) )
        reader.fail( "budget must be positive" );
    file.threshold_t = reader.count( reader.keyed( "threshold", 1 )[1] );
    file.branching_k_percent = reader.number( reader.keyed( "branching-k", 1 )[1] );

    auto direction = reader.keyed( "direction", 1 )[1];
    if ( direction == to_string( Direction::PolarityBased ) )
        file.direction = Direction::PolarityBased;
    else if ( direction == to_string( Direction::AlwaysInactiveFirst ) )
        file.direction = Direction::AlwaysInactiveFirst;
    else
        reader.fail( "unknown direction '" + std::string( direction ) + "'" );

    file.query.formula = read_formula_body( reader );
    reader.keyed( "end", 0 );
    return file;
}

void write_result( std::ostream &out, const QueryResult &result )
{
    out << "relusnc-result " << kFormatVersion << '\n';
    out << "verdict " << to_string( result.verdict ) << '\n';
    if ( result.is_sat() )
    {
        out << "witness " << result.witness.size();
        for ( double value : result.witness )
            out << ' ' << format_double( value );
        out << '\n';
    }
    out << "end\n";
}

QueryResult read_result( std::istream &in, const std::string &source )
{
    TokenReader reader( in, source );
    reader.header( "relusnc-result" );
    auto verdict = reader.keyed( "verdict", 1 )[1];

    QueryResult result;
    if ( verdict == "unsat" )
        result = QueryResult::unsat();
    else if ( verdict == "timeout" )
        result = QueryResult::timeout();
    else if ( verdict == "sat" )
    {
        auto tokens = reader.line();
        if ( tokens.front() != "witness" || tokens.size() < 2 )
            reader.fail( "sat result needs a witness line" );
        std::size_t n = reader.count( tokens[1] );
        if ( tokens.size() != n + 2 )
            reader.fail( "witness lists a wrong number of values" );
        Assignment witness;
        for ( std::size_t i = 0; i < n; ++i )
            witness.push_back( reader.number( tokens[i + 2] ) );
        result = QueryResult::sat( std::move( witness ) );
    }
    else
        reader.fail( "unknown verdict '" + std::string( verdict ) + "'" );

    reader.keyed( "end", 0 );
    return result;
}

} // namespace relusnc
