#include "relusnc/property.hpp"

#include "relusnc/error.hpp"
#include "text_util.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

namespace relusnc {

bool PropertyConstraint::only( VarKind kind ) const
{
    for ( const auto &term : terms )
        if ( term.kind != kind )
            return false;
    return true;
}

std::vector<PropertyConstraint> PropertySpec::input_constraints() const
{
    std::vector<PropertyConstraint> result;
    for ( const auto &constraint : constraints )
        if ( constraint.only( VarKind::Input ) )
            result.push_back( constraint );
    return result;
}

std::vector<PropertyConstraint> PropertySpec::output_constraints() const
{
    std::vector<PropertyConstraint> result;
    for ( const auto &constraint : constraints )
        if ( constraint.only( VarKind::Output ) )
            result.push_back( constraint );
    return result;
}

namespace {

class LineScanner
{
public:
    LineScanner( std::string_view text, const std::string &source, std::size_t line )
        : _text( text )
        , _source( source )
        , _line( line )
    {
    }

    PropertyConstraint constraint()
    {
        PropertyConstraint result;
        result.line = _line;

        skip_space();
        while ( !at_relation() )
        {
            if ( done() )
                fail( "missing relation (<=, >= or =)" );
            result.terms.push_back( term( result.terms.empty() ) );
            skip_space();
        }
        if ( result.terms.empty() )
            fail( "constraint has no variable terms" );

        result.relation = relation();
        skip_space();
        auto rhs = number_token();
        if ( !rhs )
            fail( "missing right-hand side" );
        result.rhs = *rhs;
        skip_space();
        if ( !done() )
            fail( "unexpected text '" + std::string( _text.substr( _pos ) ) + "' after right-hand side" );
        return result;
    }

private:
    PropertyTerm term( bool first )
    {
        double sign = 1.0;
        bool explicitSign = false;
        if ( peek() == '+' || peek() == '-' )
        {
            sign = peek() == '-' ? -1.0 : 1.0;
            explicitSign = true;
            ++_pos;
            skip_space();
        }
        if ( !first && !explicitSign )
            fail( "terms after the first need an explicit sign" );

        double coeff = 1.0;
        if ( std::isdigit( static_cast<unsigned char>( peek() ) ) || peek() == '.' )
        {
            auto value = number_token();
            if ( !value )
                fail( "malformed coefficient" );
            coeff = *value;
            skip_space();
            if ( peek() == '*' )
            {
                ++_pos;
                skip_space();
            }
        }

        char prefix = peek();
        if ( !std::isalpha( static_cast<unsigned char>( prefix ) ) )
            fail( "expected a variable name" );
        std::size_t start = _pos;
        ++_pos;
        while ( std::isalnum( static_cast<unsigned char>( peek() ) ) || peek() == '_' )
            ++_pos;
        std::string_view name = _text.substr( start, _pos - start );

        VarKind kind;
        if ( prefix == 'x' )
            kind = VarKind::Input;
        else if ( prefix == 'y' )
            kind = VarKind::Output;
        else
            fail( "unknown variable prefix in '" + std::string( name ) + "' (expected x or y)" );

        auto index = detail::parse_size( name.substr( 1 ) );
        if ( !index )
            fail( "malformed variable index in '" + std::string( name ) + "'" );
        return { kind, *index, sign * coeff };
    }

    Relation relation()
    {
        std::string_view rest = _text.substr( _pos );
        if ( rest.starts_with( "<=" ) )
        {
            _pos += 2;
            return Relation::LessEq;
        }
        if ( rest.starts_with( ">=" ) )
        {
            _pos += 2;
            return Relation::GreaterEq;
        }
        if ( rest.starts_with( "==" ) )
        {
            _pos += 2;
            return Relation::Eq;
        }
        if ( rest.starts_with( "=" ) )
        {
            ++_pos;
            return Relation::Eq;
        }
        fail( "unsupported relation (strict inequalities are not allowed)" );
    }

    std::optional<double> number_token()
    {
        std::size_t start = _pos;
        if ( peek() == '+' || peek() == '-' )
            ++_pos;
        while ( std::isdigit( static_cast<unsigned char>( peek() ) ) || peek() == '.' )
            ++_pos;
        if ( ( peek() == 'e' || peek() == 'E' ) && _pos > start )
        {
            std::size_t save = _pos;
            ++_pos;
            if ( peek() == '+' || peek() == '-' )
                ++_pos;
            if ( std::isdigit( static_cast<unsigned char>( peek() ) ) )
                while ( std::isdigit( static_cast<unsigned char>( peek() ) ) )
                    ++_pos;
            else
                _pos = save;
        }
        auto value = detail::parse_double( _text.substr( start, _pos - start ) );
        if ( !value )
            _pos = start;
        return value;
    }

    bool at_relation() const
    {
        char c = peek();
        return c == '<' || c == '>' || c == '=';
    }

    void skip_space()
    {
        while ( peek() == ' ' || peek() == '\t' )
            ++_pos;
    }

    char peek() const { return _pos < _text.size() ? _text[_pos] : '\0'; }
    bool done() const { return _pos >= _text.size(); }

    [[noreturn]] void fail( const std::string &message ) const { throw ParseError( _source, _line, message ); }

    std::string_view _text;
    const std::string &_source;
    std::size_t _line;
    std::size_t _pos = 0;
};

} // namespace

PropertySpec parse_property( std::istream &in, const std::string &source )
{
    PropertySpec spec;
    std::string line;
    std::size_t number = 0;
    while ( std::getline( in, line ) )
    {
        ++number;
        std::string_view view = line;
        auto comment = view.find( "//" );
        if ( comment != std::string_view::npos )
            view = view.substr( 0, comment );
        view = detail::trim( view );
        if ( view.empty() )
            continue;
        spec.constraints.push_back( LineScanner( view, source, number ).constraint() );
    }
    return spec;
}

PropertySpec parse_property( const std::string &path )
{
    std::ifstream in( path );
    if ( !in )
        throw Error( "cannot open property file '" + path + "'" );
    return parse_property( in, path );
}

PropertySpec parse_property_text( const std::string &text, const std::string &source )
{
    std::istringstream in( text );
    return parse_property( in, source );
}

VnnFormula encode_property( const Network &net, const PropertySpec &spec )
{
    VnnFormula formula = encode_network( net );

    for ( const auto &constraint : spec.constraints )
    {
        LinearConstraint row{ {}, constraint.relation, constraint.rhs };
        for ( const auto &term : constraint.terms )
        {
            const auto &vars = term.kind == VarKind::Input ? formula.inputs : formula.outputs;
            if ( term.index >= vars.size() )
                throw PreconditionError( "property line " + std::to_string( constraint.line ) + ": " +
                                         ( term.kind == VarKind::Input ? "x" : "y" ) +
                                         std::to_string( term.index ) + " is out of range (network has " +
                                         std::to_string( vars.size() ) + ")" );
            row.terms.push_back( { vars[term.index], term.coeff } );
        }
        row = normalized( std::move( row ) );

        if ( row.terms.size() > 1 )
        {
            formula.add_linear( std::move( row ) );
            continue;
        }

        // c * v (rel) rhs as a bound on v.
        Var var = row.terms.front().var;
        double coeff = row.terms.front().coeff;
        double limit = row.rhs / coeff;
        Relation relation = row.relation;
        if ( coeff < 0 && relation != Relation::Eq )
            relation = relation == Relation::LessEq ? Relation::GreaterEq : Relation::LessEq;
        if ( relation != Relation::LessEq )
            formula.bounds.tighten_lower( var, limit );
        if ( relation != Relation::GreaterEq )
            formula.bounds.tighten_upper( var, limit );
    }
    return formula;
}

} // namespace relusnc
