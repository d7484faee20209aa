#include "relusnc/nnet.hpp"

#include "relusnc/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace relusnc {

namespace {

class NnetReader
{
public:
    NnetReader( std::istream &in, const std::string &source )
        : _in( in )
        , _source( source )
    {
    }

    // Next data row as numbers; `what` names the row in the EOF diagnostic.
    std::vector<double> row( const std::string &what )
    {
        std::string line;
        while ( std::getline( _in, line ) )
        {
            ++_line;
            std::string_view view = detail::trim( line );
            if ( view.empty() || view.starts_with( "//" ) )
                continue;

            std::vector<double> values;
            for ( std::string_view token : detail::split( view, ',' ) )
            {
                token = detail::trim( token );
                if ( token.empty() )
                    continue;
                auto number = detail::parse_double( token );
                if ( !number )
                    fail( "non-numeric token '" + std::string( token ) + "' in " + what );
                values.push_back( *number );
            }
            if ( values.empty() )
                fail( "empty row where " + what + " was expected" );
            return values;
        }
        ++_line;
        fail( "unexpected end of file: missing " + what );
    }

    std::vector<double> row( const std::string &what, std::size_t expected )
    {
        auto values = row( what );
        if ( values.size() != expected )
            fail( what + " has " + std::to_string( values.size() ) + " values, expected " +
                  std::to_string( expected ) );
        return values;
    }

    bool has_more_data()
    {
        std::string line;
        while ( std::getline( _in, line ) )
        {
            ++_line;
            std::string_view view = detail::trim( line );
            if ( !view.empty() && !view.starts_with( "//" ) )
                return true;
        }
        return false;
    }

    [[noreturn]] void fail( const std::string &message ) const { throw ParseError( _source, _line, message ); }

    std::size_t count( double value, const std::string &what ) const
    {
        if ( value < 0 || value != static_cast<double>( static_cast<std::size_t>( value ) ) )
            fail( what + " must be a non-negative integer" );
        return static_cast<std::size_t>( value );
    }

private:
    std::istream &_in;
    std::string _source;
    std::size_t _line = 0;
};

} // namespace

Network parse_nnet( std::istream &in, const std::string &source )
{
    NnetReader reader( in, source );
    Network net;

    auto header = reader.row( "header (numLayers, inputSize, outputSize, maxLayerSize)" );
    if ( header.size() < 4 )
        reader.fail( "header needs 4 values, found " + std::to_string( header.size() ) );
    std::size_t numLayers = reader.count( header[0], "numLayers" );
    std::size_t inputSize = reader.count( header[1], "inputSize" );
    std::size_t outputSize = reader.count( header[2], "outputSize" );
    std::size_t maxLayerSize = reader.count( header[3], "maxLayerSize" );
    if ( numLayers < 1 )
        reader.fail( "numLayers must be at least 1" );

    auto sizes = reader.row( "layer sizes", numLayers + 1 );
    for ( double size : sizes )
    {
        std::size_t layer = reader.count( size, "layer size" );
        if ( layer == 0 )
            reader.fail( "layer size must be positive" );
        if ( layer > maxLayerSize )
            reader.fail( "layer size " + std::to_string( layer ) + " exceeds maxLayerSize " +
                         std::to_string( maxLayerSize ) );
        net.layer_sizes.push_back( layer );
    }
    if ( net.layer_sizes.front() != inputSize )
        reader.fail( "first layer size does not match inputSize" );
    if ( net.layer_sizes.back() != outputSize )
        reader.fail( "last layer size does not match outputSize" );

    reader.row( "legacy flag row" );
    net.input_mins = reader.row( "input minimums", inputSize );
    net.input_maxs = reader.row( "input maximums", inputSize );

    auto means = reader.row( "normalization means", inputSize + 1 );
    auto ranges = reader.row( "normalization ranges", inputSize + 1 );
    Normalization norm;
    norm.input_means.assign( means.begin(), means.end() - 1 );
    norm.input_ranges.assign( ranges.begin(), ranges.end() - 1 );
    norm.output_mean = means.back();
    norm.output_range = ranges.back();
    net.normalization = std::move( norm );

    for ( std::size_t l = 1; l <= numLayers; ++l )
    {
        std::string layer = "layer " + std::to_string( l );
        std::size_t rows = net.layer_sizes[l];
        std::size_t cols = net.layer_sizes[l - 1];

        std::vector<std::vector<double>> weights;
        for ( std::size_t r = 0; r < rows; ++r )
            weights.push_back(
                reader.row( "weight row " + std::to_string( r ) + " of " + layer, cols ) );

        std::vector<double> biases;
        for ( std::size_t r = 0; r < rows; ++r )
            biases.push_back( reader.row( "bias row " + std::to_string( r ) + " of " + layer, 1 ).front() );

        net.weights.push_back( std::move( weights ) );
        net.biases.push_back( std::move( biases ) );
    }

    if ( reader.has_more_data() )
        reader.fail( "trailing data after the last layer" );

    net.validate();
    return net;
}

Network parse_nnet( const std::string &path )
{
    std::ifstream in( path );
    if ( !in )
        throw Error( "cannot open network file '" + path + "'" );
    return parse_nnet( in, path );
}

void write_nnet( const Network &net, std::ostream &out )
{
    net.validate();
    auto list = [&out]( const std::vector<double> &values ) {
        for ( double value : values )
            out << detail::format_double( value ) << ',';
        out << '\n';
    };

    std::size_t maxLayer = 0;
    for ( std::size_t size : net.layer_sizes )
        maxLayer = std::max( maxLayer, size );

    out << "// relusnc network\n";
    out << net.layer_sizes.size() - 1 << ',' << net.input_size() << ',' << net.output_size() << ',' << maxLayer
        << ",\n";
    for ( std::size_t size : net.layer_sizes )
        out << size << ',';
    out << "\n0,\n";
    list( net.input_mins );
    list( net.input_maxs );

    Normalization norm;
    if ( net.normalization )
        norm = *net.normalization;
    else
    {
        norm.input_means.assign( net.input_size(), 0.0 );
        norm.input_ranges.assign( net.input_size(), 1.0 );
    }
    auto means = norm.input_means;
    means.push_back( norm.output_mean );
    auto ranges = norm.input_ranges;
    ranges.push_back( norm.output_range );
    list( means );
    list( ranges );

    for ( std::size_t l = 0; l < net.weights.size(); ++l )
    {
        for ( const auto &row : net.weights[l] )
            list( row );
        for ( double bias : net.biases[l] )
            list( { bias } );
    }
}

void write_nnet( const Network &net, const std::string &path )
{
    std::ofstream out( path );
    if ( !out )
        throw Error( "cannot write network file '" + path + "'" );
    write_nnet( net, out );
}

} // namespace relusnc
