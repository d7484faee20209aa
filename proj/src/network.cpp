#include "relusnc/network.hpp"

#include "relusnc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace relusnc {

std::size_t Network::hidden_neurons() const
{
    std::size_t count = 0;
    for ( std::size_t l = 1; l + 1 < layer_sizes.size(); ++l )
        count += layer_sizes[l];
    return count;
}

void Network::validate() const
{
    if ( layer_sizes.size() < 2 )
        throw PreconditionError( "network needs at least an input and an output layer" );
    for ( std::size_t size : layer_sizes )
        if ( size == 0 )
            throw PreconditionError( "network layer of size zero" );
    if ( weights.size() != layer_sizes.size() - 1 || biases.size() != layer_sizes.size() - 1 )
        throw PreconditionError( "network has wrong number of weight or bias layers" );

    for ( std::size_t l = 0; l + 1 < layer_sizes.size(); ++l )
    {
        if ( weights[l].size() != layer_sizes[l + 1] )
            throw PreconditionError( "weight matrix of layer " + std::to_string( l + 1 ) + " has " +
                                     std::to_string( weights[l].size() ) + " rows, expected " +
                                     std::to_string( layer_sizes[l + 1] ) );
        for ( const auto &row : weights[l] )
            if ( row.size() != layer_sizes[l] )
                throw PreconditionError( "weight row of layer " + std::to_string( l + 1 ) + " has " +
                                         std::to_string( row.size() ) + " entries, expected " +
                                         std::to_string( layer_sizes[l] ) );
        if ( biases[l].size() != layer_sizes[l + 1] )
            throw PreconditionError( "bias vector of layer " + std::to_string( l + 1 ) + " has wrong size" );
    }

    if ( input_mins.size() != input_size() || input_maxs.size() != input_size() )
        throw PreconditionError( "input range vectors do not match the input size" );
    for ( std::size_t i = 0; i < input_size(); ++i )
        if ( input_mins[i] > input_maxs[i] )
            throw PreconditionError( "input " + std::to_string( i ) + " has min > max" );

    if ( normalization )
    {
        if ( normalization->input_means.size() != input_size() ||
             normalization->input_ranges.size() != input_size() )
            throw PreconditionError( "normalization vectors do not match the input size" );
    }
}

Network with_normalization_folded( const Network &net )
{
    net.validate();
    if ( !net.normalization )
        return net;

    const Normalization &norm = *net.normalization;
    Network folded = net;
    folded.normalization.reset();

    // W (x - m) / r + b  ==  (W / r) x + (b - W m / r)
    auto &first = folded.weights.front();
    auto &firstBias = folded.biases.front();
    for ( std::size_t row = 0; row < first.size(); ++row )
    {
        for ( std::size_t col = 0; col < first[row].size(); ++col )
        {
            double range = norm.input_ranges[col];
            if ( range == 0.0 )
                throw PreconditionError( "normalization range of input " + std::to_string( col ) + " is zero" );
            firstBias[row] -= first[row][col] * norm.input_means[col] / range;
            first[row][col] /= range;
        }
    }

    auto &last = folded.weights.back();
    auto &lastBias = folded.biases.back();
    for ( std::size_t row = 0; row < last.size(); ++row )
    {
        for ( double &weight : last[row] )
            weight *= norm.output_range;
        lastBias[row] = lastBias[row] * norm.output_range + norm.output_mean;
    }
    return folded;
}

std::vector<std::vector<double>> evaluate_layers( const Network &net, const std::vector<double> &input )
{
    if ( input.size() != net.input_size() )
        throw PreconditionError( "input has " + std::to_string( input.size() ) + " entries, network expects " +
                                 std::to_string( net.input_size() ) );

    std::vector<std::vector<double>> layers{ input };
    for ( std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l )
    {
        const auto &previous = layers.back();
        bool hidden = l + 2 < net.layer_sizes.size();
        std::vector<double> next( net.layer_sizes[l + 1] );
        for ( std::size_t n = 0; n < next.size(); ++n )
        {
            double sum = net.biases[l][n];
            for ( std::size_t p = 0; p < previous.size(); ++p )
                sum += net.weights[l][n][p] * previous[p];
            next[n] = hidden ? std::max( 0.0, sum ) : sum;
        }
        layers.push_back( std::move( next ) );
    }
    return layers;
}

std::vector<double> evaluate( const Network &net, const std::vector<double> &input )
{
    return evaluate_layers( net, input ).back();
}

namespace {

// Variable ids of the encoding, shared by encode_network and
// induced_assignment.
struct Layout
{
    std::vector<std::vector<Var>> backward; // per non-input layer
    std::vector<std::vector<Var>> forward;  // per layer; input and output layers included
    std::size_t num_vars = 0;

    explicit Layout( const Network &net )
    {
        std::size_t layers = net.layer_sizes.size();
        backward.resize( layers );
        forward.resize( layers );
        Var next = 0;
        for ( std::size_t i = 0; i < net.input_size(); ++i )
            forward[0].push_back( next++ );
        for ( std::size_t l = 1; l + 1 < layers; ++l )
        {
            for ( std::size_t n = 0; n < net.layer_sizes[l]; ++n )
                backward[l].push_back( next++ );
            for ( std::size_t n = 0; n < net.layer_sizes[l]; ++n )
                forward[l].push_back( next++ );
        }
        for ( std::size_t o = 0; o < net.output_size(); ++o )
            forward[layers - 1].push_back( next++ );
        num_vars = next;
    }
};

} // namespace

VnnFormula encode_network( const Network &net )
{
    net.validate();
    Layout layout( net );
    std::size_t layers = net.layer_sizes.size();

    VnnFormula formula;
    for ( Var var = 0; var < layout.num_vars; ++var )
        formula.add_variable();

    for ( std::size_t i = 0; i < net.input_size(); ++i )
    {
        Var input = layout.forward[0][i];
        formula.bounds.set( input, net.input_mins[i], net.input_maxs[i] );
        formula.inputs.push_back( input );
    }

    for ( std::size_t l = 1; l < layers; ++l )
    {
        bool hidden = l + 1 < layers;
        for ( std::size_t n = 0; n < net.layer_sizes[l]; ++n )
        {
            Var target = hidden ? layout.backward[l][n] : layout.forward[l][n];

            // target - sum_p w_p * prev_p = bias
            LinearConstraint row{ { { target, 1.0 } }, Relation::Eq, net.biases[l - 1][n] };
            for ( std::size_t p = 0; p < net.layer_sizes[l - 1]; ++p )
            {
                double weight = net.weights[l - 1][n][p];
                if ( weight != 0.0 )
                    row.terms.push_back( { layout.forward[l - 1][p], -weight } );
            }
            formula.add_linear( std::move( row ) );

            if ( hidden )
            {
                Var forward = layout.forward[l][n];
                formula.bounds.tighten_lower( forward, 0.0 );
                formula.add_relu( target, forward, l - 1 );
            }
        }
    }

    formula.outputs = layout.forward[layers - 1];
    return formula;
}

Assignment induced_assignment( const Network &net, const std::vector<double> &input )
{
    Layout layout( net );
    std::size_t layers = net.layer_sizes.size();
    auto values = evaluate_layers( net, input );

    Assignment assignment( layout.num_vars, 0.0 );
    for ( std::size_t l = 0; l < layers; ++l )
    {
        for ( std::size_t n = 0; n < net.layer_sizes[l]; ++n )
            assignment[layout.forward[l][n]] = values[l][n];
        if ( l == 0 || l + 1 == layers )
            continue;
        for ( std::size_t n = 0; n < net.layer_sizes[l]; ++n )
        {
            double sum = net.biases[l - 1][n];
            for ( std::size_t p = 0; p < net.layer_sizes[l - 1]; ++p )
                sum += net.weights[l - 1][n][p] * values[l - 1][p];
            assignment[layout.backward[l][n]] = sum;
        }
    }
    return assignment;
}

VnnFormula encode_robustness_query( const Network &net,
                                    const std::vector<double> &center,
                                    double delta,
                                    std::size_t output_index,
                                    double baseline,
                                    double epsilon,
                                    OutputSide side )
{
    if ( center.size() != net.input_size() )
        throw PreconditionError( "robustness center has " + std::to_string( center.size() ) +
                                 " entries, network has " + std::to_string( net.input_size() ) + " inputs" );
    if ( output_index >= net.output_size() )
        throw PreconditionError( "output index " + std::to_string( output_index ) + " out of range" );
    if ( delta < 0.0 || epsilon < 0.0 )
        throw PreconditionError( "delta and epsilon must be non-negative" );

    VnnFormula formula = encode_network( net );
    for ( std::size_t i = 0; i < center.size(); ++i )
    {
        Var input = formula.inputs[i];
        formula.bounds.tighten_lower( input, center[i] - delta );
        formula.bounds.tighten_upper( input, center[i] + delta );
    }

    Var output = formula.outputs[output_index];
    if ( side == OutputSide::Upper )
        formula.bounds.tighten_lower( output, baseline + epsilon );
    else
        formula.bounds.tighten_upper( output, baseline - epsilon );
    return formula;
}

} // namespace relusnc
