#pragma once

// NNet interchange format (the ACAS Xu network format).
//
//   // comment lines
//   numLayers, inputSize, outputSize, maxLayerSize,
//   layerSize_0, ..., layerSize_numLayers,
//   legacy flag (ignored),
//   input mins (inputSize values),
//   input maxs (inputSize values),
//   means (inputSize + 1 values, last one for the outputs),
//   ranges (inputSize + 1 values),
//   per layer: one weight row per neuron, then one bias row per neuron.

#include "relusnc/network.hpp"

#include <iosfwd>
#include <string>

namespace relusnc {

Network parse_nnet( const std::string &path );
Network parse_nnet( std::istream &in, const std::string &source = "<nnet>" );

void write_nnet( const Network &net, std::ostream &out );
void write_nnet( const Network &net, const std::string &path );

} // namespace relusnc
