#pragma once

// Fully-connected ReLU networks: concrete evaluation and encoding into VNN
// formulas.

#include "relusnc/formula.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace relusnc {

struct Normalization
{
    std::vector<double> input_means;
    std::vector<double> input_ranges;
    double output_mean = 0.0;
    double output_range = 1.0;
};

struct Network
{
    // Input layer first. weights[l] maps layer l to layer l+1 and has
    // layer_sizes[l+1] rows of layer_sizes[l] entries.
    std::vector<std::size_t> layer_sizes;
    std::vector<std::vector<std::vector<double>>> weights;
    std::vector<std::vector<double>> biases;
    std::vector<double> input_mins;
    std::vector<double> input_maxs;
    std::optional<Normalization> normalization;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }
    std::size_t hidden_layers() const { return layer_sizes.size() - 2; }
    std::size_t hidden_neurons() const;

    void validate() const;
};

// Network whose raw-input semantics include the stored normalization:
// inputs are shifted/scaled before the first layer and outputs are mapped
// back afterwards. Returns the network unchanged when none is stored.
Network with_normalization_folded( const Network &net );

std::vector<double> evaluate( const Network &net, const std::vector<double> &input );

// Per-layer post-activation values (input layer included, outputs last).
std::vector<std::vector<double>> evaluate_layers( const Network &net, const std::vector<double> &input );

// Variable layout: inputs, then per hidden layer its backward variables
// followed by its forward variables, then outputs. Hidden layer index is the
// ReLU layer_rank.
VnnFormula encode_network( const Network &net );

// Assignment of every encoding variable induced by a concrete input.
Assignment induced_assignment( const Network &net, const std::vector<double> &input );

enum class OutputSide
{
    Upper, // y_k >= b_k + epsilon
    Lower  // y_k <= b_k - epsilon
};

// Local robustness query: input box [a_i - delta, a_i + delta] clipped to the
// declared input range, output bound on y_k. UNSAT certifies robustness on
// that side.
VnnFormula encode_robustness_query( const Network &net,
                                    const std::vector<double> &center,
                                    double delta,
                                    std::size_t output_index,
                                    double baseline,
                                    double epsilon,
                                    OutputSide side = OutputSide::Upper );

} // namespace relusnc
