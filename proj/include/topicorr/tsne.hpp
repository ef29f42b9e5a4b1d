#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace topicorr {

struct TsneParams {
    std::size_t out_dim = 300;
    // Defaults to min(5, floor((n - 1) / 3)).
    std::optional<double> perplexity;
    int iterations = 1000;
    double learning_rate = 100.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    std::uint64_t seed = 1;
    bool record_kl = false;
};

struct TsneResult {
    std::vector<std::vector<double>> points;
    bool passthrough = false;  // fewer than 5 inputs; points are the inputs
    double perplexity = 0.0;
    // Per-point entropy (bits) of the calibrated conditional affinities.
    std::vector<double> entropies;
    // kl_trace[t] = KL(P||Q) after t iterations, when record_kl is set.
    std::vector<double> kl_trace;
};

double default_perplexity(std::size_t n) noexcept;

// Conditional Gaussian affinities p_{j|i}, row-major n x n, each row
// calibrated by bisection on the precision so that its entropy equals
// log2(perplexity). `entropies` receives the achieved per-row entropies.
std::vector<double> calibrate_affinities(const std::vector<std::vector<double>>& points, double perplexity,
                                         std::vector<double>* entropies = nullptr);

// Exact t-SNE without early exaggeration. Output is mean-centered and index
// aligned with the input. Throws Error on ragged or non-finite input.
TsneResult tsne_reduce(const std::vector<std::vector<double>>& vectors, const TsneParams& params = {});

// KL(P||Q) for joint affinities P (n x n) and a layout Y.
double tsne_kl(const std::vector<double>& joint_p, const std::vector<std::vector<double>>& layout);

}  // namespace topicorr
