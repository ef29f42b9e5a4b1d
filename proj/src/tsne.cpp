#include "topicorr/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topicorr/error.hpp"
#include "topicorr/rng.hpp"

namespace topicorr {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Fills row with p_{j|i} for precision beta and returns its entropy in bits.
double conditional_row(const std::vector<double>& dist, std::size_t self, double beta, std::vector<double>& row) {
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < dist.size(); ++j)
        if (j != self) d_min = std::min(d_min, dist[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        row[j] = j == self ? 0.0 : std::exp(-beta * (dist[j] - d_min));
        sum += row[j];
    }
    double h = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        row[j] /= sum;
        if (row[j] > 0.0) h -= row[j] * std::log2(row[j]);
    }
    return h;
}

}  // namespace

double default_perplexity(std::size_t n) noexcept {
    const double rule = std::floor((static_cast<double>(n) - 1.0) / 3.0);
    return std::max(1.0, std::min(5.0, rule));
}

std::vector<double> calibrate_affinities(const std::vector<std::vector<double>>& points, double perplexity,
                                         std::vector<double>* entropies) {
    const std::size_t n = points.size();
    std::vector<double> cond(n * n, 0.0);
    if (entropies) entropies->assign(n, 0.0);
    if (n < 2) return cond;
    const double target = std::log2(perplexity);

    std::vector<double> dist(n), row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) dist[j] = j == i ? 0.0 : squared_distance(points[i], points[j]);

        // Entropy decreases monotonically in beta. Bracket, then bisect.
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        double beta = 1.0;
        double h = conditional_row(dist, i, beta, row);
        if (target >= std::log2(static_cast<double>(n - 1))) {
            beta = 0.0;
            h = conditional_row(dist, i, beta, row);
        } else {
            for (int step = 0; step < 2000 && std::abs(h - target) > 1e-12; ++step) {
                if (h > target) {
                    lo = beta;
                    beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
                } else {
                    hi = beta;
                    beta = 0.5 * (lo + beta);
                }
                if (!std::isinf(hi) && hi - lo <= hi * 1e-15) break;
                h = conditional_row(dist, i, beta, row);
            }
        }
        std::copy(row.begin(), row.end(), cond.begin() + static_cast<std::ptrdiff_t>(i * n));
        if (entropies) (*entropies)[i] = h;
    }
    return cond;
}

double tsne_kl(const std::vector<double>& joint_p, const std::vector<std::vector<double>>& layout) {
    const std::size_t n = layout.size();
    std::vector<double> num(n * n, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) z += num[i * n + j] = 1.0 / (1.0 + squared_distance(layout[i], layout[j]));
    double kl = 0.0;
    for (std::size_t k = 0; k < n * n; ++k) {
        const double p = joint_p[k];
        if (p > 0.0) kl += p * std::log(p / (num[k] / z));
    }
    return kl;
}

TsneResult tsne_reduce(const std::vector<std::vector<double>>& vectors, const TsneParams& params) {
    TsneResult result;
    const std::size_t n = vectors.size();
    if (params.out_dim < 1) throw Error("t-SNE output dimension must be at least 1");
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) throw Error("t-SNE inputs must all have the same length");
        for (double x : v)
            if (!std::isfinite(x)) throw Error("t-SNE input has a non-finite component");
    }
    if (n < 5) {
        result.points = vectors;
        result.passthrough = true;
        return result;
    }

    result.perplexity = params.perplexity.value_or(default_perplexity(n));
    if (!(result.perplexity >= 1.0)) throw Error("t-SNE perplexity must be at least 1");
    const auto cond = calibrate_affinities(vectors, result.perplexity, &result.entropies);

    std::vector<double> p(n * n, 0.0);
    double p_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) p_sum += p[i * n + j] = cond[i * n + j] + cond[j * n + i];
    for (auto& x : p) x /= p_sum;

    const std::size_t dim = params.out_dim;
    Rng rng(params.seed);
    std::vector<std::vector<double>> y(n, std::vector<double>(dim));
    for (auto& row : y)
        for (auto& x : row) x = rng.normal() * 1e-4;

    auto center = [&] {
        for (std::size_t d = 0; d < dim; ++d) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += y[i][d];
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) y[i][d] -= mean;
        }
    };
    center();

    std::vector<std::vector<double>> velocity(n, std::vector<double>(dim, 0.0));
    std::vector<std::vector<double>> grad(n, std::vector<double>(dim));
    std::vector<double> num(n * n);
    if (params.record_kl) result.kl_trace.push_back(tsne_kl(p, y));

    for (int iter = 0; iter < params.iterations; ++iter) {
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double q = 1.0 / (1.0 + squared_distance(y[i], y[j]));
                num[i * n + j] = num[j * n + i] = q;
                z += 2.0 * q;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(grad[i].begin(), grad[i].end(), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double w = num[i * n + j];
                const double mult = 4.0 * (p[i * n + j] - w / z) * w;
                for (std::size_t d = 0; d < dim; ++d) grad[i][d] += mult * (y[i][d] - y[j][d]);
            }
        }
        const double momentum = iter < params.momentum_switch ? params.initial_momentum : params.final_momentum;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dim; ++d) {
                velocity[i][d] = momentum * velocity[i][d] - params.learning_rate * grad[i][d];
                y[i][d] += velocity[i][d];
            }
        center();
        if (params.record_kl) result.kl_trace.push_back(tsne_kl(p, y));
    }

    result.points = std::move(y);
    return result;
}

}  // namespace topicorr
