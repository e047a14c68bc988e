#include "netsched/models.hpp"

#include <cmath>

namespace netsched {

namespace {

// Cholesky solve of the (small, SPD) ridge normal equations.
std::vector<double> solve_spd(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t m = b.size();
    std::vector<std::vector<double>> l(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (s <= 0.0)
                    throw ValidationError(
                        "degenerate training data: collinear features (try ridge_lambda > 0)");
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // forward then backward substitution
    std::vector<double> yv(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * yv[k];
        yv[i] = s / l[i][i];
    }
    std::vector<double> x(m);
    for (std::size_t ii = m; ii-- > 0;) {
        double s = yv[ii];
        for (std::size_t k = ii + 1; k < m; ++k) s -= l[k][ii] * x[k];
        x[ii] = s / l[ii][ii];
    }
    return x;
}

} // namespace

TrainedModel train_linear(const Dataset& data, const TrainConfig& cfg) {
    validate(data);
    const std::size_t n = data.size();
    if (n < 2) throw ValidationError("train_linear needs at least 2 rows");
    if (cfg.linear.ridge_lambda < 0.0)
        throw ValidationError("ridge_lambda must be >= 0");

    const std::size_t d = kFeatureCount;
    std::vector<double> mean(d, 0.0);
    std::vector<double> scale(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (const auto& fv : data.features) s += fv[j];
        mean[j] = s / static_cast<double>(n);
        double sq = 0.0;
        for (const auto& fv : data.features) sq += (fv[j] - mean[j]) * (fv[j] - mean[j]);
        const double sd = std::sqrt(sq / static_cast<double>(n));
        scale[j] = sd;
    }

    // Constant columns carry no signal; keep them out of the solve.
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < d; ++j) {
        if (scale[j] > 0.0)
            active.push_back(j);
        else
            scale[j] = 1.0;
    }

    double ybar = 0.0;
    for (double t : data.targets_s) ybar += t;
    ybar /= static_cast<double>(n);

    std::vector<double> weights(d, 0.0);
    if (!active.empty()) {
        const std::size_t m = active.size();
        // Z'Z + lambda I and Z'(y - ybar) over standardized active columns.
        std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
        std::vector<double> b(m, 0.0);
        std::vector<double> z(m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t p = 0; p < m; ++p) {
                const std::size_t j = active[p];
                z[p] = (data.features[i][j] - mean[j]) / scale[j];
            }
            const double dy = data.targets_s[i] - ybar;
            for (std::size_t p = 0; p < m; ++p) {
                b[p] += z[p] * dy;
                for (std::size_t q = 0; q <= p; ++q) a[p][q] += z[p] * z[q];
            }
        }
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) a[p][q] = a[q][p];
            a[p][p] += cfg.linear.ridge_lambda;
        }
        const std::vector<double> w = solve_spd(std::move(a), std::move(b));
        for (std::size_t p = 0; p < m; ++p) weights[active[p]] = w[p];
    }

    TrainedModel model;
    model.kind = ModelKind::Linear;
    model.schema = data.schema;
    model.config = cfg;
    model.params = LinearParams{std::move(weights), ybar, std::move(mean), std::move(scale)};
    return model;
}

} // namespace netsched
