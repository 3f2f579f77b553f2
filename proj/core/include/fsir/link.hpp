#pragma once

// Nonparametric link estimation on fitted indices and cross-validated choice
// of the truncation rank k.

#include "fsir/sir.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace fsir {

/// Gaussian product-kernel Nadaraya-Watson regressor.
class SmootherModel {
public:
    SmootherModel(Matrix xi, Vector y, Vector bandwidths);

    const Matrix& xi() const { return xi_; }
    const Vector& y() const { return y_; }
    const Vector& bandwidths() const { return bandwidths_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

private:
    Matrix xi_;
    Vector y_;
    Vector bandwidths_;
    std::vector<std::string> warnings_;
};

/// Normal-reference bandwidths h_j = sd_j * m^{-1/(4+p)}, floored at
/// 1e-8 * (range_j + 1e-8).
SmootherModel fit_smoother(const Matrix& xi, const Vector& y);

struct SmootherPrediction {
    Vector values;
    /// Queries whose weights all underflowed and fell back to the nearest training point.
    Index fallbacks = 0;
};

SmootherPrediction predict_smoother(const SmootherModel& model, const Matrix& xi_new);

/// sqrt(mean((y_hat - y)^2)).
double prediction_error(const Vector& y_hat, const Vector& y);

struct LeaveOneOut {};
/// Seeded random split; the first round(fraction * n) shuffled rows train.
struct Holdout {
    double train_fraction = 0.7;
};
/// The first `train_rows` rows train, the rest validate.
struct LeadingSplit {
    Index train_rows = 0;
};

using CvScheme = std::variant<LeaveOneOut, Holdout, LeadingSplit>;

/// LOO for n <= 200, a 70/30 holdout otherwise.
CvScheme default_scheme(Index n);
std::string scheme_name(const CvScheme& scheme);

struct CvOptions {
    Index slices = 10;
    Index directions = 1;
    std::vector<Index> rank_grid;
    CvScheme scheme = LeaveOneOut{};
    std::uint64_t seed = 0;
    RankPolicy policy;
};

struct CvReport {
    std::vector<Index> rank_grid;
    /// CV(k) = sum of squared held-out errors; NaN for skipped k.
    std::vector<double> cv_values;
    /// Monte Carlo standard error of CV(k) - CV(k_star) from paired held-out errors.
    std::vector<double> paired_se;
    std::vector<std::string> notes;  // per k, empty when fine
    Index k_star = 0;
    bool significant_minimum = false;
    CvScheme scheme;
    std::uint64_t seed = 0;
    Index folds_total = 0;
    Index folds_skipped = 0;
    std::vector<std::string> fold_notes;
};

/// Refits SIR and the smoother on each training fold for every candidate k and
/// picks the minimizer of the held-out squared error (ties to the smaller k).
CvReport cv_select_k(const Dataset& d, const CvOptions& options);

}  // namespace fsir
