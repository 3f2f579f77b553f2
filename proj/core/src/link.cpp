#include "fsir/link.hpp"

#include "fsir/error.hpp"
#include "fsir/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

namespace fsir {

namespace {

struct Fold {
    std::vector<Index> train;
    std::vector<Index> test;
};

std::vector<Fold> make_folds(Index n, const CvScheme& scheme, std::uint64_t seed) {
    std::vector<Fold> folds;
    if (std::holds_alternative<LeaveOneOut>(scheme)) {
        for (Index i = 0; i < n; ++i) {
            Fold f;
            f.test = {i};
            for (Index j = 0; j < n; ++j) {
                if (j != i) f.train.push_back(j);
            }
            folds.push_back(std::move(f));
        }
        return folds;
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    Index train_rows = 0;
    if (const auto* h = std::get_if<Holdout>(&scheme)) {
        if (!(h->train_fraction > 0.0 && h->train_fraction < 1.0)) {
            throw ArgumentError("cv: holdout fraction must lie in (0,1)");
        }
        Rng rng(seed);
        for (Index i = n - 1; i > 0; --i) {
            const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        train_rows = static_cast<Index>(std::lround(h->train_fraction * static_cast<double>(n)));
    } else {
        train_rows = std::get<LeadingSplit>(scheme).train_rows;
    }
    if (train_rows < 2 || train_rows >= n) {
        throw ArgumentError("cv: split leaves " + std::to_string(train_rows) + " training and " +
                            std::to_string(n - train_rows) + " validation rows");
    }
    Fold f;
    f.train.assign(order.begin(), order.begin() + train_rows);
    f.test.assign(order.begin() + train_rows, order.end());
    folds.push_back(std::move(f));
    return folds;
}

}  // namespace

SmootherModel::SmootherModel(Matrix xi, Vector y, Vector bandwidths)
    : xi_(std::move(xi)), y_(std::move(y)), bandwidths_(std::move(bandwidths)) {
    if (xi_.rows() < 2) throw ArgumentError("SmootherModel: need at least 2 training points");
    if (xi_.rows() != y_.size()) {
        throw ArgumentError("SmootherModel: " + std::to_string(xi_.rows()) + " indices but " +
                            std::to_string(y_.size()) + " responses");
    }
    if (bandwidths_.size() != xi_.cols()) {
        throw ArgumentError("SmootherModel: bandwidth count does not match index dimension");
    }
    if (!xi_.allFinite() || !y_.allFinite()) throw DataError("SmootherModel: non-finite training data");
    for (Index j = 0; j < bandwidths_.size(); ++j) {
        if (!(bandwidths_(j) > 0.0) || !std::isfinite(bandwidths_(j))) {
            throw ArgumentError("SmootherModel: bandwidths must be positive");
        }
    }
}

SmootherModel fit_smoother(const Matrix& xi, const Vector& y) {
    const Index m = xi.rows();
    const Index p = xi.cols();
    if (m < 2) throw ArgumentError("fit_smoother: need at least 2 training points");
    const double shrink = std::pow(static_cast<double>(m), -1.0 / (4.0 + static_cast<double>(p)));
    Vector h(p);
    std::vector<std::string> warnings;
    for (Index j = 0; j < p; ++j) {
        const auto col = xi.col(j);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(m - 1));
        const double range = col.maxCoeff() - col.minCoeff();
        const double floor = 1e-8 * (range + 1e-8);
        h(j) = sd * shrink;
        if (!(h(j) >= floor)) {
            warnings.push_back("fit_smoother: bandwidth of index " + std::to_string(j + 1) +
                               " floored (zero variance)");
            h(j) = floor;
        }
    }
    SmootherModel model(xi, y, std::move(h));
    for (auto& w : warnings) model.add_warning(std::move(w));
    return model;
}

SmootherPrediction predict_smoother(const SmootherModel& model, const Matrix& xi_new) {
    const Matrix& xi = model.xi();
    const Vector& h = model.bandwidths();
    if (xi_new.cols() != xi.cols()) {
        throw ArgumentError("predict_smoother: queries have " + std::to_string(xi_new.cols()) +
                            " coordinates, model expects " + std::to_string(xi.cols()));
    }
    const double y_lo = model.y().minCoeff();
    const double y_hi = model.y().maxCoeff();
    SmootherPrediction out;
    out.values.resize(xi_new.rows());
    for (Index q = 0; q < xi_new.rows(); ++q) {
        double weight_sum = 0.0;
        double weighted_y = 0.0;
        double nearest = std::numeric_limits<double>::infinity();
        Index nearest_row = 0;
        for (Index i = 0; i < xi.rows(); ++i) {
            double dist = 0.0;
            for (Index c = 0; c < xi.cols(); ++c) {
                const double z = (xi_new(q, c) - xi(i, c)) / h(c);
                dist += z * z;
            }
            const double w = std::exp(-0.5 * dist);
            weight_sum += w;
            weighted_y += w * model.y()(i);
            if (dist < nearest) {
                nearest = dist;
                nearest_row = i;
            }
        }
        if (weight_sum > 0.0) {
            out.values(q) = std::clamp(weighted_y / weight_sum, y_lo, y_hi);
        } else {
            out.values(q) = model.y()(nearest_row);
            ++out.fallbacks;
        }
    }
    return out;
}

double prediction_error(const Vector& y_hat, const Vector& y) {
    if (y_hat.size() != y.size()) {
        throw ArgumentError("prediction_error: " + std::to_string(y_hat.size()) + " predictions for " +
                            std::to_string(y.size()) + " responses");
    }
    if (y.size() < 1) throw ArgumentError("prediction_error: empty input");
    return std::sqrt((y_hat - y).squaredNorm() / static_cast<double>(y.size()));
}

CvScheme default_scheme(Index n) {
    if (n <= 200) return LeaveOneOut{};
    return Holdout{0.7};
}

std::string scheme_name(const CvScheme& scheme) {
    if (std::holds_alternative<LeaveOneOut>(scheme)) return "loo";
    if (const auto* h = std::get_if<Holdout>(&scheme)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "holdout:%.17g", h->train_fraction);
        return buf;
    }
    return "first:" + std::to_string(std::get<LeadingSplit>(scheme).train_rows);
}

CvReport cv_select_k(const Dataset& d, const CvOptions& options) {
    if (options.rank_grid.empty()) throw ArgumentError("cv_select_k: empty rank grid");
    options.policy.validate();

    // Canonical row order makes LOO results independent of the input order.
    const Dataset data = std::holds_alternative<LeaveOneOut>(options.scheme)
                             ? d.subset(canonical_order(d))
                             : d;
    const Index n = data.size();
    const auto grid_count = options.rank_grid.size();

    CvReport report;
    report.rank_grid = options.rank_grid;
    report.cv_values.assign(grid_count, std::numeric_limits<double>::quiet_NaN());
    report.paired_se.assign(grid_count, std::numeric_limits<double>::quiet_NaN());
    report.notes.assign(grid_count, "");
    report.scheme = options.scheme;
    report.seed = options.seed;

    std::vector<bool> feasible(grid_count, true);
    for (std::size_t g = 0; g < grid_count; ++g) {
        const Index k = options.rank_grid[g];
        if (k < 1 || k > data.grid_size()) {
            feasible[g] = false;
            report.notes[g] = "infeasible: k outside [1, J]";
        } else if (options.directions < 1 || options.directions > std::min(options.slices - 1, k)) {
            feasible[g] = false;
            report.notes[g] = "infeasible: p > min(S-1, k)";
        }
    }

    const std::vector<Fold> folds = make_folds(n, options.scheme, options.seed);
    report.folds_total = static_cast<Index>(folds.size());

    // errors[g][i]: squared held-out error of observation i at candidate g (NaN if not evaluated).
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> errors(grid_count, std::vector<double>(static_cast<std::size_t>(n), nan));
    std::vector<bool> evaluated(static_cast<std::size_t>(n), false);

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        const Dataset train = data.subset(fold.train);
        Matrix test_x(static_cast<Index>(fold.test.size()), data.grid_size());
        Vector test_y(static_cast<Index>(fold.test.size()));
        for (std::size_t t = 0; t < fold.test.size(); ++t) {
            test_x.row(static_cast<Index>(t)) = data.x().row(fold.test[t]);
            test_y(static_cast<Index>(t)) = data.y()(fold.test[t]);
        }
        std::optional<SirProblem> problem;
        try {
            problem.emplace(train, options.slices, EqualFrequency{}, options.policy);
        } catch (const EmptySliceError& e) {
            ++report.folds_skipped;
            report.fold_notes.push_back("fold " + std::to_string(f + 1) + " skipped: " + e.what());
            continue;
        }
        for (Index t : fold.test) evaluated[static_cast<std::size_t>(t)] = true;
        for (std::size_t g = 0; g < grid_count; ++g) {
            if (!feasible[g]) continue;
            try {
                const SirFit sf = problem->fit(options.rank_grid[g], options.directions, false);
                const SmootherModel smoother = fit_smoother(sf.xi_hat, train.y());
                const Vector y_hat = predict_smoother(smoother, predict_indices(sf, test_x)).values;
                for (std::size_t t = 0; t < fold.test.size(); ++t) {
                    const double r = y_hat(static_cast<Index>(t)) - test_y(static_cast<Index>(t));
                    errors[g][static_cast<std::size_t>(fold.test[t])] = r * r;
                }
            } catch (const NumericalError& e) {
                feasible[g] = false;
                report.notes[g] = std::string("failed: ") + e.what();
            }
        }
    }

    for (std::size_t g = 0; g < grid_count; ++g) {
        if (!feasible[g]) continue;
        double sum = 0.0;
        for (Index i = 0; i < n; ++i) {
            if (evaluated[static_cast<std::size_t>(i)]) sum += errors[g][static_cast<std::size_t>(i)];
        }
        report.cv_values[g] = sum;
    }

    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < grid_count; ++g) {
        if (std::isnan(report.cv_values[g])) continue;
        if (!best || report.cv_values[g] < report.cv_values[*best] ||
            (report.cv_values[g] == report.cv_values[*best] &&
             options.rank_grid[g] < options.rank_grid[*best])) {
            best = g;
        }
    }
    if (!best) throw NumericalError("cv_select_k: no feasible rank candidate could be evaluated");
    report.k_star = options.rank_grid[*best];

    for (std::size_t g = 0; g < grid_count; ++g) {
        if (std::isnan(report.cv_values[g])) continue;
        std::vector<double> diffs;
        for (Index i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            if (evaluated[u]) diffs.push_back(errors[g][u] - errors[*best][u]);
        }
        const auto m = static_cast<double>(diffs.size());
        double se = 0.0;
        if (diffs.size() > 1) {
            const double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / m;
            double ss = 0.0;
            for (double x : diffs) ss += (x - mean) * (x - mean);
            se = std::sqrt(m * ss / (m - 1.0));
        }
        report.paired_se[g] = se;
        if (g != *best && report.cv_values[g] - report.cv_values[*best] > 2.0 * se) {
            report.significant_minimum = true;
        }
    }
    return report;
}

}  // namespace fsir
