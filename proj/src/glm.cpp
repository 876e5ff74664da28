#include "dprisk/glm.hpp"

#include "dprisk/csv.hpp"
#include "dprisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

namespace dprisk::glm {

namespace {

constexpr double kProbClamp = 1e-15;
const double kLogClamp = std::log(kProbClamp);

double softplus(double x) {
    // log(1 + e^x) without overflow.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

/// log p and log(1-p) under the likelihood clamp.
double row_log_likelihood(double eta, double y) {
    const double log_p = -softplus(-eta);
    const double log_q = -softplus(eta);
    return y * std::max(log_p, kLogClamp) + (1.0 - y) * std::max(log_q, kLogClamp);
}

double data_log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        total += row_log_likelihood(eta[i], y[i]);
    }
    return total;
}

double intercept_only_log_likelihood(const Eigen::VectorXd& y) {
    const Eigen::Index n = y.size();
    if (n == 0) {
        return 0.0;
    }
    const double mean = y.sum() / static_cast<double>(n);
    if (mean <= 0.0 || mean >= 1.0) {
        return 0.0; // degenerate: every label identical
    }
    return static_cast<double>(n) * (mean * std::log(mean) + (1.0 - mean) * std::log(1.0 - mean));
}

std::vector<std::size_t> resolve_terms(const std::vector<std::string>& available,
                                       std::span<const std::string> wanted,
                                       const char* what) {
    std::vector<std::size_t> indices;
    indices.reserve(wanted.size());
    std::vector<std::string> missing;
    for (const auto& name : wanted) {
        const auto it = std::find(available.begin(), available.end(), name);
        if (it == available.end()) {
            missing.push_back(name);
        } else {
            indices.push_back(static_cast<std::size_t>(it - available.begin()));
        }
    }
    if (!missing.empty()) {
        std::string listed;
        for (const auto& name : missing) {
            if (!listed.empty()) {
                listed += ", ";
            }
            listed += name;
        }
        throw InputError(std::string(what) + ": unknown term name(s): " + listed);
    }
    std::vector<std::size_t> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InputError(std::string(what) + ": duplicate term names in subset");
    }
    return indices;
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        threads.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += workers) {
                fn(i);
            }
        });
    }
    for (auto& thread : threads) {
        thread.join();
    }
}

} // namespace

double sigmoid(double eta) {
    if (eta >= 0.0) {
        return 1.0 / (1.0 + std::exp(-eta));
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

CoefficientSet CoefficientSet::load_csv(const std::filesystem::path& path) {
    const std::vector<std::string> header = {"term_name", "estimate", "std_error"};
    CsvReader reader(path, header);
    CoefficientSet set;
    std::vector<std::string> fields;
    std::vector<double> estimates;
    std::vector<double> errors;
    while (reader.next(fields)) {
        if (fields[0].empty()) {
            throw SchemaError(reader.context(0) + ": empty term name");
        }
        set.terms.push_back(fields[0]);
        estimates.push_back(parse_double_field(reader, 1, fields[1]));
        errors.push_back(fields[2].empty() ? std::numeric_limits<double>::quiet_NaN()
                                           : parse_double_field(reader, 2, fields[2]));
    }
    for (std::size_t i = 0; i < set.terms.size(); ++i) {
        for (std::size_t j = i + 1; j < set.terms.size(); ++j) {
            if (set.terms[i] == set.terms[j]) {
                throw SchemaError(path.filename().string() + ": duplicate term '" + set.terms[i] +
                                  "'");
            }
        }
    }
    set.estimates = Eigen::Map<Eigen::VectorXd>(estimates.data(),
                                                static_cast<Eigen::Index>(estimates.size()));
    set.std_errors =
        Eigen::Map<Eigen::VectorXd>(errors.data(), static_cast<Eigen::Index>(errors.size()));
    return set;
}

void CoefficientSet::save_csv(const std::filesystem::path& path) const {
    const std::vector<std::string> header = {"term_name", "estimate", "std_error"};
    CsvWriter writer(path, header);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const double se = std_errors[static_cast<Eigen::Index>(i)];
        writer.write_row(std::array<std::string, 3>{
            terms[i], format_double(estimates[static_cast<Eigen::Index>(i)]),
            std::isnan(se) ? std::string() : format_double(se)});
    }
}

Scorer::Scorer(CoefficientSet coefficients) : coefficients_(std::move(coefficients)) {
    const std::vector<std::string> canonical(features::kTermNames.begin(),
                                             features::kTermNames.end());
    feature_index_ = resolve_terms(canonical, coefficients_.terms, "coefficients");
}

double Scorer::eta(const features::FeatureVector& x) const {
    double value = 0.0;
    for (std::size_t i = 0; i < feature_index_.size(); ++i) {
        value += coefficients_.estimates[static_cast<Eigen::Index>(i)] * x[feature_index_[i]];
    }
    return value;
}

double predict(const features::FeatureVector& x, const CoefficientSet& coefficients) {
    return Scorer(coefficients).probability(x);
}

std::vector<std::string>::const_iterator ModelMatrix::find_term(const std::string& name) const {
    return std::find(terms.begin(), terms.end(), name);
}

ModelMatrix build_model_matrix(std::span<const PersonYearObservation> observations,
                               const features::OccupationRiskMap& risk_map,
                               const features::EmployerGiniMap& gini_map) {
    ModelMatrix matrix;
    matrix.terms.assign(features::kTermNames.begin(), features::kTermNames.end());
    Eigen::Index labeled = 0;
    for (const auto& obs : observations) {
        if (obs.outcome != Outcome::unknown) {
            ++labeled;
        }
    }
    matrix.x.resize(labeled, features::kTermCount);
    matrix.y.resize(labeled);
    Eigen::Index row = 0;
    for (const auto& obs : observations) {
        if (obs.outcome == Outcome::unknown) {
            continue;
        }
        const auto x = features::build_feature_vector(obs, risk_map, gini_map);
        for (int j = 0; j < features::kTermCount; ++j) {
            matrix.x(row, j) = x[static_cast<std::size_t>(j)];
        }
        matrix.y[row] = obs.outcome == Outcome::yes ? 1.0 : 0.0;
        ++row;
    }
    return matrix;
}

double log_likelihood(const ModelMatrix& matrix, const CoefficientSet& coefficients) {
    if (matrix.rows() == 0) {
        return 0.0;
    }
    const auto indices = resolve_terms(matrix.terms, coefficients.terms, "log_likelihood");
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(matrix.rows());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        eta += coefficients.estimates[static_cast<Eigen::Index>(i)] *
               matrix.x.col(static_cast<Eigen::Index>(indices[i]));
    }
    return data_log_likelihood(eta, matrix.y);
}

namespace {

struct IrlsProblem {
    Eigen::MatrixXd x;
    const Eigen::VectorXd& y;
    std::vector<std::string> terms;
};

FitResult run_irls(const IrlsProblem& problem, Eigen::VectorXd beta, const FitOptions& options,
                   bool check_rank) {
    const Eigen::Index n = problem.x.rows();
    const Eigen::Index k = problem.x.cols();
    if (n <= k) {
        throw InputError("fit requires more observations (" + std::to_string(n) +
                         ") than terms (" + std::to_string(k) + ")");
    }

    if (check_rank) {
        const Eigen::MatrixXd gram = problem.x.transpose() * problem.x;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
        if (qr.rank() < k) {
            const auto& perm = qr.colsPermutation().indices();
            std::string dependent;
            for (Eigen::Index i = qr.rank(); i < k; ++i) {
                if (!dependent.empty()) {
                    dependent += ", ";
                }
                dependent += problem.terms[static_cast<std::size_t>(perm[i])];
            }
            throw NumericError("design matrix is rank deficient; dependent column(s): " +
                               dependent);
        }
    }

    FitResult result;
    result.coefficients.terms = problem.terms;

    Eigen::VectorXd eta = problem.x * beta;
    double ll = data_log_likelihood(eta, problem.y);
    bool converged = false;
    std::string diagnostics;
    int iterations = 0;
    Eigen::VectorXd p(n);
    Eigen::VectorXd w(n);
    Eigen::MatrixXd hessian(k, k);

    for (; iterations < options.max_iterations; ++iterations) {
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = sigmoid(eta[i]);
        }
        const Eigen::VectorXd score = problem.x.transpose() * (problem.y - p);
        if (score.cwiseAbs().maxCoeff() < options.score_tolerance) {
            converged = true;
            break;
        }
        w = p.array() * (1.0 - p.array());
        hessian.noalias() =
            (problem.x.array().colwise() * w.array()).matrix().transpose() * problem.x;
        const Eigen::VectorXd delta = hessian.ldlt().solve(score);
        if (!delta.allFinite()) {
            diagnostics = "singular weighted information matrix (separation?)";
            break;
        }

        double step = 1.0;
        double ll_new = ll;
        Eigen::VectorXd beta_try;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving) {
            beta_try = beta + step * delta;
            const Eigen::VectorXd eta_try = problem.x * beta_try;
            ll_new = data_log_likelihood(eta_try, problem.y);
            if (ll_new >= ll) {
                beta = beta_try;
                eta = eta_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            diagnostics = "step-halving failed to improve the log-likelihood";
            break;
        }
        const double change = ll_new - ll;
        ll = ll_new;
        if (change <= options.relative_ll_tolerance * std::max(1.0, std::abs(ll))) {
            converged = true;
            ++iterations;
            break;
        }
    }

    if (!converged && diagnostics.empty()) {
        diagnostics = "no convergence after " + std::to_string(iterations) +
                      " iterations (possible complete separation)";
    }

    // Standard errors from the inverse observed information at the final
    // estimates.
    for (Eigen::Index i = 0; i < n; ++i) {
        p[i] = sigmoid(eta[i]);
    }
    w = p.array() * (1.0 - p.array());
    hessian.noalias() =
        (problem.x.array().colwise() * w.array()).matrix().transpose() * problem.x;
    Eigen::VectorXd std_errors(k);
    const Eigen::MatrixXd covariance =
        hessian.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
    for (Eigen::Index j = 0; j < k; ++j) {
        const double variance = covariance(j, j);
        std_errors[j] =
            variance > 0.0 ? std::sqrt(variance) : std::numeric_limits<double>::quiet_NaN();
    }

    result.coefficients.estimates = beta;
    result.coefficients.std_errors = std_errors;
    result.log_likelihood = ll;
    result.null_log_likelihood = intercept_only_log_likelihood(problem.y);
    result.aic = 2.0 * static_cast<double>(k) - 2.0 * ll;
    result.mcfadden_r2 = result.null_log_likelihood != 0.0
                             ? 1.0 - ll / result.null_log_likelihood
                             : std::numeric_limits<double>::quiet_NaN();
    result.iterations = iterations;
    result.converged = converged;
    result.diagnostics = diagnostics;
    return result;
}

IrlsProblem gather_problem(const ModelMatrix& matrix, std::span<const std::string> term_subset) {
    const auto indices = resolve_terms(matrix.terms, term_subset, "fit");
    IrlsProblem problem{Eigen::MatrixXd(matrix.rows(), static_cast<Eigen::Index>(indices.size())),
                        matrix.y,
                        {term_subset.begin(), term_subset.end()}};
    for (std::size_t j = 0; j < indices.size(); ++j) {
        problem.x.col(static_cast<Eigen::Index>(j)) =
            matrix.x.col(static_cast<Eigen::Index>(indices[j]));
    }
    return problem;
}

Eigen::VectorXd cold_start(const IrlsProblem& problem) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(problem.x.cols());
    const auto it = std::find(problem.terms.begin(), problem.terms.end(),
                              features::kTermNames[features::kIntercept]);
    if (it != problem.terms.end() && problem.y.size() > 0) {
        const double mean =
            std::clamp(problem.y.mean(), 1.0 / static_cast<double>(problem.y.size() + 1),
                       1.0 - 1.0 / static_cast<double>(problem.y.size() + 1));
        beta[it - problem.terms.begin()] = std::log(mean / (1.0 - mean));
    }
    return beta;
}

} // namespace

FitResult fit_irls(const ModelMatrix& matrix, std::span<const std::string> term_subset,
                   const FitOptions& options) {
    const auto problem = gather_problem(matrix, term_subset);
    return run_irls(problem, cold_start(problem), options, /*check_rank=*/true);
}

FitResult fit_irls(const ModelMatrix& matrix, std::span<const std::string> term_subset,
                   const Eigen::VectorXd& initial, const FitOptions& options) {
    const auto problem = gather_problem(matrix, term_subset);
    if (initial.size() != problem.x.cols()) {
        throw InputError("initial estimates size does not match term subset");
    }
    return run_irls(problem, initial, options, /*check_rank=*/true);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw InputError("auc: scores and labels differ in length");
    }
    const std::size_t n = scores.size();
    long positives = 0;
    for (const int label : labels) {
        if (label != 0 && label != 1) {
            throw InputError("auc: labels must be 0 or 1");
        }
        positives += label;
    }
    const long negatives = static_cast<long>(n) - positives;
    if (positives == 0 || negatives == 0) {
        throw InputError("auc: needs at least one positive and one negative label");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const double average_rank = static_cast<double>(i + j) / 2.0 + 1.0; // 1-based
        for (std::size_t t = i; t <= j; ++t) {
            if (labels[order[t]] == 1) {
                positive_rank_sum += average_rank;
            }
        }
        i = j + 1;
    }
    const double np = static_cast<double>(positives);
    const double nn = static_cast<double>(negatives);
    return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

ModelMetrics model_metrics(const CoefficientSet& coefficients, const ModelMatrix& matrix) {
    ModelMetrics metrics;
    const double ll = log_likelihood(matrix, coefficients);
    const double ll0 = intercept_only_log_likelihood(matrix.y);
    metrics.aic = 2.0 * static_cast<double>(coefficients.terms.size()) - 2.0 * ll;
    metrics.mcfadden_r2 =
        ll0 != 0.0 ? 1.0 - ll / ll0 : std::numeric_limits<double>::quiet_NaN();
    return metrics;
}

FitResult backward_eliminate(const ModelMatrix& matrix,
                             std::span<const std::string> candidate_terms, int max_terms,
                             const FitOptions& options) {
    if (max_terms < 1) {
        throw InputError("backward elimination requires max_terms >= 1");
    }
    const std::string intercept_name = features::kTermNames[features::kIntercept];
    FitResult current = fit_irls(matrix, candidate_terms, options);

    while (true) {
        const auto& terms = current.coefficients.terms;
        const int k = static_cast<int>(terms.size());
        std::vector<std::size_t> removable;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            if (terms[j] != intercept_name) {
                removable.push_back(j);
            }
        }
        if (removable.empty()) {
            break;
        }
        const bool over_cap = k > max_terms;
        if (!over_cap && k == 1) {
            break;
        }

        std::vector<FitResult> fits(removable.size());
        std::vector<std::string> base_terms = terms;
        const Eigen::VectorXd base_beta = current.coefficients.estimates;
        parallel_for(removable.size(), [&](std::size_t r) {
            const std::size_t drop = removable[r];
            std::vector<std::string> subset;
            subset.reserve(base_terms.size() - 1);
            Eigen::VectorXd initial(static_cast<Eigen::Index>(base_terms.size()) - 1);
            Eigen::Index out = 0;
            for (std::size_t j = 0; j < base_terms.size(); ++j) {
                if (j == drop) {
                    continue;
                }
                subset.push_back(base_terms[j]);
                initial[out++] = base_beta[static_cast<Eigen::Index>(j)];
            }
            const auto problem = gather_problem(matrix, subset);
            // Dropping a column of a full-rank design keeps it full rank.
            fits[r] = run_irls(problem, initial, options, /*check_rank=*/false);
        });

        double best_aic = std::numeric_limits<double>::infinity();
        for (const auto& fit : fits) {
            best_aic = std::min(best_aic, fit.aic);
        }
        // Tie-break among near-equal AICs: drop the term with the smallest
        // |z| in the current fit.
        std::size_t chosen = removable.size();
        double chosen_z = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < removable.size(); ++r) {
            if (fits[r].aic > best_aic + 1e-9) {
                continue;
            }
            const Eigen::Index j = static_cast<Eigen::Index>(removable[r]);
            const double se = current.coefficients.std_errors[j];
            const double z = se > 0.0 ? std::abs(current.coefficients.estimates[j] / se)
                                      : std::numeric_limits<double>::infinity();
            if (chosen == removable.size() || z < chosen_z) {
                chosen = r;
                chosen_z = z;
            }
        }

        if (over_cap || fits[chosen].aic < current.aic - 1e-12) {
            current = std::move(fits[chosen]);
        } else {
            break;
        }
    }
    return current;
}

} // namespace dprisk::glm
