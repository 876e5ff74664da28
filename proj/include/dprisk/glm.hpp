#pragma once

#include "dprisk/features.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dprisk::glm {

/// Named coefficients, optionally with standard errors. The published
/// 30-term set ships as data/table1_2016_2019.csv in the same format.
struct CoefficientSet {
    std::vector<std::string> terms;
    Eigen::VectorXd estimates;
    Eigen::VectorXd std_errors; // NaN where not available

    static CoefficientSet load_csv(const std::filesystem::path& path);
    void save_csv(const std::filesystem::path& path) const;

    Eigen::Index size() const { return estimates.size(); }
};

/// Stable logistic function, exact for |eta| up to ~700.
double sigmoid(double eta);

/// Resolves coefficient names against the canonical feature-term order once,
/// then scores feature vectors. Unknown or duplicate names raise InputError
/// listing the discrepancy.
class Scorer {
  public:
    explicit Scorer(CoefficientSet coefficients);

    double eta(const features::FeatureVector& x) const;
    double probability(const features::FeatureVector& x) const { return sigmoid(eta(x)); }

    const CoefficientSet& coefficients() const { return coefficients_; }

  private:
    CoefficientSet coefficients_;
    std::vector<std::size_t> feature_index_;
};

/// Predicted DP probability for one feature vector.
double predict(const features::FeatureVector& x, const CoefficientSet& coefficients);

/// Design matrix with labels; columns follow `terms`.
struct ModelMatrix {
    std::vector<std::string> terms;
    Eigen::MatrixXd x; // n rows, terms.size() columns
    Eigen::VectorXd y; // labels in {0, 1}

    Eigen::Index rows() const { return x.rows(); }
    std::vector<std::string>::const_iterator find_term(const std::string& name) const;
};

/// Canonical 30-column matrix from observations with known outcomes.
ModelMatrix build_model_matrix(std::span<const PersonYearObservation> observations,
                               const features::OccupationRiskMap& risk_map,
                               const features::EmployerGiniMap& gini_map);

/// Bernoulli log-likelihood of the labels under the given coefficients,
/// with per-row probabilities clamped away from {0,1} by 1e-15. Coefficient
/// terms must name columns of the matrix; other columns are treated as
/// absent from the model.
double log_likelihood(const ModelMatrix& matrix, const CoefficientSet& coefficients);

struct FitOptions {
    int max_iterations = 50;
    double relative_ll_tolerance = 1e-10;
    double score_tolerance = 1e-8;
};

struct FitResult {
    CoefficientSet coefficients;
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0; // intercept-only
    double aic = 0.0;
    double mcfadden_r2 = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string diagnostics;
};

/// Maximum-likelihood logistic fit by iteratively reweighted least squares
/// with step-halving. Exactly collinear columns raise NumericError naming
/// the dependent terms; non-convergence (e.g. complete separation) returns
/// converged=false with diagnostics instead of throwing.
FitResult fit_irls(const ModelMatrix& matrix, std::span<const std::string> term_subset,
                   const FitOptions& options = {});

/// Same, warm-started from initial estimates aligned with term_subset.
FitResult fit_irls(const ModelMatrix& matrix, std::span<const std::string> term_subset,
                   const Eigen::VectorXd& initial, const FitOptions& options);

/// Rank-based (Mann-Whitney) AUC with half credit for ties. Requires at
/// least one positive and one negative label.
double auc(std::span<const double> scores, std::span<const int> labels);

struct ModelMetrics {
    double aic = 0.0;
    double mcfadden_r2 = 0.0;
};

/// AIC and McFadden pseudo-R2 of a coefficient set evaluated on a matrix
/// (k = number of coefficient terms).
ModelMetrics model_metrics(const CoefficientSet& coefficients, const ModelMatrix& matrix);

/// Backward elimination: repeatedly drops the term whose removal most
/// improves AIC; while the model is over `max_terms` it drops even when AIC
/// worsens. The intercept is never dropped. Ties go to the smallest |z|.
FitResult backward_eliminate(const ModelMatrix& matrix,
                             std::span<const std::string> candidate_terms, int max_terms = 30,
                             const FitOptions& options = {});

} // namespace dprisk::glm
